//! Command dispatch and report emission.

use std::path::Path;

use num::complex::Complex64;
use serde_json::{json, Value};

use super::config::{AverageMode, Command, ConfigError, ExperimentConfig};
use super::parse::parse_lefun;
use crate::ergolab::report::{write_csv, CSV_HEADER};
use crate::ergolab::{
    hk_seminorm_approx, l2_ladder, pointwise_ladder, recurrence_ladder, short_interval_double_average, weyl_ladder,
    AverageReport, CharacterObservable, ErgoError, System, WeylFreq,
};
use crate::lefun::growth::Witness;
use crate::lefun::{decompose, find_window, is_one_good, LEFunction, LeError};
use crate::petlab::{pet_reduce, verify_certificate, PetError, PolyFamily, ReductionCertificate};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Le(#[from] LeError),
    #[error(transparent)]
    Pet(#[from] PetError),
    #[error(transparent)]
    Ergo(#[from] ErgoError),
}

impl RunError {
    /// 2 for undecided growth questions, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let le = match self {
            RunError::Le(e) => Some(e),
            RunError::Pet(PetError::Le(e)) => Some(e),
            RunError::Ergo(ErgoError::Le(e)) => Some(e),
            _ => None,
        };
        match le {
            Some(LeError::Inconclusive { .. } | LeError::IrrationalityUndecided(_)) => 2,
            _ => 1,
        }
    }
}

/// A finished run: the report body and one summary line per ladder point.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub summary: Vec<String>,
    pub exit_code: i32,
}

struct Row {
    n: u64,
    mode: &'static str,
    value: Complex64,
    target: Complex64,
}

fn rows_csv(id: &str, rows: &[Row]) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| ErgoError::Format(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            id.to_string(),
            r.n.to_string(),
            r.mode.to_string(),
            format!("{:e}", r.value.re),
            format!("{:e}", r.value.im),
            format!("{:e}", r.target.re),
            format!("{:e}", r.target.im),
            format!("{:e}", (r.value - r.target).norm()),
        ])
        .map_err(err)?;
    }
    finish(w)
}

fn rows_json(id: &str, rows: &[Row]) -> String {
    let v: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "experiment_id": id, "N": r.n, "mode": r.mode,
                "value": [r.value.re, r.value.im], "target": [r.target.re, r.target.im],
                "gap": (r.value - r.target).norm(),
            })
        })
        .collect();
    pretty(&Value::Array(v))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, RunError> {
    let bytes = w.into_inner().map_err(|e| ErgoError::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| ErgoError::Format(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    finish(w)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn report_body(id: &str, reports: &[&AverageReport], format: Format) -> Result<String, RunError> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&mut buf, id, reports)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
        Format::Json => Ok(pretty(&serde_json::to_value(reports).expect("report serializes"))),
    }
}

fn report_summary(id: &str, r: &AverageReport) -> Vec<String> {
    r.points
        .iter()
        .map(|p| format!("{id} N={} {} value={:.6e} gap={:.3e}", p.n, r.mode.as_str(), p.value.norm(), p.gap))
        .collect()
}

fn witness_str(w: &Witness) -> String {
    let list = |v: Vec<String>| v.join(" ");
    match w {
        Witness::DominatingTerm { term } => format!("dominating-term {term}"),
        Witness::NonIntegerPolynomial { coeffs } => {
            format!("non-integer-polynomial [{}]", list(coeffs.iter().map(|c| c.to_string()).collect()))
        }
        Witness::CzPolynomial { scale, integer_poly } => {
            format!("cz-polynomial {scale} * [{}]", list(integer_poly.iter().map(|c| c.to_string()).collect()))
        }
    }
}

fn observables(cfg: &ExperimentConfig, sys: &System) -> Result<Vec<CharacterObservable>, RunError> {
    Ok(cfg.observables.iter().map(|o| o.build(sys.dim)).collect::<Result<_, _>>()?)
}

fn system(cfg: &ExperimentConfig) -> Result<System, RunError> {
    let spec = cfg
        .system
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid(format!("{} needs a system", cfg.command.name())))?;
    Ok(System::new(spec)?)
}

fn load(path: Option<&Path>, what: &str) -> Result<String, RunError> {
    let p = path.ok_or_else(|| ConfigError::Invalid(format!("missing {what} input")))?;
    Ok(std::fs::read_to_string(p).map_err(ConfigError::from)?)
}

/// Runs a validated configuration.
pub fn run(cfg: &ExperimentConfig, format: Format) -> Result<Outcome, RunError> {
    cfg.validate()?;
    let id = cfg.name.as_str();
    let fs = cfg.parsed_functions()?;
    let (body, summary) = match cfg.command {
        Command::Classify => classify(&cfg.functions, &fs, format)?,
        Command::Decompose => {
            let dec = decompose(&fs)?;
            let basis: Vec<String> = dec.g.iter().map(|g| g.to_string()).collect();
            let mut summary = vec![format!("{id} basis: {}", basis.join(", "))];
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for (i, src) in cfg.functions.iter().enumerate() {
                let c: Vec<String> = dec.c[i].iter().map(|x| x.to_string()).collect();
                let p: Vec<String> = dec.p[i].iter().map(|x| x.to_string()).collect();
                let residual = dec.residual[i].to_string();
                summary.push(format!("{id} {src}: c=[{}] p=[{}]", c.join(" "), p.join(" ")));
                items.push(json!({"expr": src, "coefficients": c, "polynomial": p, "residual": residual}));
                rows.push(vec![src.clone(), c.join(" "), p.join(" "), residual]);
            }
            let body = match format {
                Format::Csv => table(&["expr", "coefficients", "polynomial", "residual"], rows)?,
                Format::Json => pretty(&json!({
                    "basis": basis,
                    "levels": dec.levels,
                    "functions": items,
                    "residual_bound": dec.residual_bound,
                })),
            };
            (body, summary)
        }
        Command::Window => {
            let w = find_window(&fs, cfg.d.unwrap_or(1))?;
            let summary = vec![format!(
                "{id} L={} d={} case={:?} special={}",
                w.l, w.d, w.case, cfg.functions[w.special]
            )];
            let rows: Vec<Vec<String>> = cfg
                .functions
                .iter()
                .enumerate()
                .map(|(i, f)| vec![f.clone(), w.orders[i].to_string(), w.decremented[i].to_string(), w.l.to_string()])
                .collect();
            let body = match format {
                Format::Csv => table(&["expr", "order", "decremented", "window"], rows)?,
                Format::Json => pretty(&json!({
                    "window": w.l.to_string(),
                    "exponent": w.exponent.to_string(),
                    "d": w.d,
                    "orders": w.orders,
                    "special": w.special,
                    "case": format!("{:?}", w.case),
                    "decremented": w.decremented,
                })),
            };
            (body, summary)
        }
        Command::PetReduce => {
            let fam = PolyFamily::from_json(&load(cfg.input.as_deref(), "family")?)?;
            let cert = pet_reduce(&fam)?;
            let mut summary: Vec<String> = cert
                .trace
                .iter()
                .enumerate()
                .map(|(i, st)| {
                    format!("{id} step {} case={:?} {} -> {} size={}", i + 1, st.case, st.type_before, st.type_after, st.size)
                })
                .collect();
            summary.push(format!("{id} s={} t={} Y={:?}", cert.s, cert.t, cert.y));
            let body = match format {
                Format::Json => {
                    let mut s = cert.to_json();
                    s.push('\n');
                    s
                }
                Format::Csv => table(
                    &["step", "pivot", "case", "type_before", "type_after", "size"],
                    cert.trace
                        .iter()
                        .enumerate()
                        .map(|(i, st)| {
                            vec![
                                (i + 1).to_string(),
                                (st.pivot + 1).to_string(),
                                format!("{:?}", st.case),
                                st.type_before.to_string(),
                                st.type_after.to_string(),
                                st.size.to_string(),
                            ]
                        })
                        .collect(),
                )?,
            };
            (body, summary)
        }
        Command::VerifyCert => {
            let cert = ReductionCertificate::from_json(&load(cfg.input.as_deref(), "certificate")?)?;
            let report = verify_certificate(&cert);
            let report = report.into_result()?;
            let summary = report.checks.iter().map(|c| format!("{id} {} ok", c.item)).collect();
            let body = match format {
                Format::Csv => table(
                    &["item", "passed", "detail"],
                    report.checks.iter().map(|c| vec![c.item.into(), c.passed.to_string(), c.detail.clone()]).collect(),
                )?,
                Format::Json => pretty(&serde_json::to_value(&report).expect("report serializes")),
            };
            (body, summary)
        }
        Command::Average => {
            let sys = system(cfg)?;
            let obs = observables(cfg, &sys)?;
            let report = match cfg.mode {
                AverageMode::L2 => l2_ladder(&sys, &obs, &fs, &cfg.ladder)?,
                AverageMode::Pointwise => {
                    let x = sys.seed_point(&cfg.seed)?;
                    pointwise_ladder(&sys, &obs, &fs, &cfg.ladder, &x)?
                }
            };
            let mut summary = report_summary(id, &report);
            if report.unverified_merges > 0 {
                summary.push(format!("{id} unverified frequency merges: {}", report.unverified_merges));
            }
            (report_body(id, &[&report], format)?, summary)
        }
        Command::Weyl => {
            let ts: Vec<WeylFreq> = if cfg.frequencies.is_empty() {
                vec![WeylFreq::ratio(0, 1); fs.len()]
            } else {
                cfg.frequencies.iter().map(|s| WeylFreq::parse(s)).collect::<Result<_, _>>()?
            };
            let report = weyl_ladder(&fs, &ts, &cfg.ladder)?;
            (report_body(id, &[&report], format)?, report_summary(id, &report))
        }
        Command::Seminorm => {
            let sys = system(cfg)?;
            let obs = observables(cfg, &sys)?;
            let schedule = cfg.schedule.clone().unwrap_or_default();
            let orders = if cfg.orders.is_empty() { vec![1, 2] } else { cfg.orders.clone() };
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for (j, f) in obs.iter().enumerate() {
                for &s in &orders {
                    let est = hk_seminorm_approx(&sys, f, s, &schedule)?;
                    let n = est.schedule.last().copied().unwrap_or(0);
                    let target = est.oracle.unwrap_or(f64::NAN);
                    summary.push(format!(
                        "{id} f{} s={s} H={n} value={:.6e} oracle={} doubled={}{}",
                        j + 1,
                        est.value,
                        est.oracle.map_or("none".into(), |o| format!("{o:.6e}")),
                        est.doubled.map_or("none".into(), |d| format!("{d:.6e}")),
                        if est.schedule_too_small { " schedule-too-small" } else { "" }
                    ));
                    rows.push(Row {
                        n,
                        mode: "seminorm",
                        value: Complex64::new(est.value, 0.0),
                        target: Complex64::new(target, 0.0),
                    });
                }
            }
            let body = match format {
                Format::Csv => rows_csv(id, &rows)?,
                Format::Json => rows_json(id, &rows),
            };
            (body, summary)
        }
        Command::Recurrence => {
            let sys = system(cfg)?;
            let bx = cfg.region.clone().ok_or_else(|| ConfigError::Invalid("recurrence needs a box".into()))?;
            let values = recurrence_ladder(&sys, &bx, &fs, &cfg.ladder)?;
            let target = bx.measure().powi(fs.len() as i32 + 1);
            let rows: Vec<Row> = cfg
                .ladder
                .iter()
                .zip(&values)
                .map(|(&n, &v)| Row { n, mode: "recurrence", value: v.into(), target: target.into() })
                .collect();
            let summary = rows
                .iter()
                .map(|r| format!("{id} N={} recurrence value={:.6e} target={target:.6e}", r.n, r.value.re))
                .collect();
            let body = match format {
                Format::Csv => rows_csv(id, &rows)?,
                Format::Json => rows_json(id, &rows),
            };
            (body, summary)
        }
        Command::IntervalCheck => {
            let sys = system(cfg)?;
            let obs = observables(cfg, &sys)?;
            let l: LEFunction = match &cfg.window {
                Some(w) => parse_lefun(w).map_err(|e| ConfigError::Parse { index: usize::MAX, message: e.to_string() })?,
                None => find_window(&fs, cfg.d.unwrap_or(1))?.l,
            };
            let d = cfg.d.unwrap_or(2);
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for &r in &cfg.ladder {
                let c = short_interval_double_average(&sys, &obs, &fs, r, &l, d)?;
                let target = c.rhs.powf(1.0 / d as f64);
                summary.push(format!(
                    "{id} R={r} lhs={:.6e} rhs^(1/{d})={target:.6e} {}",
                    c.lhs,
                    if c.holds(0.0) { "holds" } else { "fails" }
                ));
                rows.push(Row { n: r, mode: "interval-check", value: c.lhs.into(), target: target.into() });
            }
            let body = match format {
                Format::Csv => rows_csv(id, &rows)?,
                Format::Json => rows_json(id, &rows),
            };
            (body, summary)
        }
    };
    Ok(Outcome { body, summary, exit_code: 0 })
}

fn classify(src: &[String], fs: &[LEFunction], format: Format) -> Result<(String, Vec<String>), RunError> {
    let mut rows = Vec::new();
    let mut items = Vec::new();
    let mut summary = Vec::new();
    for (s, f) in src.iter().zip(fs) {
        let g = is_one_good(f)?;
        let w = witness_str(&g.witness);
        summary.push(format!("{s}: one_good={} ({w})", g.good));
        items.push(json!({"expr": s, "one_good": g.good, "witness": w}));
        rows.push(vec![s.clone(), g.good.to_string(), w]);
    }
    let body = match format {
        Format::Csv => table(&["expr", "one_good", "witness"], rows)?,
        Format::Json => pretty(&Value::Array(items)),
    };
    Ok((body, summary))
}

/// Builds a config for the expression subcommands.
pub fn expression_config(command: Command, exprs: &[String]) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(command.name(), command);
    c.functions = exprs.to_vec();
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergolab::SystemSpec;
    use crate::xcli::config::{ObservableSpec, TermSpec};

    #[test]
    fn classify_row() {
        let c = expression_config(Command::Classify, &["t^(3/2)".into()]);
        let out = run(&c, Format::Csv).unwrap();
        let line = out.body.lines().nth(1).unwrap();
        assert!(line.starts_with("t^(3/2),true,"), "{line}");
        assert_eq!(out.exit_code, 0);
    }

    #[test]
    fn weyl_zero_frequency() {
        let mut c = expression_config(Command::Weyl, &["t^(3/2)".into()]);
        c.ladder = vec![10, 100];
        let out = run(&c, Format::Csv).unwrap();
        let row: Vec<&str> = out.body.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row[3], "1e0");
        assert_eq!(row[7], "0e0");
        assert_eq!(out.summary.len(), 2);
    }

    #[test]
    fn deterministic_average() {
        let mut c = expression_config(Command::Average, &["t^(3/2)".into(), "t*log(t)".into()]);
        c.name = "avg".into();
        c.system = Some(SystemSpec::TorusRotation { alpha: vec!["sqrt(2)".into()] });
        c.observables = vec![ObservableSpec { terms: vec![TermSpec { k: vec![1], c: [1.0, 0.0] }] }; 2];
        c.ladder = vec![100, 1000];
        let a = run(&c, Format::Csv).unwrap();
        let b = run(&c, Format::Csv).unwrap();
        assert_eq!(a.body, b.body);
        assert!(a.body.starts_with("experiment_id,N,mode"));
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let e = RunError::Le(LeError::Inconclusive { f: "a".into(), g: "b".into() });
        assert_eq!(e.exit_code(), 2);
        let e = RunError::Le(LeError::NormalForm("x".into()));
        assert_eq!(e.exit_code(), 1);
        let c = expression_config(Command::Average, &["t".into()]);
        assert_eq!(run(&c, Format::Csv).unwrap_err().exit_code(), 1);
    }
}
