use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardylab::ergolab::iterate::set_escalation_bits;
use hardylab::xcli::run::expression_config;
use hardylab::xcli::{run, Command, ExperimentConfig, Format, RunError};

#[derive(Parser)]
#[command(name = "hardylab", version, about = "Hardy-field iterates: classification, PET certificates, ergodic averages")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Comma-separated ladder overriding the config.
    #[arg(long, global = true, value_delimiter = ',')]
    ladder: Option<Vec<u64>>,
    /// Working precision of escalated iterate floors.
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
    /// Worker threads for the summations.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Sub {
    /// 1-good classification with a witness.
    Classify { #[arg(required = true)] exprs: Vec<String> },
    /// Basis decomposition.
    Decompose { #[arg(required = true)] exprs: Vec<String> },
    /// Common short-interval window.
    Window {
        #[arg(required = true)]
        exprs: Vec<String>,
        /// Starting order for the fastest function.
        #[arg(long, default_value_t = 1)]
        d: u32,
    },
    /// Reduce a polynomial family to a certificate.
    PetReduce { family: PathBuf },
    /// Check a reduction certificate.
    VerifyCert { cert: PathBuf },
    Average { config: PathBuf },
    Weyl { config: PathBuf },
    Seminorm { config: PathBuf },
    Recurrence { config: PathBuf },
    IntervalCheck { config: PathBuf },
}

fn config(sub: Sub) -> Result<ExperimentConfig, RunError> {
    let file = |cmd: Command, path: PathBuf| -> Result<ExperimentConfig, RunError> {
        let c = ExperimentConfig::load(&path)?;
        if c.command != cmd {
            return Err(hardylab::xcli::config::ConfigError::Invalid(format!(
                "{} holds a {} config",
                path.display(),
                c.command.name()
            ))
            .into());
        }
        Ok(c)
    };
    let input = |cmd: Command, path: PathBuf| {
        let mut c = ExperimentConfig::new(cmd.name(), cmd);
        c.input = Some(path);
        c
    };
    Ok(match sub {
        Sub::Classify { exprs } => expression_config(Command::Classify, &exprs),
        Sub::Decompose { exprs } => expression_config(Command::Decompose, &exprs),
        Sub::Window { exprs, d } => {
            let mut c = expression_config(Command::Window, &exprs);
            c.d = Some(d);
            c
        }
        Sub::PetReduce { family } => input(Command::PetReduce, family),
        Sub::VerifyCert { cert } => input(Command::VerifyCert, cert),
        Sub::Average { config } => file(Command::Average, config)?,
        Sub::Weyl { config } => file(Command::Weyl, config)?,
        Sub::Seminorm { config } => file(Command::Seminorm, config)?,
        Sub::Recurrence { config } => file(Command::Recurrence, config)?,
        Sub::IntervalCheck { config } => file(Command::IntervalCheck, config)?,
    })
}

fn execute(cli: Cli) -> Result<i32, RunError> {
    let flags = cli.flags;
    if let Some(bits) = flags.precision_bits {
        set_escalation_bits(bits);
    }
    if let Some(n) = flags.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let mut cfg = config(cli.command)?;
    if let Some(l) = flags.ladder {
        cfg.ladder = l;
    }
    if flags.out.is_some() {
        cfg.output = flags.out;
    }
    let format = match flags.format {
        Fmt::Csv => Format::Csv,
        Fmt::Json => Format::Json,
    };
    let outcome = run(&cfg, format)?;
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    match &cfg.output {
        Some(p) => std::fs::write(p, &outcome.body).map_err(hardylab::xcli::config::ConfigError::from)?,
        None => print!("{}", outcome.body),
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
