//! CSV persistence of ladder reports.

use std::io::Write;

use super::average::AverageReport;
use super::ErgoError;

pub const CSV_HEADER: [&str; 8] = ["experiment_id", "N", "mode", "value_re", "value_im", "target_re", "target_im", "gap"];

/// Writes one row per ladder point.
pub fn write_csv<W: Write>(out: W, experiment_id: &str, reports: &[&AverageReport]) -> Result<(), ErgoError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| ErgoError::Format(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in reports {
        for p in &r.points {
            w.write_record([
                experiment_id.to_string(),
                p.n.to_string(),
                r.mode.as_str().to_string(),
                format!("{:e}", p.value.re),
                format!("{:e}", p.value.im),
                format!("{:e}", p.target.re),
                format!("{:e}", p.target.im),
                format!("{:e}", p.gap),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergolab::average::{LadderPoint, Mode};
    use num::complex::Complex64;

    #[test]
    fn header_and_rows() {
        let r = AverageReport {
            mode: Mode::ExactCharacterL2,
            points: vec![LadderPoint::new(10, Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0))],
            unverified_merges: 0,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, "x", &[&r]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "experiment_id,N,mode,value_re,value_im,target_re,target_im,gap");
        assert_eq!(lines.next().unwrap(), "x,10,exact-character-L2,5e-1,0e0,0e0,0e0,5e-1");
    }
}
