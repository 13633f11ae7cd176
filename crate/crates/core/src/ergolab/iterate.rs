//! Certified floors `⌊a(n)⌋` of LE functions along the integers.

use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num::{BigRational, ToPrimitive};
use rayon::prelude::*;

use super::ErgoError;
use crate::lefun::num::NumHp;
use crate::lefun::LEFunction;
use crate::scalar::{Hp, Real};

/// Values closer than this to an integer are re-evaluated at high precision.
pub const NEAR_INTEGER: f64 = 1.0 / (1u64 << 40) as f64;
/// Fractional bits used after escalation.
pub const ESCALATED_BITS: usize = 320;
/// A high-precision value closer than this to an integer is not certified.
const HP_MARGIN: f64 = 1e-60;

static ESCALATION: AtomicUsize = AtomicUsize::new(ESCALATED_BITS);

/// Precision used by [`iterate_sequence`] after escalation; values above
/// 320 select 640 bits.
pub fn set_escalation_bits(bits: usize) {
    ESCALATION.store(bits, AtomicOrdering::Relaxed);
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterateSequence {
    pub source: LEFunction,
    /// `values[n-1] = ⌊a(n)⌋`.
    pub values: Vec<i64>,
    /// Number of near-integer escalations.
    pub precision_log: usize,
    /// Points where escalation happened.
    pub escalated: Vec<u64>,
}

impl IterateSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `⌊a(n)⌋`, 1-based.
    pub fn at(&self, n: usize) -> i64 {
        self.values[n - 1]
    }
}

enum Floor {
    Fast(i64),
    Escalated(i64),
}

fn to_i64(v: f64, n: u64) -> Result<i64, ErgoError> {
    if v.abs() < 9.0e18 {
        Ok(v as i64)
    } else {
        Err(ErgoError::Overflow { n })
    }
}

fn hp_floor<const P: usize>(a: &LEFunction, n: u64) -> Result<i64, ErgoError> {
    let x = a.eval(&Hp::<P>::from_i64(n as i64))?;
    if x.frac_distance() < HP_MARGIN {
        return Err(ErgoError::PrecisionExhausted { n });
    }
    x.floor_int().and_then(|f| f.to_i64()).ok_or(ErgoError::Overflow { n })
}

fn floor_at(a: &LEFunction, n: u64, bits: usize) -> Result<Floor, ErgoError> {
    let t = n as f64;
    if let Ok((v, e)) = a.expr.eval_f64_err(t) {
        if v.is_finite() && e.is_finite() {
            let lo = (v - e).floor();
            let hi = (v + e).floor();
            let dist = (v - v.round()).abs();
            if lo == hi && dist - e >= NEAR_INTEGER {
                return Ok(Floor::Fast(to_i64(lo, n)?));
            }
        }
    }
    if let Some(q) = a.expr.eval_exact(&BigRational::from_integer(n.into())) {
        let f = q.floor().to_integer().to_i64().ok_or(ErgoError::Overflow { n })?;
        return Ok(Floor::Escalated(f));
    }
    let f = if bits <= ESCALATED_BITS { hp_floor::<ESCALATED_BITS>(a, n)? } else { hp_floor::<640>(a, n)? };
    Ok(Floor::Escalated(f))
}

/// `⌊a(n)⌋` for `n = 1..=n_max`.
pub fn iterate_sequence(a: &LEFunction, n_max: u64) -> Result<IterateSequence, ErgoError> {
    iterate_sequence_bits(a, n_max, ESCALATION.load(AtomicOrdering::Relaxed))
}

/// As [`iterate_sequence`] with the escalation precision chosen by
/// `bits` (320 or 640 fractional bits).
pub fn iterate_sequence_bits(a: &LEFunction, n_max: u64, bits: usize) -> Result<IterateSequence, ErgoError> {
    if n_max > 100_000_000 {
        return Err(ErgoError::ComplexityRefusal { cost: n_max as f64, limit: 1e8 });
    }
    let floors: Vec<Floor> =
        (1..=n_max).into_par_iter().map(|n| floor_at(a, n, bits)).collect::<Result<_, _>>()?;
    let mut values = Vec::with_capacity(floors.len());
    let mut escalated = Vec::new();
    for (i, f) in floors.into_iter().enumerate() {
        match f {
            Floor::Fast(v) => values.push(v),
            Floor::Escalated(v) => {
                values.push(v);
                escalated.push(i as u64 + 1);
            }
        }
    }
    Ok(IterateSequence { source: a.clone(), precision_log: escalated.len(), values, escalated })
}

/// High-precision value of a constant expression such as `sqrt(2) - 1`.
pub fn constant(text: &str) -> Result<NumHp, ErgoError> {
    let f = LEFunction::parse(text).map_err(|e| ErgoError::Format(e.to_string()))?;
    if f.expr.derivative(1).simplify() != crate::lefun::Expr::int(0) {
        return Err(ErgoError::Format(format!("{text} is not a constant")));
    }
    Ok(f.eval(&NumHp::from_i64(2))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> LEFunction {
        LEFunction::parse(s).unwrap()
    }

    #[test]
    fn three_halves() {
        let s = iterate_sequence(&f("t^(3/2)"), 10).unwrap();
        assert_eq!(s.at(4), 8);
        assert_eq!(s.at(9), 27);
        assert_eq!(s.at(2), 2);
    }

    #[test]
    fn sqrt2_line() {
        let s = iterate_sequence(&f("sqrt(2)*t"), 1_000_000).unwrap();
        assert_eq!(s.at(1_000_000), 1414213);
    }

    #[test]
    fn exact_integers_escalate() {
        let s = iterate_sequence(&f("t*t/4"), 6).unwrap();
        assert_eq!(s.values, vec![0, 1, 2, 4, 6, 9]);
        assert!(s.precision_log >= 3);
    }

    #[test]
    fn constants() {
        let a = constant("sqrt(2) - 1").unwrap().to_f64();
        assert!((a - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(constant("t").is_err());
    }
}
