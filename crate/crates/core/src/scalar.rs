//! Scalar abstraction shared by the numeric kernels.
//!
//! `Real` is implemented for `f32`, `f64` and the arbitrary-precision
//! [`Hp`] wrapper. Exact work (PET coefficients, certificates) uses
//! `num::BigRational` directly and never goes through this trait.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num::{BigInt, BigRational, ToPrimitive, Zero};
use num_traits::{Num, One};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Real scalar used by evaluation and summation kernels.
pub trait Real:
    Clone + fmt::Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Nominal precision in bits of the significand.
    const BITS: usize;

    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn from_bigint(x: &BigInt) -> Self;
    fn from_ratio(x: &BigRational) -> Self {
        Self::from_bigint(x.numer()) / Self::from_bigint(x.denom())
    }
    fn to_f64(&self) -> f64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn pow(&self, e: &Self) -> Self;
    fn abs(&self) -> Self;
    fn floor(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn pi() -> Self;
    fn euler() -> Self;
    /// Integer part rounded toward minus infinity, when finite.
    fn floor_int(&self) -> Option<BigInt>;
    /// Rounds an arbitrary-precision value into this type.
    fn from_big(x: &BigFloat) -> Self;

    fn unit_roundoff() -> f64 {
        (-(Self::BITS as f64)).exp2()
    }

    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

macro_rules! impl_prim {
    ($t:ty, $bits:expr) => {
        impl Real for $t {
            const BITS: usize = $bits;
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn from_i64(x: i64) -> Self {
                x as $t
            }
            fn from_bigint(x: &BigInt) -> Self {
                x.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn from_ratio(x: &BigRational) -> Self {
                x.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn pow(&self, e: &Self) -> Self {
                <$t>::powf(*self, *e)
            }
            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
            fn floor(&self) -> Self {
                <$t>::floor(*self)
            }
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
            fn pi() -> Self {
                std::f64::consts::PI as $t
            }
            fn euler() -> Self {
                std::f64::consts::E as $t
            }
            fn floor_int(&self) -> Option<BigInt> {
                if !<$t>::is_finite(*self) {
                    return None;
                }
                num::FromPrimitive::from_f64(<$t>::floor(*self) as f64)
            }
            fn from_big(x: &BigFloat) -> Self {
                Hp::<64>(x.clone()).to_f64() as $t
            }
        }
    };
}

impl_prim!(f32, 24);
impl_prim!(f64, 53);

/// Binary floating point with `P` bits of significand, backed by astro-float.
#[derive(Clone)]
pub struct Hp<const P: usize>(pub BigFloat);

impl<const P: usize> Hp<P> {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    /// Parses a decimal literal such as `1.25e-3`.
    pub fn parse_decimal(s: &str) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, P, RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Hp(v))
        }
    }

    /// Decimal rendering with at most `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".into();
        }
        // Full-precision digits cut to `digits` significant ones; rounding
        // first would print the binary rounding error as extra digits.
        let full = with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
        let (mant, exp) = full.split_at(full.find('e').unwrap_or(full.len()));
        let mut out = String::new();
        let mut kept = 0;
        for ch in mant.chars() {
            if ch.is_ascii_digit() {
                if kept == digits {
                    continue;
                }
                kept += 1;
            }
            out.push(ch);
        }
        let out = if out.contains('.') { out.trim_end_matches('0').trim_end_matches('.').to_string() } else { out };
        out + exp
    }

    /// Nearest-integer distance `|x - round(x)|` as an `f64`.
    pub fn frac_distance(&self) -> f64 {
        let fl = self.0.floor();
        let fr = self.0.sub(&fl, P, RM);
        let one = BigFloat::from_u8(1, P);
        let other = one.sub(&fr, P, RM);
        let a = Hp::<P>(fr).to_f64();
        let b = Hp::<P>(other).to_f64();
        a.min(b)
    }

    pub fn is_zero_value(&self) -> bool {
        self.0.is_zero()
    }
}

fn mantissa_to_bigint(words: &[u64]) -> BigInt {
    let mut acc = BigInt::zero();
    for w in words.iter().rev() {
        acc = (acc << 64) + BigInt::from(*w);
    }
    acc
}

impl<const P: usize> fmt::Debug for Hp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hp<{}>({})", P, self.to_decimal(30))
    }
}

impl<const P: usize> fmt::Display for Hp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(40))
    }
}

impl<const P: usize> PartialEq for Hp<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl<const P: usize> PartialOrd for Hp<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! hp_binop {
    ($tr:ident, $m:ident) => {
        impl<const P: usize> $tr for Hp<P> {
            type Output = Self;
            fn $m(self, o: Self) -> Self {
                Hp(self.0.$m(&o.0, P, RM))
            }
        }
    };
}
hp_binop!(Add, add);
hp_binop!(Sub, sub);
hp_binop!(Mul, mul);
hp_binop!(Div, div);

impl<const P: usize> Rem for Hp<P> {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        Hp(self.0.rem(&o.0))
    }
}

impl<const P: usize> Neg for Hp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Hp(self.0.neg())
    }
}

impl<const P: usize> Zero for Hp<P> {
    fn zero() -> Self {
        Hp(BigFloat::from_u8(0, P))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl<const P: usize> One for Hp<P> {
    fn one() -> Self {
        Hp(BigFloat::from_u8(1, P))
    }
}

impl<const P: usize> Num for Hp<P> {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        Hp::parse_decimal(s).ok_or_else(|| format!("invalid decimal literal {s:?}"))
    }
}

impl<const P: usize> Real for Hp<P> {
    const BITS: usize = P;

    fn from_f64(x: f64) -> Self {
        Hp(BigFloat::from_f64(x, P))
    }
    fn from_i64(x: i64) -> Self {
        Hp(BigFloat::from_i64(x, P))
    }
    fn from_bigint(x: &BigInt) -> Self {
        let (sign, digits) = x.to_u64_digits();
        let mut acc = BigFloat::from_u8(0, P);
        let shift = BigFloat::from_u128(1u128 << 64, P);
        for d in digits.iter().rev() {
            acc = acc.mul(&shift, P, RM).add(&BigFloat::from_u64(*d, P), P, RM);
        }
        if sign == num::bigint::Sign::Minus {
            acc = acc.neg();
        }
        Hp(acc)
    }
    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.0.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let n = words.len();
        let hi = words[n - 1] as f64;
        let lo = if n >= 2 { words[n - 2] as f64 } else { 0.0 };
        let mag = hi * (e as f64 - 64.0).exp2() + lo * (e as f64 - 128.0).exp2();
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }
    fn exp(&self) -> Self {
        Hp(with_consts(|cc| self.0.exp(P, RM, cc)))
    }
    fn ln(&self) -> Self {
        Hp(with_consts(|cc| self.0.ln(P, RM, cc)))
    }
    fn sqrt(&self) -> Self {
        Hp(self.0.sqrt(P, RM))
    }
    fn pow(&self, e: &Self) -> Self {
        Hp(with_consts(|cc| self.0.pow(&e.0, P, RM, cc)))
    }
    fn abs(&self) -> Self {
        Hp(self.0.abs())
    }
    fn floor(&self) -> Self {
        Hp(self.0.floor())
    }
    fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }
    fn pi() -> Self {
        Hp(with_consts(|cc| cc.pi(P, RM)))
    }
    fn euler() -> Self {
        Hp(with_consts(|cc| cc.e(P, RM)))
    }
    fn from_big(x: &BigFloat) -> Self {
        let mut v = x.clone();
        let _ = v.set_precision(P, RM);
        Hp(v)
    }
    fn floor_int(&self) -> Option<BigInt> {
        if !self.is_finite() {
            return None;
        }
        let fl = self.0.floor();
        if fl.is_zero() {
            return Some(BigInt::zero());
        }
        let (words, _, sign, e, _) = fl.as_raw_parts()?;
        let m = mantissa_to_bigint(words);
        let total = (words.len() * 64) as i64;
        let shift = e as i64 - total;
        let mag = if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize };
        Some(if sign == Sign::Neg { -mag } else { mag })
    }
}

impl<const P: usize> Hp<P> {
    /// Exact conversion of a rational through a single rounding of the quotient.
    pub fn from_rational(x: &BigRational) -> Self {
        <Self as Real>::from_ratio(x)
    }

    pub fn signum_i(&self) -> i32 {
        if self.0.is_zero() {
            0
        } else if self.0.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn abs_f64_log2(&self) -> f64 {
        match self.0.exponent() {
            Some(e) => e as f64,
            None => f64::NEG_INFINITY,
        }
    }
}

/// Converts an `f64` to an exact rational (every finite double is dyadic).
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Signed comparison helper for generic reals.
pub fn sign_of<S: Real>(x: &S) -> i32 {
    if x.is_zero() {
        0
    } else if *x > S::zero() {
        1
    } else {
        -1
    }
}
