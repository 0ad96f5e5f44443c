//! Rational scalar helpers shared across the crate.
//!
//! All exact computations run on arbitrary-precision rationals. File formats
//! print rationals as lowest-terms `p/q` strings (denominator always present,
//! always positive), which round-trips bit-exactly.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Integer floor of a rational.
pub fn rat_floor(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

pub fn rat_ceil(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

pub fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Lowest-terms `p/q` form, e.g. `-3/2`, `5/1`, `0/1`.
pub fn format_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("bad rational numerator `{num}`"))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| format!("bad rational denominator `{den}`"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rat::new(n, d))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // fall back on a scaled division for extreme numerators
        let scale = BigInt::from(1_u64 << 60);
        let q = (x.numer() * &scale) / x.denom();
        q.to_f64().unwrap_or(f64::NAN) / (1u64 << 60) as f64
    })
}

pub fn rat_abs(x: &Rat) -> Rat {
    x.abs()
}

/// Fixed 12-significant-digit float formatting used by numeric reports.
pub fn format_f64(x: f64) -> String {
    format!("{x:.12e}")
}
