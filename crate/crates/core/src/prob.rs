//! Exact rational arithmetic helpers.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for every probability and cost.
pub type Ratio = BigRational;

pub fn ratio(num: i64, den: i64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(n))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient as `u64`, `None` on overflow.
pub fn binomial_u64(n: u64, k: u64) -> Option<u64> {
    binomial(n, k).to_u64()
}

pub fn to_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratios with huge numerator and denominator: scale both down first
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn log2(r: &Ratio) -> f64 {
    libm::log2(to_f64(r))
}

pub fn in_unit_interval(r: &Ratio) -> bool {
    !r.is_negative() && r <= &Ratio::one()
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it is within `tol`; otherwise the exact binary value of
/// `x` is returned.
pub fn approx_from_f64(x: f64, max_den: u64, tol: f64) -> Option<Ratio> {
    if !x.is_finite() {
        return None;
    }
    if let Some(r) = continued_fraction(x, max_den) {
        if libm::fabs(to_f64(&r) - x) <= tol {
            return Some(r);
        }
    }
    Ratio::from_float(x)
}

fn continued_fraction(x: f64, max_den: u64) -> Option<Ratio> {
    let neg = x < 0.0;
    let mut rest = libm::fabs(x);
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = libm::floor(rest);
        if a > 1e18 {
            break;
        }
        let a_int = a as u128;
        let p2 = a_int.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a_int.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a;
        if frac < 1e-18 {
            break;
        }
        rest = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let mut r = Ratio::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        r = -r;
    }
    Some(r)
}

/// `num/den` (or a bare integer) with `den > 0`, reduced.
pub fn format_ratio(r: &Ratio) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatioError(pub String);

impl fmt::Display for ParseRatioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational {:?}", self.0)
    }
}

impl core::error::Error for ParseRatioError {}

/// Parses `"num/den"`, `"num"` or a finite decimal such as `"0.25"`.
pub fn parse_ratio(s: &str) -> Result<Ratio, ParseRatioError> {
    let err = || ParseRatioError(s.to_string());
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits: String = whole.trim_start_matches(['-', '+']).chars().chain(frac.chars()).collect();
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let n = BigInt::from_str(&digits).map_err(|_| err())?;
        let d = num_traits::pow(BigInt::from(10u8), frac.len());
        let r = Ratio::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(s).map(Ratio::from_integer).map_err(|_| err())
}

/// `floor(r)` as an integer.
pub fn floor_int(r: &Ratio) -> BigInt {
    r.numer().div_floor(r.denom())
}
