//! Exact rational arithmetic helpers.
//!
//! Everything the chain claims as an equality or inequality (row sums,
//! schedule certificates, transition asymmetry, coupling bounds) is computed
//! in arbitrary-precision rationals; floats appear only in simulation and in
//! power iteration.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

pub type Rat = BigRational;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Renders a rational as `"num/den"` (or `"num"` for integers), the form
/// used in all JSON outputs.
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"num/den"`, `"num"`, or a plain decimal like `"0.05"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let int: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().ok()? };
        let frac_val: BigInt = if frac.is_empty() { BigInt::zero() } else { frac.parse().ok()? };
        let den = BigInt::from(10u32).pow(digits);
        let neg = s.starts_with('-');
        let num = if neg { int * &den - frac_val } else { int * &den + frac_val };
        return Some(Rat::new(num, den));
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// Nearest f64, for reporting only.
pub fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let scaled = (r * rat_i(1 << 30)).trunc();
        scaled.to_f64().unwrap_or(f64::NAN) / (1u64 << 30) as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("13/42").unwrap(), rat(13, 42));
        assert_eq!(parse_rat("-3").unwrap(), rat_i(-3));
        assert_eq!(parse_rat("0.05").unwrap(), rat(1, 20));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rat("1/0").is_none());
    }

    #[test]
    fn render_forms() {
        assert_eq!(rat_str(&rat(13, 42)), "13/42");
        assert_eq!(rat_str(&rat(4, 2)), "2");
    }
}
