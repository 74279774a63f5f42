//! Small exact-arithmetic helpers: continued-fraction rounding, primitive
//! integer vectors and the `"p/q"` text form used in spec files and reports.

use num::integer::Integer;
use num::rational::{BigRational, Rational64};
use num::{BigInt, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Best rational approximation of `x` with denominator at most `max_den`,
/// taken from the convergents and semiconvergents of its continued fraction.
pub fn best_rational(x: f64, max_den: i64) -> Rational64 {
    if !x.is_finite() {
        return Rational64::zero();
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut rem = target;
    let mut best = Rational64::new(target.round() as i64, 1);
    for _ in 0..64 {
        let a = rem.floor();
        if a > i64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as i64;
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            // semiconvergent with the largest admissible partial quotient
            let k = (max_den - q0) / q1.max(1);
            if k > 0 {
                let cand = Rational64::new(k * p1 + p0, k * q1 + q0);
                if err(&cand, target) < err(&best, target) {
                    best = cand;
                }
            }
            break;
        }
        let p2 = a * p1 + p0;
        let cand = Rational64::new(p2, q2);
        if err(&cand, target) <= err(&best, target) {
            best = cand;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = rem - a as f64;
        if frac < 1e-15 {
            break;
        }
        rem = 1.0 / frac;
    }
    if negative {
        -best
    } else {
        best
    }
}

fn err(r: &Rational64, x: f64) -> f64 {
    (*r.numer() as f64 / *r.denom() as f64 - x).abs()
}

/// Scales a rational vector to the primitive integer vector on the same ray.
pub fn primitive_from_rationals(v: &[Rational64]) -> Vec<i64> {
    let lcm = v.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
    let ints: Vec<i64> = v.iter().map(|r| (r * lcm).to_integer()).collect();
    let g = ints.iter().fold(0i64, |acc, &n| acc.gcd(&n));
    if g == 0 {
        return ints;
    }
    ints.iter().map(|n| n / g).collect()
}

/// Same as [`primitive_from_rationals`] for arbitrary-precision input.
pub fn primitive_from_big(v: &[BigRational]) -> Vec<i64> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|r| (r * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, n| acc.gcd(n));
    ints.iter()
        .map(|n| {
            let m = if g.is_zero() { n.clone() } else { n / &g };
            m.to_i64().expect("primitive witness entry overflows i64")
        })
        .collect()
}

/// Rounds a real direction to a nearby primitive integer vector: normalize
/// by the largest entry, round each entry with denominator at most
/// `max_den`, clear denominators.
pub fn round_direction(v: &[f64], max_den: i64) -> Option<Vec<i64>> {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let rats: Vec<Rational64> = v.iter().map(|x| best_rational(x / scale, max_den)).collect();
    let ints = primitive_from_rationals(&rats);
    if ints.iter().all(|&n| n == 0) {
        None
    } else {
        Some(ints)
    }
}

pub fn format_rational(r: &Rational64) -> String {
    if *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(p, q))
        }
        None => Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn big_is_positive(r: &BigRational) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_simple_fractions() {
        assert_eq!(best_rational(0.5, 64), Rational64::new(1, 2));
        assert_eq!(best_rational(-0.333333333, 64), Rational64::new(-1, 3));
        assert_eq!(best_rational(0.005, 64), Rational64::new(0, 1));
        assert_eq!(best_rational(std::f64::consts::PI, 64), Rational64::new(201, 64));
        assert_eq!(best_rational(std::f64::consts::PI, 10), Rational64::new(22, 7));
    }

    #[test]
    fn primitive_vectors() {
        assert_eq!(round_direction(&[0.0, 2.0], 64), Some(vec![0, 1]));
        assert_eq!(round_direction(&[1.0, -0.5], 64), Some(vec![2, -1]));
        assert_eq!(round_direction(&[0.0, 0.0], 64), None);
        let v = [Rational64::new(2, 3), Rational64::new(4, 3)];
        assert_eq!(primitive_from_rationals(&v), vec![1, 2]);
    }

    #[test]
    fn text_form() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational64::new(1, 2));
        assert_eq!(parse_rational(" -2 ").unwrap(), Rational64::from_integer(-2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&Rational64::new(-3, 4)), "-3/4");
        assert_eq!(format_rational(&Rational64::from_integer(5)), "5");
    }
}
