//! Exact integer and rational helpers: binomials, factorials, and a
//! certified enclosure of the natural logarithm of a positive rational.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type ExactRational = BigRational;

pub fn rational(num: i64, den: i64) -> ExactRational {
    BigRational::new(num.into(), den.into())
}

pub fn integer(v: u64) -> ExactRational {
    BigRational::from_integer(v.into())
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Nearest `f64`. Big rationals beyond the exponent range saturate.
pub fn to_f64(x: &ExactRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    // Scale numerator and denominator down to 1000 bits each.
    let shift = |v: &BigInt| v.bits().saturating_sub(1000);
    let (sn, sd) = (shift(x.numer()), shift(x.denom()));
    let n = (x.numer() >> sn).to_f64().unwrap_or(0.0);
    let d = (x.denom() >> sd).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi(sn as i32 - sd as i32)
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// Rounds `x` down (or up) onto the grid `2^-bits`.
fn round_dyadic(x: &ExactRational, bits: u64, up: bool) -> ExactRational {
    let scaled = x * BigRational::from_integer(pow2(bits));
    let q = if up { scaled.ceil() } else { scaled.floor() };
    BigRational::new(q.to_integer(), pow2(bits))
}

/// Enclosure of `ln(y)` for `y` in `[1, 2)` via
/// `ln y = 2 atanh(z)`, `z = (y - 1)/(y + 1)`, with the tail of the series
/// bounded by a geometric remainder.
fn ln_small(y: &ExactRational, bits: u64) -> (ExactRational, ExactRational) {
    let one = BigRational::one();
    let z = (y - &one) / (y + &one);
    if z.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    let z2 = &z * &z;
    // z <= 1/3, so each term gains log2(9) > 3 bits.
    let terms = bits / 3 + 2;
    let mut power = z.clone();
    let mut sum = BigRational::zero();
    for j in 0..terms {
        sum += &power / BigRational::from_integer((2 * j + 1).into());
        power *= &z2;
    }
    let two = BigRational::from_integer(2.into());
    let lo = &two * &sum;
    let remainder = &two * &power / (BigRational::from_integer((2 * terms + 1).into()) * (&one - &z2));
    let hi = &lo + remainder;
    (lo, hi)
}

/// Rational bounds `lo <= ln(x) <= hi` with `hi - lo` on the order of
/// `2^-bits` for moderate `x`.
pub fn ln_enclosure(x: &ExactRational, bits: u64) -> Result<(ExactRational, ExactRational)> {
    if !x.is_positive() {
        return Err(Error::invalid("logarithm of a non-positive number"));
    }
    // x = 2^k * y with y in [1, 2).
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let scale = |k: i64| -> ExactRational {
        if k >= 0 {
            BigRational::from_integer(pow2(k as u64))
        } else {
            BigRational::new(BigInt::one(), pow2((-k) as u64))
        }
    };
    let mut y = x / scale(k);
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    while y < one {
        k -= 1;
        y *= &two;
    }
    while y >= two {
        k += 1;
        y /= &two;
    }
    let guard = bits + 2 + (k.unsigned_abs().max(1)).ilog2() as u64 + 1;
    let (ylo, yhi) = ln_small(&y, guard);
    let (l2lo, l2hi) = ln_small(&two, guard);
    let kk = BigRational::from_integer(k.into());
    let (klo, khi) = if k >= 0 {
        (&kk * l2lo, &kk * l2hi)
    } else {
        (&kk * l2hi, &kk * l2lo)
    };
    Ok((
        round_dyadic(&(klo + ylo), bits, false),
        round_dyadic(&(khi + yhi), bits, true),
    ))
}

/// Decides `t` against `ln(x)` exactly, refining the logarithm enclosure
/// until it separates from `t`. `ln(x)` is irrational for rational `x != 1`,
/// so `Equal` is only returned for `x = 1, t = 0`.
pub fn cmp_ln(t: &ExactRational, x: &ExactRational) -> Result<Ordering> {
    if x.is_one() {
        return Ok(t.cmp(&BigRational::zero()));
    }
    // Float fast path; only taken when the gap dwarfs f64 error.
    let (tf, lf) = (to_f64(t), to_f64(x).ln());
    if tf.is_finite() && lf.is_finite() {
        let margin = 1e-9 * (1.0 + tf.abs().max(lf.abs()));
        if tf < lf - margin {
            return Ok(Ordering::Less);
        }
        if tf > lf + margin {
            return Ok(Ordering::Greater);
        }
    }
    let mut bits = 64;
    while bits <= 1 << 14 {
        let (lo, hi) = ln_enclosure(x, bits)?;
        if *t < lo {
            return Ok(Ordering::Less);
        }
        if *t > hi {
            return Ok(Ordering::Greater);
        }
        bits *= 2;
    }
    Err(Error::Invariant("logarithm comparison did not separate".into()))
}

/// `a/b` reduced, for unsigned big integers.
pub fn ratio(a: BigUint, b: BigUint) -> ExactRational {
    let g = a.gcd(&b);
    BigRational::new((a / &g).into(), (b / g).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6u32.into());
        assert_eq!(binomial(8, 4), 70u32.into());
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(factorial(5), 120u32.into());
        assert_eq!(factorial(0), BigUint::one());
    }

    #[test]
    fn ln2_enclosure_is_tight() {
        let (lo, hi) = ln_enclosure(&integer(2), 80).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!(to_f64(&lo) <= ln2 && ln2 <= to_f64(&hi));
        assert!(to_f64(&(hi - lo)) < 1e-20);
    }

    #[test]
    fn cmp_ln_boundaries() {
        // ln 1024 = 6.931471805599453...
        assert_eq!(cmp_ln(&rational(6931, 1000), &integer(1024)).unwrap(), Ordering::Less);
        assert_eq!(cmp_ln(&rational(6932, 1000), &integer(1024)).unwrap(), Ordering::Greater);
        // Agrees with ln to 17 digits: forces the exact path.
        let close = rational(6_931_471_805_599_453, 1_000_000_000_000_000);
        assert_eq!(cmp_ln(&close, &integer(1024)).unwrap(), Ordering::Less);
        let close_hi = rational(6_931_471_805_599_454, 1_000_000_000_000_000);
        assert_eq!(cmp_ln(&close_hi, &integer(1024)).unwrap(), Ordering::Greater);
        assert_eq!(cmp_ln(&integer(0), &integer(1)).unwrap(), Ordering::Equal);
        assert_eq!(cmp_ln(&rational(-70, 100), &rational(1, 2)).unwrap(), Ordering::Less);
        assert_eq!(cmp_ln(&rational(-69, 100), &rational(1, 2)).unwrap(), Ordering::Greater);
    }

    proptest! {
        #[test]
        fn enclosure_contains_float_ln(num in 1u64..1_000_000, den in 1u64..1_000_000) {
            let x = BigRational::new(num.into(), den.into());
            let (lo, hi) = ln_enclosure(&x, 60).unwrap();
            let l = (num as f64 / den as f64).ln();
            prop_assert!(to_f64(&lo) <= l + 1e-12);
            prop_assert!(to_f64(&hi) >= l - 1e-12);
            prop_assert!(lo <= hi);
            prop_assert!(to_f64(&(hi - lo)) < 1e-15);
        }
    }
}
