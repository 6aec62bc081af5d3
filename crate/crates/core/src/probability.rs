//! Exact tail probabilities for the per-image preimage count of a reduced
//! function, the binomial comparison law, the Chernoff bound, the union bound
//! over images, and the Monte Carlo estimate it is checked against.
//!
//! All certified quantities are exact rationals. Floating point appears only
//! in Monte Carlo summaries and in the reported Chernoff value.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exact::{binomial, cmp_ln, integer, rational, ratio, ExactRational};
use crate::inv::{inv_profile, BadCriterion};
use crate::model::make_r_to_one;
use crate::reductions::complementary_reduce;
use crate::rng::SeededRng;

/// Population `n` with `r` marked items, a sample of size `draw`, and a
/// deviation threshold `s` around `r/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailQuery {
    pub n: u64,
    pub r: u64,
    pub draw: u64,
    pub s: ExactRational,
}

impl TailQuery {
    /// The reduction's split: a uniform half of the domain.
    pub fn half_split(n: u64, r: u64, s: ExactRational) -> Self {
        TailQuery { n, r, draw: n / 2, s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Law {
    /// Marked items landing in a uniform `draw`-subset.
    Hypergeometric,
    /// `r` independent fair coins.
    Binomial,
}

fn check_population(n: u64, r: u64, draw: u64) -> Result<()> {
    if r > n || draw > n {
        return Err(Error::invalid(format!("need r, draw <= n (n={n}, r={r}, draw={draw})")));
    }
    Ok(())
}

/// `C(r,k)·C(n−r,draw−k)/C(n,draw)`.
pub fn hypergeom_pmf(n: u64, r: u64, draw: u64, k: u64) -> Result<ExactRational> {
    check_population(n, r, draw)?;
    if k > r.min(draw) {
        return Err(Error::InvalidSupportPoint(k));
    }
    if draw - k > n - r {
        return Ok(BigRational::zero());
    }
    Ok(ratio(binomial(r, k) * binomial(n - r, draw - k), binomial(n, draw)))
}

pub fn binomial_pmf(r: u64, k: u64) -> Result<ExactRational> {
    if k > r {
        return Err(Error::InvalidSupportPoint(k));
    }
    Ok(ratio(binomial(r, k), BigUint::one() << r))
}

/// Numerators `C(r,k)·C(n−r,draw−k)` over the support, by the ratio
/// recurrence between consecutive `k` (each step divides exactly).
fn hypergeom_numerators(n: u64, r: u64, draw: u64) -> (u64, Vec<BigUint>) {
    let lo = draw.saturating_sub(n - r);
    let hi = r.min(draw);
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    let mut term = binomial(r, lo) * binomial(n - r, draw - lo);
    out.push(term.clone());
    for k in lo..hi {
        term = term * ((r - k) * (draw - k)) / ((k + 1) * (n - r + k + 1 - draw));
        out.push(term.clone());
    }
    (lo, out)
}

/// `P[X ∈ K]` for the `k` selected by `pick`, summed exactly in one pass.
fn tail_where(law: Law, n: u64, r: u64, draw: u64, mut pick: impl FnMut(u64) -> Result<bool>) -> Result<ExactRational> {
    match law {
        Law::Hypergeometric => {
            check_population(n, r, draw)?;
            let mut picked = Vec::new();
            for k in draw.saturating_sub(n - r)..=r.min(draw) {
                if pick(k)? {
                    picked.push(k);
                }
            }
            if picked.is_empty() {
                return Ok(BigRational::zero());
            }
            let (lo, nums) = hypergeom_numerators(n, r, draw);
            let total: BigUint = picked.iter().map(|&k| &nums[(k - lo) as usize]).sum();
            Ok(ratio(total, binomial(n, draw)))
        }
        Law::Binomial => {
            let mut total = BigUint::zero();
            let mut c = BigUint::one();
            for k in 0..=r {
                if pick(k)? {
                    total += &c;
                }
                c = c * (r - k) / (k + 1);
            }
            Ok(ratio(total, BigUint::one() << r))
        }
    }
}

fn deviation(k: u64, r: u64) -> ExactRational {
    (integer(k) - rational(r as i64, 2)).abs()
}

/// `P[|X − r/2| > s]`. The hypergeometric law uses `q.draw`; the binomial law
/// uses `q.r` fair coins.
pub fn two_sided_tail_exact(q: &TailQuery, law: Law) -> Result<ExactRational> {
    if q.s.is_negative() {
        return Err(Error::NegativeThreshold);
    }
    tail_where(law, q.n, q.r, q.draw, |k| Ok(deviation(k, q.r) > q.s))
}

/// `P[X > s]`.
pub fn upper_tail_exact(q: &TailQuery, law: Law) -> Result<ExactRational> {
    tail_where(law, q.n, q.r, q.draw, |k| Ok(integer(k) > q.s))
}

/// `e^{−ε²(r/2)/3}`, valid for `0 ≤ ε ≤ 1` and rounded up by one ulp.
pub fn chernoff_bound(r: u64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::EpsilonOutOfWindow);
    }
    if eps == 0.0 {
        return Ok(1.0);
    }
    Ok((-eps * eps * (r as f64 / 2.0) / 3.0).exp().next_up().min(1.0))
}

/// Exact check of `tail ≤ e^{−ε²(r/2)/3}` for rational `ε`, decided as
/// `ln(1/tail) ≥ ε²r/6`.
pub fn below_chernoff(tail: &ExactRational, r: u64, eps: &ExactRational) -> Result<bool> {
    if eps.is_negative() || *eps > BigRational::one() {
        return Err(Error::EpsilonOutOfWindow);
    }
    if tail.is_zero() {
        return Ok(true);
    }
    let exponent = eps * eps * integer(r) / integer(6);
    Ok(cmp_ln(&exponent, &tail.recip())? != Ordering::Greater)
}

/// Per-image BAD probability and its union bound over the `n/r` images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadProbability {
    pub per_image: ExactRational,
    pub union_bound: ExactRational,
}

pub fn bad_prob_exact(n: u64, r: u64, criterion: &BadCriterion) -> Result<BadProbability> {
    if n % 2 != 0 {
        return Err(Error::OddDomain);
    }
    if r == 0 || n % r != 0 {
        return Err(Error::RDoesNotDivideN);
    }
    if n <= r {
        return Err(Error::ThresholdUndefined);
    }
    let per_image = tail_where(Law::Hypergeometric, n, r, n / 2, |k| {
        criterion.exceeds(&deviation(k, r), n, r)
    })?;
    let union_bound = &per_image * integer(n / r);
    Ok(BadProbability { per_image, union_bound })
}

/// Monte Carlo estimate with a Wilson score interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub hits: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson: (f64, f64),
}

pub const MC_CONFIDENCE: f64 = 0.99;

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson_interval(hits: u64, trials: u64, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let nt = trials as f64;
    let p = hits as f64 / nt;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nt)) / (1.0 + z2 / nt);
    let half = z / (1.0 + z2 / nt) * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Fraction of complementary reductions of fresh `r`-to-one functions whose
/// `a` is BAD. Trial `t` runs on the child stream `("bad-trial", t)`, so the
/// result does not depend on scheduling.
pub fn monte_carlo_bad_rate(
    n: u64,
    r: u64,
    trials: u64,
    rng: &SeededRng,
    criterion: &BadCriterion,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let (nn, rr) = (to_u32(n)?, to_u32(r)?);
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let mut stream = rng.child("bad-trial", t);
            let f = make_r_to_one(nn, rr, nn, &mut stream)?;
            let pair = complementary_reduce(&f, &mut stream)?;
            let images = &pair.source.as_ref().expect("reduction records its source").images;
            let profile = inv_profile(&pair.a, images, r)?;
            Ok(criterion.is_bad(&profile)? as u64)
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))?;
    Ok(McEstimate {
        hits,
        trials,
        rate: hits as f64 / trials as f64,
        wilson: wilson_interval(hits, trials, MC_CONFIDENCE),
    })
}

fn to_u32(v: u64) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::invalid(format!("{v} exceeds the supported domain size")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_examples() {
        assert_eq!(hypergeom_pmf(4, 2, 2, 1).unwrap(), rational(2, 3));
        assert_eq!(hypergeom_pmf(8, 4, 4, 4).unwrap(), rational(1, 70));
        assert_eq!(hypergeom_pmf(9, 3, 9, 3).unwrap(), integer(1));
        assert_eq!(hypergeom_pmf(8, 4, 4, 5).unwrap_err(), Error::InvalidSupportPoint(5));
        // In range but impossible: drawing 7 of 8 leaves at most 1 unmarked out.
        assert_eq!(hypergeom_pmf(8, 4, 7, 2).unwrap(), BigRational::zero());
    }

    #[test]
    fn recurrence_matches_direct_binomials() {
        for (n, r, draw) in [(20, 7, 10), (16, 16, 8), (30, 3, 29), (12, 0, 6)] {
            let (lo, nums) = hypergeom_numerators(n, r, draw);
            for (off, num) in nums.iter().enumerate() {
                let k = lo + off as u64;
                assert_eq!(*num, binomial(r, k) * binomial(n - r, draw - k));
            }
        }
    }

    #[test]
    fn two_sided_examples() {
        let q = TailQuery::half_split(8, 4, rational(3, 2));
        assert_eq!(two_sided_tail_exact(&q, Law::Binomial).unwrap(), rational(1, 8));
        assert_eq!(two_sided_tail_exact(&q, Law::Hypergeometric).unwrap(), rational(1, 35));
        let wide = TailQuery::half_split(8, 4, integer(2));
        assert!(two_sided_tail_exact(&wide, Law::Binomial).unwrap().is_zero());
        assert!(two_sided_tail_exact(&wide, Law::Hypergeometric).unwrap().is_zero());
        let neg = TailQuery::half_split(8, 4, rational(-1, 2));
        assert_eq!(two_sided_tail_exact(&neg, Law::Binomial).unwrap_err(), Error::NegativeThreshold);
    }

    #[test]
    fn chernoff_examples() {
        let v = chernoff_bound(100, 0.5).unwrap();
        assert!((v - (-25.0f64 / 6.0).exp()).abs() < 1e-15);
        assert!(v >= (-25.0f64 / 6.0).exp());
        assert!((v - 0.015504).abs() < 1e-6);
        assert_eq!(chernoff_bound(17, 0.0).unwrap(), 1.0);
        let eps = 30.0 * ((4096.0f64 / 1024.0).ln() / 1024.0).sqrt();
        assert!((eps - 1.103).abs() < 1e-3);
        assert_eq!(chernoff_bound(1024, eps).unwrap_err(), Error::EpsilonOutOfWindow);
    }

    #[test]
    fn exact_chernoff_check() {
        // Bin(4): P[X > 3] = 1/16; bound at eps = 1/2 is e^{-1/6} ≈ 0.846.
        assert!(below_chernoff(&rational(1, 16), 4, &rational(1, 2)).unwrap());
        assert!(!below_chernoff(&rational(9, 10), 4, &rational(1, 2)).unwrap());
        assert!(below_chernoff(&integer(0), 4, &integer(1)).unwrap());
        assert!(below_chernoff(&integer(1), 4, &integer(0)).unwrap());
    }

    #[test]
    fn bad_probability_small_cases_vanish() {
        let c = BadCriterion::default();
        let p = bad_prob_exact(8, 4, &c).unwrap();
        assert!(p.per_image.is_zero() && p.union_bound.is_zero());
        assert!(bad_prob_exact(64, 8, &c).unwrap().union_bound.is_zero());
        assert_eq!(bad_prob_exact(8, 8, &c).unwrap_err(), Error::ThresholdUndefined);
        assert_eq!(bad_prob_exact(8, 3, &c).unwrap_err(), Error::RDoesNotDivideN);
    }

    #[test]
    fn bad_probability_with_small_constant() {
        // c = 1/2, n = 16, r = 4: bad iff k ∈ {0, 4}; P = 2·C(12,8)/C(16,8).
        let c = BadCriterion::new(rational(1, 2)).unwrap();
        let p = bad_prob_exact(16, 4, &c).unwrap();
        assert_eq!(p.per_image, ratio(BigUint::from(990u32), BigUint::from(12870u32)));
        assert_eq!(p.union_bound, &p.per_image * integer(4));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let c = BadCriterion::default();
        let e = monte_carlo_bad_rate(8, 4, 1000, &SeededRng::new(3), &c).unwrap();
        assert_eq!(e.rate, 0.0);
        assert_eq!(e.hits, 0);
        let small = BadCriterion::new(rational(1, 2)).unwrap();
        let x = monte_carlo_bad_rate(16, 4, 500, &SeededRng::new(9), &small).unwrap();
        let y = monte_carlo_bad_rate(16, 4, 500, &SeededRng::new(9), &small).unwrap();
        assert_eq!(x, y);
        assert!(x.hits > 0);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 10_000, 0.99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 1e-3);
        let (lo, hi) = wilson_interval(50, 100, 0.99);
        assert!(lo < 0.5 && hi > 0.5);
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
    }
}
