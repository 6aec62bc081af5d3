//! Image-multiplicity profiles of reduced functions and the BAD predicate.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{cmp_ln, integer, rational, ExactRational};

/// `(a_0, ..., a_r)`: `a_i` counts the images of the source with exactly `i`
/// preimages under a half-domain function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct InvProfile {
    n: u64,
    r: u64,
    counts: Vec<u64>,
}

impl InvProfile {
    /// Checks `Σ a_i = n/r` and `Σ i·a_i = n/2`.
    pub fn new(n: u64, r: u64, counts: Vec<u64>) -> Result<Self> {
        if r == 0 || n % r != 0 || n % 2 != 0 {
            return Err(Error::invalid("profile requires r | n and 2 | n"));
        }
        if counts.len() as u64 != r + 1 {
            return Err(Error::DimensionMismatch(format!(
                "profile has {} entries, expected r + 1 = {}",
                counts.len(),
                r + 1
            )));
        }
        let total: u64 = counts.iter().sum();
        let weight: u64 = counts.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
        if total != n / r || weight != n / 2 {
            return Err(Error::invalid(format!(
                "inconsistent profile: Σa_i = {total} (want {}), Σi·a_i = {weight} (want {})",
                n / r,
                n / 2
            )));
        }
        Ok(InvProfile { n, r, counts })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// Builds the profile of `a` relative to the `n/r` images of the relabeled
/// source. `n = 2|a|`.
pub fn inv_profile(a: &[u32], images: &[u32], r: u64) -> Result<InvProfile> {
    let n = 2 * a.len() as u64;
    if r == 0 || images.len() as u64 * r != n {
        return Err(Error::invalid(format!(
            "{} images with r = {r} cannot cover a domain of size {n}",
            images.len()
        )));
    }
    let mut sorted = images.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("image set has repeated entries"));
    }
    let mut per_image = vec![0u64; sorted.len()];
    for &v in a {
        per_image[sorted.binary_search(&v).map_err(|_| Error::ForeignValue(v))?] += 1;
    }
    let mut counts = vec![0u64; r as usize + 1];
    for &c in &per_image {
        if c > r {
            return Err(Error::invalid(format!("an image has {c} > r preimages")));
        }
        if c > 0 {
            counts[c as usize] += 1;
        }
    }
    counts[0] = images.len() as u64 - counts[1..].iter().sum::<u64>();
    InvProfile::new(n, r, counts)
}

pub fn reverse_profile(p: &InvProfile) -> InvProfile {
    let mut counts = p.counts.clone();
    counts.reverse();
    InvProfile {
        n: p.n,
        r: p.r,
        counts,
    }
}

/// `max |i - r/2|` over occupied multiplicities `i`.
pub fn disp(p: &InvProfile) -> Result<ExactRational> {
    let half = rational(p.r as i64, 2);
    p.counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, _)| (integer(i as u64) - &half).abs())
        .max()
        .ok_or(Error::EmptyProfile)
}

/// BAD threshold `c·√(r·ln(n/r))`. The constant defaults to 15.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadCriterion {
    pub constant: ExactRational,
}

impl Default for BadCriterion {
    fn default() -> Self {
        BadCriterion {
            constant: integer(15),
        }
    }
}

impl BadCriterion {
    pub fn new(constant: ExactRational) -> Result<Self> {
        if !constant.is_positive() {
            return Err(Error::invalid("threshold constant must be positive"));
        }
        Ok(BadCriterion { constant })
    }

    /// Whether a deviation strictly exceeds the threshold, decided as
    /// `dev² / (c²·r) > ln(n/r)` without rounding.
    pub fn exceeds(&self, deviation: &ExactRational, n: u64, r: u64) -> Result<bool> {
        if n <= r || r == 0 {
            return Err(Error::ThresholdUndefined);
        }
        if deviation.is_negative() {
            return Err(Error::NegativeThreshold);
        }
        if deviation.is_zero() {
            return Ok(false);
        }
        let t = deviation * deviation / (&self.constant * &self.constant * integer(r));
        let x = BigRational::new(n.into(), r.into());
        Ok(cmp_ln(&t, &x)? == Ordering::Greater)
    }

    pub fn is_bad(&self, p: &InvProfile) -> Result<bool> {
        if p.n <= p.r {
            return Err(Error::ThresholdUndefined);
        }
        self.exceeds(&disp(p)?, p.n, p.r)
    }

    /// Floating-point value of the threshold, for reports only.
    pub fn threshold_f64(&self, n: u64, r: u64) -> f64 {
        crate::exact::to_f64(&self.constant) * (r as f64 * (n as f64 / r as f64).ln()).sqrt()
    }
}

/// BAD with the default constant 15.
pub fn is_bad(p: &InvProfile) -> Result<bool> {
    BadCriterion::default().is_bad(p)
}

pub const PROFILE_CSV_HEADER: &str = "n,r,seed,origin,disp,bad,counts";

/// One line of a profile sweep.
#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub n: u64,
    pub r: u64,
    pub seed: u64,
    pub origin: String,
    pub disp: ExactRational,
    pub bad: bool,
    pub counts: Vec<u64>,
}

impl ProfileRow {
    /// CSV line matching [`PROFILE_CSV_HEADER`]; the counts cell is a quoted
    /// JSON array.
    pub fn to_csv(&self) -> String {
        let counts = serde_json::to_string(&self.counts).expect("integer array");
        format!(
            "{},{},{},{},{},{},\"{}\"",
            self.n, self.r, self.seed, self.origin, self.disp, self.bad, counts.replace('"', "\"\"")
        )
    }
}
