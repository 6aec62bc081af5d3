//! Instance representations: oracle functions, partial functions,
//! permutations and the relabeling action on partial functions.
//!
//! Everything here is 1-based to match `[n] = {1, ..., n}`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// The promise attached to a collision-problem input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Promise {
    OneToOne,
    RToOne { r: u32 },
}

impl Promise {
    /// Preimage count of every occurring value.
    pub fn multiplicity(&self) -> u32 {
        match *self {
            Promise::OneToOne => 1,
            Promise::RToOne { r } => r,
        }
    }
}

/// A total function `[n] -> [N]` stored as its value table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawOracle")]
pub struct OracleFunction {
    n: u32,
    #[serde(rename = "N")]
    range_size: u32,
    promise: Promise,
    values: Vec<u32>,
}

#[derive(Deserialize)]
struct RawOracle {
    n: u32,
    #[serde(rename = "N")]
    range_size: u32,
    promise: Promise,
    values: Vec<u32>,
}

impl TryFrom<RawOracle> for OracleFunction {
    type Error = Error;

    fn try_from(raw: RawOracle) -> Result<Self> {
        if raw.values.len() != raw.n as usize {
            return Err(Error::DimensionMismatch(format!(
                "n = {} but {} values",
                raw.n,
                raw.values.len()
            )));
        }
        let f = OracleFunction {
            n: raw.n,
            range_size: raw.range_size,
            promise: raw.promise,
            values: raw.values,
        };
        if !f.is_promise_valid() {
            return Err(Error::invalid("value table violates its promise"));
        }
        Ok(f)
    }
}

impl OracleFunction {
    /// Builds a function from an explicit value table. Entries must lie in
    /// `[1..=range_size]`, but the promise is not checked; use
    /// [`OracleFunction::is_promise_valid`] for that.
    pub fn from_values(range_size: u32, promise: Promise, values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empty value table"));
        }
        if let Some(&v) = values.iter().find(|&&v| v == 0 || v > range_size) {
            return Err(Error::ForeignValue(v));
        }
        Ok(OracleFunction {
            n: values.len() as u32,
            range_size,
            promise,
            values,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn range_size(&self) -> u32 {
        self.range_size
    }

    pub fn promise(&self) -> Promise {
        self.promise
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// `f(i)` for `i` in `[1..=n]`.
    pub fn eval(&self, i: u32) -> u32 {
        self.values[i as usize - 1]
    }

    /// Distinct values taken by the function, ascending.
    pub fn images(&self) -> Vec<u32> {
        let mut set = self.values.clone();
        set.sort_unstable();
        set.dedup();
        set
    }

    pub fn is_promise_valid(&self) -> bool {
        if self.values.len() != self.n as usize
            || self.values.iter().any(|&v| v == 0 || v > self.range_size)
        {
            return false;
        }
        let want = self.promise.multiplicity() as usize;
        if want == 0 || self.values.len() % want != 0 {
            return false;
        }
        multiplicities(&self.values).values().all(|&c| c == want)
    }

    pub fn to_partial(&self) -> PartialFunction {
        PartialFunction {
            n: self.n,
            range_size: self.range_size,
            pairs: (1..=self.n).zip(self.values.iter().copied()).collect(),
        }
    }
}

pub(crate) fn multiplicities(values: &[u32]) -> BTreeMap<u32, usize> {
    let mut counts = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts
}

/// Uniformly random injective table `[n] -> [N]`.
pub fn make_one_to_one(n: u32, range_size: u32, rng: &mut SeededRng) -> Result<OracleFunction> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if range_size < n {
        return Err(Error::RangeTooSmall);
    }
    let values = sample_distinct(range_size, n as usize, rng);
    OracleFunction::from_values(range_size, Promise::OneToOne, values)
}

/// Uniformly random `r`-to-one table: `n/r` distinct images drawn from
/// `[N]`, each placed on `r` positions of a uniform shuffle.
pub fn make_r_to_one(n: u32, r: u32, range_size: u32, rng: &mut SeededRng) -> Result<OracleFunction> {
    if n == 0 || r < 2 {
        return Err(Error::invalid("need n > 0 and r >= 2"));
    }
    if n % r != 0 {
        return Err(Error::RDoesNotDivideN);
    }
    let images = n / r;
    if range_size < images {
        return Err(Error::RangeTooSmall);
    }
    let chosen = sample_distinct(range_size, images as usize, rng);
    let mut values: Vec<u32> = chosen
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, r as usize))
        .collect();
    values.shuffle(rng);
    OracleFunction::from_values(range_size, Promise::RToOne { r }, values)
}

/// `count` distinct values of `[1..=universe]` in uniformly random order.
fn sample_distinct(universe: u32, count: usize, rng: &mut SeededRng) -> Vec<u32> {
    let mut values: Vec<u32> = rand::seq::index::sample(rng, universe as usize, count)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    values.shuffle(rng);
    values
}

/// A bijection on `[1..=k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    // mapping[i - 1] = sigma(i)
    mapping: Vec<u32>,
}

impl Permutation {
    pub fn identity(k: u32) -> Self {
        Permutation {
            mapping: (1..=k).collect(),
        }
    }

    /// Transposition of `i` and `j` on `[1..=k]`.
    pub fn swap(k: u32, i: u32, j: u32) -> Result<Self> {
        if i == 0 || j == 0 || i > k || j > k {
            return Err(Error::invalid("transposition outside [1..k]"));
        }
        let mut p = Permutation::identity(k);
        p.mapping.swap(i as usize - 1, j as usize - 1);
        Ok(p)
    }

    pub fn from_mapping(mapping: Vec<u32>) -> Result<Self> {
        let k = mapping.len();
        let mut seen = vec![false; k];
        for &m in &mapping {
            if m == 0 || m as usize > k || std::mem::replace(&mut seen[m as usize - 1], true) {
                return Err(Error::invalid("mapping is not a bijection"));
            }
        }
        Ok(Permutation { mapping })
    }

    pub fn random(k: u32, rng: &mut SeededRng) -> Self {
        let mut mapping: Vec<u32> = (1..=k).collect();
        mapping.shuffle(rng);
        Permutation { mapping }
    }

    pub fn k(&self) -> u32 {
        self.mapping.len() as u32
    }

    pub fn mapping(&self) -> &[u32] {
        &self.mapping
    }

    #[inline]
    pub fn apply(&self, i: u32) -> u32 {
        self.mapping[i as usize - 1]
    }

    /// `self ∘ inner`, i.e. `i -> self(inner(i))`.
    pub fn compose(&self, inner: &Permutation) -> Result<Permutation> {
        if self.k() != inner.k() {
            return Err(Error::DimensionMismatch("composing permutations of different sizes".into()));
        }
        Ok(Permutation {
            mapping: inner.mapping.iter().map(|&i| self.apply(i)).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut mapping = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            mapping[m as usize - 1] = i as u32 + 1;
        }
        Permutation { mapping }
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| m as usize == i + 1)
    }
}

/// A partial function from `[n]` to `[N]`, viewed as a set of pairs with
/// distinct first coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFunction {
    n: u32,
    range_size: u32,
    pairs: BTreeMap<u32, u32>,
}

impl PartialFunction {
    pub fn new(n: u32, range_size: u32, pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, j) in pairs {
            if i == 0 || i > n || j == 0 || j > range_size {
                return Err(Error::DimensionMismatch(format!(
                    "pair ({i},{j}) outside [{n}] x [{range_size}]"
                )));
            }
            if map.insert(i, j).is_some() {
                return Err(Error::invalid(format!("two pairs share first coordinate {i}")));
            }
        }
        Ok(PartialFunction {
            n,
            range_size,
            pairs: map,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn range_size(&self) -> u32 {
        self.range_size
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, i: u32) -> Option<u32> {
        self.pairs.get(&i).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.pairs.iter().map(|(&i, &j)| (i, j))
    }
}

/// `{(sigma(i), tau(j)) : (i, j) in f}`.
pub fn gamma_action(sigma: &Permutation, tau: &Permutation, f: &PartialFunction) -> Result<PartialFunction> {
    if sigma.k() != f.n {
        return Err(Error::DimensionMismatch(format!(
            "sigma acts on [{}] but f has domain universe [{}]",
            sigma.k(),
            f.n
        )));
    }
    if tau.k() != f.range_size {
        return Err(Error::DimensionMismatch(format!(
            "tau acts on [{}] but f has range universe [{}]",
            tau.k(),
            f.range_size
        )));
    }
    Ok(PartialFunction {
        n: f.n,
        range_size: f.range_size,
        pairs: f.pairs().map(|(i, j)| (sigma.apply(i), tau.apply(j))).collect(),
    })
}

/// The action on a total value table: returns `g` with
/// `g(sigma(i)) = tau(values(i))`.
pub(crate) fn gamma_table(sigma: &Permutation, tau: &Permutation, values: &[u32]) -> Result<Vec<u32>> {
    if sigma.k() as usize != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "sigma acts on [{}] but the table has length {}",
            sigma.k(),
            values.len()
        )));
    }
    let mut out = vec![0; values.len()];
    for (i, &v) in values.iter().enumerate() {
        if v == 0 || v > tau.k() {
            return Err(Error::DimensionMismatch(format!("value {v} outside [{}]", tau.k())));
        }
        out[sigma.apply(i as u32 + 1) as usize - 1] = tau.apply(v);
    }
    Ok(out)
}
