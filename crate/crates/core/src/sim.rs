//! A small statevector simulator of the query model.
//!
//! States live on the basis `{|1⟩, ..., |n⟩}` of query indices; oracles are
//! phase oracles, so no flag register is needed. Every oracle application is
//! charged to a [`QueryTally`].

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{make_one_to_one, make_r_to_one};
use crate::reductions::{complementary_reduce, equivalent_reduce, pair_relationship, FunctionPair, SetRelation};
use crate::rng::SeededRng;

pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn uniform(dim: usize) -> Self {
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector { amps: vec![a; dim] }
    }

    /// `|i⟩`, 1-based.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[i - 1] = Complex64::new(1.0, 0.0);
        StateVector { amps }
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amps.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("state needs a nonzero finite amplitude"));
        }
        Ok(StateVector {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Probability of measuring `|i⟩`, 1-based.
    pub fn probability(&self, i: usize) -> f64 {
        self.amps[i - 1].norm_sqr()
    }

    /// Total probability of the indices selected by `marked`.
    pub fn mass(&self, marked: impl Fn(usize) -> bool) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| marked(i + 1))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn flip(&mut self, marked: impl Fn(usize) -> bool) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if marked(i + 1) {
                *a = -*a;
            }
        }
    }

    /// `2|ψ⟩⟨ψ| − I`.
    pub fn reflect_about(&mut self, psi: &StateVector) {
        assert_eq!(psi.dim(), self.dim(), "reflection axis has the wrong dimension");
        let overlap: Complex64 = psi.amps.iter().zip(&self.amps).map(|(p, v)| p.conj() * v).sum();
        for (v, p) in self.amps.iter_mut().zip(&psi.amps) {
            *v = 2.0 * overlap * p - *v;
        }
        debug_assert!(self.is_normalized());
    }

    /// Inversion about the mean, the reflection about the uniform state.
    pub fn diffuse(&mut self) {
        let mean: Complex64 = self.amps.iter().sum::<Complex64>() / self.dim() as f64;
        for v in &mut self.amps {
            *v = 2.0 * mean - *v;
        }
        debug_assert!(self.is_normalized());
    }

    /// Samples a basis index (1-based) with the Born probabilities.
    pub fn measure(&self, rng: &mut SeededRng) -> usize {
        let u = rng.unit() * self.norm_sqr();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                return i + 1;
            }
        }
        // Rounding left u at the very top.
        self.amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0) + 1
    }
}

/// Which input oracle a query is made to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleId {
    A,
    B,
}

/// Query counts. `oracle_calls_*` count every query to that oracle;
/// `classical_reads` counts the ones made on a basis state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryTally {
    pub oracle_calls_a: u64,
    pub oracle_calls_b: u64,
    pub classical_reads: u64,
}

impl QueryTally {
    pub fn total(&self) -> u64 {
        self.oracle_calls_a + self.oracle_calls_b
    }

    fn charge(&mut self, oracle: OracleId) {
        match oracle {
            OracleId::A => self.oracle_calls_a += 1,
            OracleId::B => self.oracle_calls_b += 1,
        }
    }

    /// One query on a basis state.
    pub fn classical_read(&mut self, oracle: OracleId) {
        self.charge(oracle);
        self.classical_reads += 1;
    }
}

/// Negates the amplitude of every marked `|i⟩`; one query.
pub fn phase_oracle(state: &mut StateVector, marked: impl Fn(usize) -> bool, tally: &mut QueryTally, oracle: OracleId) {
    state.flip(marked);
    tally.charge(oracle);
}

/// `⌊(π/4)·√(dim/marked)⌋`.
pub fn grover_iterations(dim: usize, marked: usize) -> u64 {
    if marked == 0 {
        return 0;
    }
    (FRAC_PI_4 * (dim as f64 / marked as f64).sqrt()).floor() as u64
}

/// `⌈(π/4)·√(dim/marked)⌉`, the per-search query allowance.
pub fn grover_budget(dim: usize, marked: usize) -> u64 {
    (FRAC_PI_4 * (dim as f64 / marked.max(1) as f64).sqrt()).ceil() as u64
}

/// `sin²((2k+1)·arcsin(√(m/n)))`.
pub fn grover_closed_form(n: usize, m: usize, k: u64) -> f64 {
    let theta = (m as f64 / n as f64).sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroverOutcome {
    /// Measured index that passed the verification read, 1-based.
    pub found: Option<usize>,
    /// Marked mass just before measurement.
    pub success_prob: f64,
    pub tally: QueryTally,
}

fn grover_on(
    dim: usize,
    marked: &dyn Fn(usize) -> bool,
    iterations: u64,
    oracle: OracleId,
    tally: &mut QueryTally,
    rng: &mut SeededRng,
) -> (Option<usize>, f64) {
    let mut state = StateVector::uniform(dim);
    for _ in 0..iterations {
        phase_oracle(&mut state, marked, tally, oracle);
        state.diffuse();
    }
    let success_prob = state.mass(marked);
    let i = state.measure(rng);
    tally.classical_read(oracle);
    (marked(i).then_some(i), success_prob)
}

/// `iterations` Grover rounds over `[n]` from the uniform state, then a
/// measurement and one verification read. Queries go to oracle A.
pub fn grover_search(n: usize, marked: impl Fn(usize) -> bool, iterations: u64, rng: &mut SeededRng) -> Result<GroverOutcome> {
    if n == 0 {
        return Err(Error::invalid("search space is empty"));
    }
    let mut tally = QueryTally::default();
    let (found, success_prob) = grover_on(n, &marked, iterations, OracleId::A, &mut tally, rng);
    Ok(GroverOutcome {
        found,
        success_prob,
        tally,
    })
}

/// Success probability after `rounds` of amplification starting from
/// success probability `p`, simulated on the two-dimensional good/bad plane.
pub fn amplitude_amplify(p: f64, rounds: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("initial success probability outside [0, 1]"));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let initial = StateVector {
        amps: vec![c(p.sqrt()), c((1.0 - p).sqrt())],
    };
    Ok(amplify_state(&initial, |i| i == 1, rounds))
}

/// Amplitude amplification on a full state: each round flips the marked
/// indices and reflects about `initial`. Returns the final marked mass.
pub fn amplify_state(initial: &StateVector, marked: impl Fn(usize) -> bool, rounds: u64) -> f64 {
    let mut state = initial.clone();
    let mut tally = QueryTally::default();
    for _ in 0..rounds {
        phase_oracle(&mut state, &marked, &mut tally, OracleId::A);
        state.reflect_about(initial);
    }
    state.mass(marked)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Equal,
    Disjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetEqualityRun {
    pub decision: Decision,
    pub tally: QueryTally,
    /// Query allowance the algorithm promises for this input size.
    pub budget: u64,
    /// Set when the pair broke the equal-or-disjoint promise.
    pub promise_violated: bool,
}

/// `2 + ⌈(π/4)√d⌉` for a half-domain of size `d`.
pub fn sqrt_n_budget(d: usize) -> u64 {
    2 + grover_budget(d, 1)
}

/// `k + ⌈(π/4)√(d/k)⌉ + 2`.
pub fn cuberoot_budget(d: usize, k: usize) -> u64 {
    k as u64 + grover_budget(d, k) + 2
}

/// Smallest `k` with `k³ ≥ d`.
pub fn default_sample_size(d: usize) -> usize {
    (1..).find(|&k: &usize| k.pow(3) >= d).unwrap_or(1)
}

/// Reads `a(1)`, then Grover-searches `b` for a preimage of it and verifies
/// the measured index.
pub fn set_equality_sqrt_n(pair: &FunctionPair, rng: &mut SeededRng) -> Result<SetEqualityRun> {
    let d = pair.half();
    if d == 0 {
        return Err(Error::invalid("empty pair"));
    }
    let mut tally = QueryTally::default();
    tally.classical_read(OracleId::A);
    let target = pair.a[0];
    let marked = |j: usize| pair.b[j - 1] == target;
    let (found, _) = grover_on(d, &marked, grover_iterations(d, 1), OracleId::B, &mut tally, rng);
    Ok(SetEqualityRun {
        decision: if found.is_some() { Decision::Equal } else { Decision::Disjoint },
        tally,
        budget: sqrt_n_budget(d),
        promise_violated: pair_relationship(pair) == SetRelation::Overlapping,
    })
}

fn is_injective(values: &[u32]) -> bool {
    let set: std::collections::HashSet<u32> = values.iter().copied().collect();
    set.len() == values.len()
}

/// Reads `a` at `k` random positions, then Grover-searches `b` for any of
/// the sampled values assuming `k` marked positions, and verifies.
pub fn set_equality_cuberoot(pair: &FunctionPair, k: Option<usize>, rng: &mut SeededRng) -> Result<SetEqualityRun> {
    let d = pair.half();
    if d == 0 {
        return Err(Error::invalid("empty pair"));
    }
    let k = k.unwrap_or_else(|| default_sample_size(d));
    if k > d {
        return Err(Error::SampleExceedsDomain);
    }
    if k == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    if !is_injective(&pair.a) || !is_injective(&pair.b) {
        return Err(Error::invalid("sampling algorithm needs one-to-one a and b"));
    }
    let mut tally = QueryTally::default();
    let positions = rand::seq::index::sample(rng, d, k);
    let mut sampled = std::collections::HashSet::with_capacity(k);
    for i in positions.iter() {
        tally.classical_read(OracleId::A);
        sampled.insert(pair.a[i]);
    }
    let marked = |j: usize| sampled.contains(&pair.b[j - 1]);
    let (found, _) = grover_on(d, &marked, grover_iterations(d, k), OracleId::B, &mut tally, rng);
    Ok(SetEqualityRun {
        decision: if found.is_some() { Decision::Equal } else { Decision::Disjoint },
        tally,
        budget: cuberoot_budget(d, k),
        promise_violated: pair_relationship(pair) == SetRelation::Overlapping,
    })
}

/// A procedure that labels pairs as coming from equal or disjoint sets.
pub trait Distinguisher: Sync {
    fn decide(&self, pair: &FunctionPair, rng: &mut SeededRng) -> Result<Decision>;
}

/// Reads both tables in full; `Disjoint` iff the value sets do not meet.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSetComparison;

impl Distinguisher for ExactSetComparison {
    fn decide(&self, pair: &FunctionPair, _rng: &mut SeededRng) -> Result<Decision> {
        Ok(if pair.range_a().is_disjoint(&pair.range_b()) {
            Decision::Disjoint
        } else {
            Decision::Equal
        })
    }
}

/// Fixed answer regardless of input.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub Decision);

impl Distinguisher for Constant {
    fn decide(&self, _pair: &FunctionPair, _rng: &mut SeededRng) -> Result<Decision> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SqrtNAlgorithm;

impl Distinguisher for SqrtNAlgorithm {
    fn decide(&self, pair: &FunctionPair, rng: &mut SeededRng) -> Result<Decision> {
        Ok(set_equality_sqrt_n(pair, rng)?.decision)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CubeRootAlgorithm {
    pub sample: Option<usize>,
}

impl Distinguisher for CubeRootAlgorithm {
    fn decide(&self, pair: &FunctionPair, rng: &mut SeededRng) -> Result<Decision> {
        Ok(set_equality_cuberoot(pair, self.sample, rng)?.decision)
    }
}

/// Majority vote over independent repetitions.
#[derive(Debug, Clone, Copy)]
pub struct Majority<D> {
    pub inner: D,
    pub repetitions: usize,
}

impl<D: Distinguisher> Majority<D> {
    pub fn of_five(inner: D) -> Self {
        Majority { inner, repetitions: 5 }
    }
}

impl<D: Distinguisher> Distinguisher for Majority<D> {
    fn decide(&self, pair: &FunctionPair, rng: &mut SeededRng) -> Result<Decision> {
        let mut disjoint = 0;
        for rep in 0..self.repetitions {
            let mut stream = rng.child("majority", rep as u64);
            if self.inner.decide(pair, &mut stream)? == Decision::Disjoint {
                disjoint += 1;
            }
        }
        Ok(if 2 * disjoint > self.repetitions {
            Decision::Disjoint
        } else {
            Decision::Equal
        })
    }
}

/// Acceptance probabilities ("answers Disjoint") by reduction type and
/// source type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceTable {
    /// Complementary reduction of a one-to-one source.
    pub pc1: f64,
    /// Complementary reduction of an r-to-one source.
    pub pc2: f64,
    /// Equivalent reduction of a one-to-one source.
    pub pe1: f64,
    /// Equivalent reduction of an r-to-one source.
    pub pe2: f64,
    pub trials: u64,
}

/// Monte Carlo estimate of all four cells with `trials` samples each.
pub fn acceptance_table(
    distinguisher: &dyn Distinguisher,
    n: u32,
    r: u32,
    trials: u64,
    rng: &SeededRng,
) -> Result<AcceptanceTable> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let cell = |label: &str, complementary: bool, one_to_one: bool| -> Result<f64> {
        let accepted = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<u64> {
                let mut stream = rng.child(label, t);
                let f = if one_to_one {
                    make_one_to_one(n, n, &mut stream)?
                } else {
                    make_r_to_one(n, r, n, &mut stream)?
                };
                let pair = if complementary {
                    complementary_reduce(&f, &mut stream)?
                } else {
                    equivalent_reduce(&f, &mut stream)?
                };
                Ok((distinguisher.decide(&pair, &mut stream)? == Decision::Disjoint) as u64)
            })
            .try_reduce(|| 0, |x, y| Ok(x + y))?;
        Ok(accepted as f64 / trials as f64)
    };
    Ok(AcceptanceTable {
        pc1: cell("table-c1", true, true)?,
        pc2: cell("table-c2", true, false)?,
        pe1: cell("table-e1", false, true)?,
        pe2: cell("table-e2", false, false)?,
        trials,
    })
}
