//! The two randomized reductions from a collision input `f` to a set
//! equality pair `(a, b)`, and the symmetrization wrapper that relabels a
//! pair by fresh domain and range permutations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gamma_table, OracleFunction, Permutation, Promise};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Complementary,
    Equivalent,
    External,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::Complementary => "complementary",
            Origin::Equivalent => "equivalent",
            Origin::External => "external",
        }
    }
}

/// Where a reduced pair came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMeta {
    pub seed: Option<u64>,
    pub promise: Promise,
    /// Image set of the relabeled source `Γ(f)`, ascending. Needed to count
    /// images that receive no preimage under `a`.
    pub images: Vec<u32>,
}

/// A set equality input: two value tables over `[1..=N]` on the same domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionPair {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub range_size: u32,
    pub origin: Origin,
    pub source: Option<SourceMeta>,
}

impl FunctionPair {
    /// A pair supplied from outside any reduction.
    pub fn external(a: Vec<u32>, b: Vec<u32>, range_size: u32) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "|a| = {} but |b| = {}",
                a.len(),
                b.len()
            )));
        }
        if let Some(&v) = a.iter().chain(&b).find(|&&v| v == 0 || v > range_size) {
            return Err(Error::ForeignValue(v));
        }
        Ok(FunctionPair {
            a,
            b,
            range_size,
            origin: Origin::External,
            source: None,
        })
    }

    /// Common domain size of `a` and `b`.
    pub fn half(&self) -> usize {
        self.a.len()
    }

    pub fn range_a(&self) -> BTreeSet<u32> {
        self.a.iter().copied().collect()
    }

    pub fn range_b(&self) -> BTreeSet<u32> {
        self.b.iter().copied().collect()
    }
}

#[derive(Serialize)]
struct PairRecord<'a> {
    origin: &'a str,
    a: &'a [u32],
    b: &'a [u32],
}

#[derive(Deserialize)]
struct PairRecordOwned {
    origin: Origin,
    a: Vec<u32>,
    b: Vec<u32>,
}

impl Serialize for FunctionPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairRecord {
            origin: self.origin.as_str(),
            a: &self.a,
            b: &self.b,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FunctionPair {
    /// The wire record carries no range size; the largest value is used.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = PairRecordOwned::deserialize(d)?;
        let range_size = rec.a.iter().chain(&rec.b).copied().max().unwrap_or(1);
        let mut pair = FunctionPair::external(rec.a, rec.b, range_size).map_err(serde::de::Error::custom)?;
        pair.origin = rec.origin;
        Ok(pair)
    }
}

/// Explicit permutations for a reduction, replacing the random draws.
#[derive(Debug, Clone)]
pub struct ReductionDraws {
    /// Domain relabeling on `[n]`.
    pub sigma: Permutation,
    /// Range relabeling on `[N]`.
    pub tau: Permutation,
    /// Reindexing of `a` on `[n/2]`; equivalent reduction only.
    pub sigma1: Option<Permutation>,
    /// Reindexing of `b` on `[n/2]`; equivalent reduction only.
    pub sigma2: Option<Permutation>,
}

impl ReductionDraws {
    pub fn identity(n: u32, range_size: u32) -> Self {
        ReductionDraws {
            sigma: Permutation::identity(n),
            tau: Permutation::identity(range_size),
            sigma1: Some(Permutation::identity(n / 2)),
            sigma2: Some(Permutation::identity(n / 2)),
        }
    }
}

fn check_even(f: &OracleFunction) -> Result<u32> {
    if f.n() % 2 != 0 {
        return Err(Error::OddDomain);
    }
    Ok(f.n() / 2)
}

fn relabeled_images(f: &OracleFunction, tau: &Permutation) -> Vec<u32> {
    let mut images: Vec<u32> = f.images().into_iter().map(|v| tau.apply(v)).collect();
    images.sort_unstable();
    images
}

/// `a(i) = Γ(f)(i)`, `b(i) = Γ(f)(n/2 + i)` for uniform `σ ∈ SG[n]`,
/// `τ ∈ SG[N]`.
pub fn complementary_reduce(f: &OracleFunction, rng: &mut SeededRng) -> Result<FunctionPair> {
    check_even(f)?;
    let draws = ReductionDraws {
        sigma: Permutation::random(f.n(), rng),
        tau: Permutation::random(f.range_size(), rng),
        sigma1: None,
        sigma2: None,
    };
    let mut pair = complementary_reduce_with(f, &draws)?;
    if let Some(meta) = pair.source.as_mut() {
        meta.seed = Some(rng.seed());
    }
    Ok(pair)
}

pub fn complementary_reduce_with(f: &OracleFunction, draws: &ReductionDraws) -> Result<FunctionPair> {
    let half = check_even(f)? as usize;
    let g = gamma_table(&draws.sigma, &draws.tau, f.values())?;
    let (a, b) = g.split_at(half);
    Ok(FunctionPair {
        a: a.to_vec(),
        b: b.to_vec(),
        range_size: f.range_size(),
        origin: Origin::Complementary,
        source: Some(SourceMeta {
            seed: None,
            promise: f.promise(),
            images: relabeled_images(f, &draws.tau),
        }),
    })
}

/// `a(σ1(i)) = Γ(f)(i)` and `b(σ2(i)) = Γ(f)(i)` for `i ≤ n/2`, with
/// independent uniform `σ, σ1, σ2, τ`.
pub fn equivalent_reduce(f: &OracleFunction, rng: &mut SeededRng) -> Result<FunctionPair> {
    let half = check_even(f)?;
    let draws = ReductionDraws {
        sigma: Permutation::random(f.n(), rng),
        tau: Permutation::random(f.range_size(), rng),
        sigma1: Some(Permutation::random(half, rng)),
        sigma2: Some(Permutation::random(half, rng)),
    };
    let mut pair = equivalent_reduce_with(f, &draws)?;
    if let Some(meta) = pair.source.as_mut() {
        meta.seed = Some(rng.seed());
    }
    Ok(pair)
}

pub fn equivalent_reduce_with(f: &OracleFunction, draws: &ReductionDraws) -> Result<FunctionPair> {
    let half = check_even(f)?;
    let (Some(sigma1), Some(sigma2)) = (&draws.sigma1, &draws.sigma2) else {
        return Err(Error::invalid("equivalent reduction needs sigma1 and sigma2"));
    };
    if sigma1.k() != half || sigma2.k() != half {
        return Err(Error::DimensionMismatch("sigma1 and sigma2 must act on [n/2]".into()));
    }
    let g = gamma_table(&draws.sigma, &draws.tau, f.values())?;
    let first = &g[..half as usize];
    Ok(FunctionPair {
        a: reindex(sigma1, first),
        b: reindex(sigma2, first),
        range_size: f.range_size(),
        origin: Origin::Equivalent,
        source: Some(SourceMeta {
            seed: None,
            promise: f.promise(),
            images: relabeled_images(f, &draws.tau),
        }),
    })
}

/// `out(p(i)) = values(i)`.
fn reindex(p: &Permutation, values: &[u32]) -> Vec<u32> {
    let mut out = vec![0; values.len()];
    for (i, &v) in values.iter().enumerate() {
        out[p.apply(i as u32 + 1) as usize - 1] = v;
    }
    out
}

/// Relabels `(a, b)` as `(Γ^{σ1}_τ(a), Γ^{σ2}_τ(b))` with fresh uniform
/// permutations. The origin tag is kept.
pub fn symmetrize_pair(p: &FunctionPair, rng: &mut SeededRng) -> Result<FunctionPair> {
    let half = p.half() as u32;
    let sigma1 = Permutation::random(half, rng);
    let sigma2 = Permutation::random(half, rng);
    let tau = Permutation::random(p.range_size, rng);
    symmetrize_pair_with(p, &sigma1, &sigma2, &tau)
}

pub fn symmetrize_pair_with(
    p: &FunctionPair,
    sigma1: &Permutation,
    sigma2: &Permutation,
    tau: &Permutation,
) -> Result<FunctionPair> {
    let source = p.source.as_ref().map(|meta| {
        let mut images: Vec<u32> = meta.images.iter().map(|&v| tau.apply(v)).collect();
        images.sort_unstable();
        SourceMeta {
            images,
            ..meta.clone()
        }
    });
    Ok(FunctionPair {
        a: gamma_table(sigma1, tau, &p.a)?,
        b: gamma_table(sigma2, tau, &p.b)?,
        range_size: p.range_size,
        origin: p.origin,
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetRelation {
    EqualSets,
    DisjointSets,
    Overlapping,
}

pub fn pair_relationship(p: &FunctionPair) -> SetRelation {
    let (ra, rb) = (p.range_a(), p.range_b());
    if ra == rb {
        SetRelation::EqualSets
    } else if ra.is_disjoint(&rb) {
        SetRelation::DisjointSets
    } else {
        SetRelation::Overlapping
    }
}
