//! The relation-counting adversary bound and the set-comparison relation
//! between half-domain functions with complementary multiplicity profiles.
//!
//! [`evaluate_relation_bound`] counts neighbourhoods and per-position flip
//! neighbourhoods of an explicit finite relation. [`brute_force_counts`]
//! builds the comparison relation by enumeration so that the binomial closed
//! forms in [`closed_form_counts`] can be checked against it.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, ratio, to_f64, ExactRational};

type Predicate<'a, T> = Box<dyn Fn(&[T], &[T]) -> bool + 'a>;

/// Inputs on the two sides of a relation, all of one length, and the
/// relation as a predicate. Inputs from `x` are compared only against inputs
/// from `y`.
pub struct RelationSpec<'a, T> {
    pub x: Vec<Vec<T>>,
    pub y: Vec<Vec<T>>,
    related: Predicate<'a, T>,
}

impl<'a, T: PartialEq> RelationSpec<'a, T> {
    pub fn new(x: Vec<Vec<T>>, y: Vec<Vec<T>>, related: impl Fn(&[T], &[T]) -> bool + 'a) -> Result<Self> {
        let Some(len) = x.first().or(y.first()).map(Vec::len) else {
            return Err(Error::VacuousRelation);
        };
        if x.iter().chain(&y).any(|v| v.len() != len) {
            return Err(Error::DimensionMismatch("inputs of different lengths".into()));
        }
        Ok(RelationSpec {
            x,
            y,
            related: Box::new(related),
        })
    }

    /// Relation given by explicit `(x index, y index)` pairs.
    pub fn from_pairs(x: Vec<Vec<T>>, y: Vec<Vec<T>>, pairs: Vec<(usize, usize)>) -> Result<Self>
    where
        T: Clone + 'a,
    {
        if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= x.len() || j >= y.len()) {
            return Err(Error::invalid(format!("pair ({i},{j}) out of range")));
        }
        let xs = x.clone();
        let ys = y.clone();
        let set: std::collections::HashSet<(usize, usize)> = pairs.into_iter().collect();
        // Predicate by identity of the listed inputs.
        let lookup = move |a: &[T], b: &[T]| {
            set.iter().any(|&(i, j)| xs[i].as_slice() == a && ys[j].as_slice() == b)
        };
        RelationSpec::new(x, y, lookup)
    }

    pub fn related(&self, x: &[T], y: &[T]) -> bool {
        (self.related)(x, y)
    }
}

/// `m, m′, l, l′` of a relation and the bound `√(m·m′/(l·l′))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryCounts {
    pub m: BigUint,
    pub m_prime: BigUint,
    pub l: BigUint,
    pub l_prime: BigUint,
    pub bound: f64,
}

impl AdversaryCounts {
    fn new(m: BigUint, m_prime: BigUint, l: BigUint, l_prime: BigUint) -> Self {
        let sq = ratio(&m * &m_prime, &l * &l_prime);
        AdversaryCounts {
            bound: to_f64(&sq).sqrt(),
            m,
            m_prime,
            l,
            l_prime,
        }
    }

    /// `m·m′/(l·l′)` exactly.
    pub fn squared_bound(&self) -> ExactRational {
        ratio(&self.m * &self.m_prime, &self.l * &self.l_prime)
    }
}

/// Exact neighbourhood counts by full enumeration of `X × Y`.
pub fn evaluate_relation_bound<T: PartialEq>(spec: &RelationSpec<'_, T>) -> Result<AdversaryCounts> {
    let width = spec.x.first().or(spec.y.first()).map_or(0, Vec::len);
    let mut deg_x = vec![0u64; spec.x.len()];
    let mut deg_y = vec![0u64; spec.y.len()];
    // flips_x[a][i]: related y with x_i != y_i.
    let mut flips_x = vec![vec![0u64; width]; spec.x.len()];
    let mut flips_y = vec![vec![0u64; width]; spec.y.len()];
    let mut edges = 0u64;
    for (a, x) in spec.x.iter().enumerate() {
        for (b, y) in spec.y.iter().enumerate() {
            if !spec.related(x, y) {
                continue;
            }
            edges += 1;
            deg_x[a] += 1;
            deg_y[b] += 1;
            for i in 0..width {
                if x[i] != y[i] {
                    flips_x[a][i] += 1;
                    flips_y[b][i] += 1;
                }
            }
        }
    }
    if edges == 0 {
        return Err(Error::VacuousRelation);
    }
    let m = *deg_x.iter().min().expect("nonempty");
    let m_prime = *deg_y.iter().min().expect("nonempty");
    if m == 0 || m_prime == 0 {
        return Err(Error::DisconnectedInput);
    }
    let max_of = |rows: &[Vec<u64>]| rows.iter().flatten().copied().max().unwrap_or(0);
    let (l, l_prime) = (max_of(&flips_x), max_of(&flips_y));
    if l == 0 || l_prime == 0 {
        return Err(Error::invalid("related inputs never differ"));
    }
    Ok(AdversaryCounts::new(m.into(), m_prime.into(), l.into(), l_prime.into()))
}

/// Unstructured search on `n` bits: the all-zero input against every
/// weight-one input.
pub fn grover_relation(n: usize) -> Result<RelationSpec<'static, u8>> {
    let x = vec![vec![0u8; n]];
    let y = (0..n)
        .map(|i| {
            let mut v = vec![0u8; n];
            v[i] = 1;
            v
        })
        .collect();
    RelationSpec::new(x, y, |_, _| true)
}

/// Per-image preimage counts `(m_1, ..., m_{n/r})` of a half-domain function,
/// each in `[0, r]`, summing to `n/2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MultiplicityProfile {
    r: u64,
    mults: Vec<u64>,
}

impl MultiplicityProfile {
    pub fn new(r: u64, mults: Vec<u64>) -> Result<Self> {
        if r == 0 || mults.is_empty() {
            return Err(Error::invalid("profile needs r >= 1 and at least one image"));
        }
        if let Some(&m) = mults.iter().find(|&&m| m > r) {
            return Err(Error::invalid(format!("multiplicity {m} exceeds r = {r}")));
        }
        let total: u64 = mults.iter().sum();
        if 2 * total != r * mults.len() as u64 {
            return Err(Error::invalid(format!(
                "multiplicities sum to {total}, expected n/2 = {}",
                r * mults.len() as u64 / 2
            )));
        }
        Ok(MultiplicityProfile { r, mults })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn mults(&self) -> &[u64] {
        &self.mults
    }

    /// Domain size of the source, `r` times the image count.
    pub fn n(&self) -> u64 {
        self.r * self.mults.len() as u64
    }

    /// The profile the other half of a complementary split would have.
    pub fn complement(&self) -> MultiplicityProfile {
        MultiplicityProfile {
            r: self.r,
            mults: self.mults.iter().map(|&m| self.r - m).collect(),
        }
    }

    fn half(&self) -> Result<u64> {
        if self.r % 2 != 0 {
            return Err(Error::HalfIntegral);
        }
        Ok(self.r / 2)
    }

    /// Whether exactly half the images carry more than `r/2` preimages, the
    /// shape the closed-form counts assume.
    pub fn has_half_surplus(&self) -> bool {
        let surplus = self.mults.iter().filter(|&&m| 2 * m > self.r).count();
        2 * surplus == self.mults.len()
    }
}

/// `Ψ = Σ_{m_j > r/2} (m_j − r/2)`.
pub fn psi(p: &MultiplicityProfile) -> Result<u64> {
    let half = p.half()?;
    Ok(p.mults.iter().filter(|&&m| m > half).map(|&m| m - half).sum())
}

/// `Φ = (2Ψ)! / Π_{m_j < r/2} (r − 2m_j)!`.
pub fn phi(p: &MultiplicityProfile) -> Result<BigUint> {
    let half = p.half()?;
    let numerator = factorial(2 * psi(p)?);
    let denominator = p
        .mults
        .iter()
        .filter(|&&m| m < half)
        .fold(BigUint::from(1u32), |acc, &m| acc * factorial(p.r - 2 * m));
    Ok(numerator / denominator)
}

/// `m = C(n/4+Ψ, 2Ψ)·Φ` and `l = C(n/4+Ψ−1, 2Ψ−1)·Φ`.
pub fn closed_form_counts(n: u64, psi_value: u64, phi_value: &BigUint) -> Result<(BigUint, BigUint)> {
    if psi_value == 0 {
        return Err(Error::DegenerateRelation);
    }
    if n % 4 != 0 {
        return Err(Error::invalid("closed form needs 4 | n"));
    }
    if psi_value > n / 4 {
        return Err(Error::invalid("psi exceeds n/4"));
    }
    let q = n / 4;
    Ok((
        binomial(q + psi_value, 2 * psi_value) * phi_value,
        binomial(q + psi_value - 1, 2 * psi_value - 1) * phi_value,
    ))
}

/// `(n/(8Ψ) + 1/2)²`.
pub fn adversary_ratio(n: u64, psi_value: u64) -> Result<ExactRational> {
    if psi_value == 0 {
        return Err(Error::DegenerateRelation);
    }
    let base = BigRational::new(n.into(), (8 * psi_value).into()) + BigRational::new(1.into(), 2.into());
    Ok(&base * &base)
}

/// Largest `|X|·|Y|` the brute-force oracle will enumerate.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

fn multinomial(mults: &[u64]) -> BigUint {
    let total: u64 = mults.iter().sum();
    mults.iter().fold(factorial(total), |acc, &m| acc / factorial(m))
}

/// Every sequence whose value `j + 1` occurs `mults[j]` times.
fn arrangements(mults: &[u64]) -> Vec<Vec<u32>> {
    fn go(left: &mut [u64], current: &mut Vec<u32>, len: usize, out: &mut Vec<Vec<u32>>) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for j in 0..left.len() {
            if left[j] > 0 {
                left[j] -= 1;
                current.push(j as u32 + 1);
                go(left, current, len, out);
                current.pop();
                left[j] += 1;
            }
        }
    }
    let len = mults.iter().sum::<u64>() as usize;
    let mut out = Vec::new();
    go(&mut mults.to_vec(), &mut Vec::with_capacity(len), len, &mut out);
    out
}

/// Ground truth for the comparison relation: `X` holds every `b` with
/// per-image counts `p`, `Y` every `b` with the complementary counts, and a
/// pair is related when the two tables differ in exactly `2Ψ` positions.
/// Images are labelled `1..=n/r`; `range_size` only has to cover them.
pub fn brute_force_counts(n: u64, r: u64, range_size: u64, p: &MultiplicityProfile) -> Result<AdversaryCounts> {
    if p.r() != r || p.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "profile describes n = {}, r = {} but n = {n}, r = {r} requested",
            p.n(),
            p.r()
        )));
    }
    if range_size < p.mults().len() as u64 {
        return Err(Error::RangeTooSmall);
    }
    let distance = 2 * psi(p)?;
    if distance == 0 {
        return Err(Error::DegenerateRelation);
    }
    let q = p.complement();
    let size = multinomial(p.mults()) * multinomial(q.mults());
    if size.to_u64().is_none_or(|s| s > ENUMERATION_GUARD) {
        return Err(Error::EnumerationGuard);
    }
    let spec = RelationSpec::new(arrangements(p.mults()), arrangements(q.mults()), move |x, y| {
        x.iter().zip(y).filter(|(a, b)| a != b).count() as u64 == distance
    })?;
    evaluate_relation_bound(&spec)
}

/// Closed form `(m/l)²` as an exact rational.
pub fn closed_form_ratio(n: u64, psi_value: u64) -> Result<ExactRational> {
    let (m, l) = closed_form_counts(n, psi_value, &BigUint::from(1u32))?;
    if l.is_zero() {
        return Err(Error::DegenerateRelation);
    }
    let r = ratio(m, l);
    Ok(&r * &r)
}

/// Result of comparing the enumerated relation with the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ComesFromReport {
    pub counts: AdversaryCounts,
    pub psi: u64,
    pub phi: BigUint,
    pub closed_form: Option<(BigUint, BigUint)>,
    pub closed_form_match: bool,
}

/// Enumerates the relation for `p` and compares it with the closed form.
/// Profiles without exactly half the images in surplus have no closed form.
pub fn comes_from_report(p: &MultiplicityProfile) -> Result<ComesFromReport> {
    let n = p.n();
    let counts = brute_force_counts(n, p.r(), p.mults().len() as u64, p)?;
    let psi_value = psi(p)?;
    let phi_value = phi(p)?;
    let closed_form = if p.has_half_surplus() && n % 4 == 0 {
        Some(closed_form_counts(n, psi_value, &phi_value)?)
    } else {
        None
    };
    let closed_form_match = closed_form.as_ref().is_some_and(|(m, l)| {
        *m == counts.m && *m == counts.m_prime && *l == counts.l && *l == counts.l_prime
    });
    Ok(ComesFromReport {
        counts,
        psi: psi_value,
        phi: phi_value,
        closed_form,
        closed_form_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(r: u64, mults: &[u64]) -> MultiplicityProfile {
        MultiplicityProfile::new(r, mults.to_vec()).unwrap()
    }

    #[test]
    fn grover_relation_n4() {
        let c = evaluate_relation_bound(&grover_relation(4).unwrap()).unwrap();
        assert_eq!((c.m, c.m_prime, c.l, c.l_prime), (4u32.into(), 1u32.into(), 1u32.into(), 1u32.into()));
        assert_eq!(c.bound, 2.0);
    }

    #[test]
    fn single_pair_relation() {
        let spec = RelationSpec::new(vec![vec![0u8, 0]], vec![vec![1, 1]], |_, _| true).unwrap();
        let c = evaluate_relation_bound(&spec).unwrap();
        assert_eq!(c.bound, 1.0);
        assert_eq!(c.m, 1u32.into());
        assert_eq!(c.l_prime, 1u32.into());
    }

    #[test]
    fn relation_errors() {
        let none = RelationSpec::new(vec![vec![0u8]], vec![vec![1]], |_, _| false).unwrap();
        assert_eq!(evaluate_relation_bound(&none).unwrap_err(), Error::VacuousRelation);
        let partial = RelationSpec::from_pairs(vec![vec![0u8], vec![2]], vec![vec![1]], vec![(0, 0)]).unwrap();
        assert_eq!(evaluate_relation_bound(&partial).unwrap_err(), Error::DisconnectedInput);
        let empty: Result<RelationSpec<'_, u8>> = RelationSpec::new(vec![], vec![], |_, _| true);
        assert!(matches!(empty, Err(Error::VacuousRelation)));
    }

    #[test]
    fn psi_phi_examples() {
        assert_eq!(psi(&prof(4, &[2, 2])).unwrap(), 0);
        assert_eq!(psi(&prof(4, &[3, 1])).unwrap(), 1);
        assert_eq!(psi(&prof(4, &[4, 0])).unwrap(), 2);
        assert_eq!(phi(&prof(4, &[2, 2])).unwrap(), 1u32.into());
        assert_eq!(phi(&prof(4, &[3, 1])).unwrap(), 1u32.into());
        assert_eq!(phi(&prof(4, &[4, 0])).unwrap(), 1u32.into());
        assert_eq!(phi(&prof(4, &[3, 3, 1, 1])).unwrap(), 6u32.into());
        assert_eq!(psi(&prof(3, &[3, 0])).unwrap_err(), Error::HalfIntegral);
    }

    #[test]
    fn closed_form_examples() {
        let one = BigUint::from(1u32);
        assert_eq!(closed_form_counts(8, 1, &one).unwrap(), (3u32.into(), 2u32.into()));
        assert_eq!(closed_form_counts(16, 1, &one).unwrap(), (10u32.into(), 4u32.into()));
        assert_eq!(closed_form_counts(8, 2, &one).unwrap(), (1u32.into(), 1u32.into()));
        assert_eq!(closed_form_counts(8, 0, &one).unwrap_err(), Error::DegenerateRelation);
    }

    #[test]
    fn brute_force_examples() {
        let c = brute_force_counts(8, 4, 2, &prof(4, &[3, 1])).unwrap();
        assert_eq!((c.m.clone(), c.l.clone()), (3u32.into(), 2u32.into()));
        assert_eq!(c.bound, 1.5);
        assert_eq!(arrangements(&[3, 1]).len(), 4);
        let c = brute_force_counts(8, 4, 2, &prof(4, &[4, 0])).unwrap();
        assert_eq!((c.m, c.l), (1u32.into(), 1u32.into()));
        assert_eq!(
            brute_force_counts(8, 4, 2, &prof(4, &[2, 2])).unwrap_err(),
            Error::DegenerateRelation
        );
    }

    #[test]
    fn enumeration_guard() {
        let p = prof(16, &[12, 12, 4, 4]);
        assert_eq!(brute_force_counts(64, 16, 4, &p).unwrap_err(), Error::EnumerationGuard);
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(adversary_ratio(8, 1).unwrap(), BigRational::new(9.into(), 4.into()));
        assert_eq!(adversary_ratio(16, 1).unwrap(), BigRational::new(25.into(), 4.into()));
        // Ψ = n/4 puts the ratio at (1/2 + 1/2)² = 1.
        assert_eq!(adversary_ratio(16, 4).unwrap(), crate::exact::rational(1, 1));
        assert_eq!(closed_form_ratio(16, 4).unwrap(), crate::exact::rational(1, 1));
        assert_eq!(adversary_ratio(16, 2).unwrap(), BigRational::new(9.into(), 4.into()));
        assert_eq!(closed_form_ratio(8, 1).unwrap(), adversary_ratio(8, 1).unwrap());
        assert_eq!(closed_form_ratio(16, 1).unwrap(), adversary_ratio(16, 1).unwrap());
    }

    #[test]
    fn two_surplus_images_break_the_closed_form() {
        // Each surplus image picks its own flips, so the enumerated m is
        // C(3,2)^2·Φ = 54 rather than C(6,4)·Φ = 90.
        let report = comes_from_report(&prof(4, &[3, 3, 1, 1])).unwrap();
        assert_eq!(report.counts.m, 54u32.into());
        assert_eq!(report.closed_form, Some((90u32.into(), 60u32.into())));
        assert!(!report.closed_form_match);
    }

    #[test]
    fn report_matches_at_n8() {
        let report = comes_from_report(&prof(4, &[3, 1])).unwrap();
        assert!(report.closed_form_match);
        let c = evaluate_relation_bound(&grover_relation(9).unwrap()).unwrap();
        assert_eq!(c.squared_bound(), crate::exact::integer(9));
        assert_eq!(c.bound, 3.0);
    }
}
