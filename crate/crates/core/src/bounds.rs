//! Raw term values of the composed lower bound, up to constant factors.
//! Logarithms are natural throughout.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::AcceptanceTable;

/// `(n/r)^{1/3}`.
pub fn collision_lb(n: u64, r: u64) -> Result<f64> {
    if r < 2 || n % r != 0 {
        return Err(Error::RDoesNotDivideN);
    }
    Ok(((n / r) as f64).cbrt())
}

/// `√(r / ln n)`.
pub fn distinction_lb(n: u64, r: u64) -> Result<f64> {
    if n <= 1 {
        return Err(Error::invalid("distinction bound needs n > 1"));
    }
    Ok((r as f64 / (n as f64).ln()).sqrt())
}

/// `min` of the two terms.
pub fn composed_lb(n: u64, r: u64) -> Result<f64> {
    Ok(collision_lb(n, r)?.min(distinction_lb(n, r)?))
}

/// Candidate `r` values with `r | n` and `2 ≤ r < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Pow2,
    Divisors,
}

pub fn grid(n: u64, kind: GridKind) -> Vec<u64> {
    match kind {
        GridKind::Pow2 => (1..64)
            .map(|e| 1u64 << e)
            .take_while(|&r| r < n)
            .filter(|&r| n % r == 0)
            .collect(),
        GridKind::Divisors => {
            let mut out: Vec<u64> = (1..)
                .take_while(|&d: &u64| d.saturating_mul(d) <= n)
                .filter(|&d| n % d == 0)
                .flat_map(|d| [d, n / d])
                .filter(|&r| 2 <= r && r < n)
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        }
    }
}

/// Maximizer of the composed bound over `grid`; ties go to the smaller `r`.
pub fn optimize_r(n: u64, grid: &[u64]) -> Result<(u64, f64)> {
    let mut best: Option<(u64, f64)> = None;
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    for r in sorted {
        if r < 2 || r >= n || n % r != 0 {
            return Err(Error::invalid(format!("grid value {r} is not a divisor in [2, n)")));
        }
        let v = composed_lb(n, r)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((r, v));
        }
    }
    best.ok_or(Error::EmptyGrid)
}

/// `n^{2/5}·(ln n)^{3/5}`, where the two terms cross.
pub fn continuous_optimum(n: u64) -> f64 {
    let n = n as f64;
    n.powf(0.4) * n.ln().powf(0.6)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub r: u64,
    pub collision_term: f64,
    pub distinction_term: f64,
    pub composed: f64,
    pub optimal_r: u64,
    pub optimal_value: f64,
    pub continuous_r: f64,
    pub note: &'static str,
}

/// Terms at the grid optimum.
pub fn bound_report(n: u64, kind: GridKind) -> Result<BoundReport> {
    let (r, value) = optimize_r(n, &grid(n, kind))?;
    Ok(BoundReport {
        n,
        r,
        collision_term: collision_lb(n, r)?,
        distinction_term: distinction_lb(n, r)?,
        composed: value,
        optimal_r: r,
        optimal_value: value,
        continuous_r: continuous_optimum(n),
        note: "raw term values, up to constant factors",
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dichotomy {
    CollisionSolverExists,
    DistinctionSolverExists,
}

/// Which problem a set equality solver with this acceptance table yields.
pub fn dichotomy_classify(table: &AcceptanceTable) -> Result<Dichotomy> {
    if !(table.pc1 > 0.8 && table.pe1 < 0.2) {
        return Err(Error::NotASolver);
    }
    Ok(if table.pe2 >= 0.4 || table.pc2 <= 0.6 {
        Dichotomy::CollisionSolverExists
    } else {
        Dichotomy::DistinctionSolverExists
    })
}
