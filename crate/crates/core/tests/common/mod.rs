//! Independent oracles shared by the integration tests. None of these call
//! into the library's probability or counting code.
#![allow(dead_code)]

/// All `k`-subsets of `0..n` as bitmasks.
pub fn subsets(n: u32, k: u32) -> impl Iterator<Item = u64> {
    (0u64..(1u64 << n)).filter(move |s| s.count_ones() == k)
}

/// Exact probability, as `(hits, total)`, that a uniform half of the domain
/// of the block function `f(i) = ⌈i/r⌉` on `[n]` leaves some image with
/// `|count − r/2| > c·√(r·ln(n/r))`.
pub fn exhaustive_bad_probability(n: u32, r: u32, constant: f64) -> (u64, u64) {
    let threshold = constant * (r as f64 * (n as f64 / r as f64).ln()).sqrt();
    let images = n / r;
    let mut hits = 0;
    let mut total = 0;
    for s in subsets(n, n / 2) {
        total += 1;
        let bad = (0..images).any(|j| {
            let block = ((1u64 << r) - 1) << (j * r);
            let count = (s & block).count_ones() as f64;
            let dev = (count - r as f64 / 2.0).abs();
            assert!((dev - threshold).abs() > 1e-9, "oracle too close to the boundary");
            dev > threshold
        });
        hits += bad as u64;
    }
    (hits, total)
}

/// `P[X = k]` for `X` = marked items in a uniform `draw`-subset, by subset
/// enumeration (`n ≤ 20`). Items `0..r` are marked.
pub fn enumerated_hypergeometric(n: u32, r: u32, draw: u32) -> Vec<(u64, u64)> {
    let marked = (1u64 << r) - 1;
    let mut hist = vec![0u64; r as usize + 1];
    let mut total = 0;
    for s in subsets(n, draw) {
        hist[(s & marked).count_ones() as usize] += 1;
        total += 1;
    }
    hist.into_iter().map(|h| (h, total)).collect()
}

/// Number of positions where two tables differ.
pub fn hamming(x: &[u32], y: &[u32]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// Upper `alpha` critical value of the chi-square distribution.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Pearson homogeneity statistic for two samples over shared categories,
/// pooling categories whose combined count is below 10. Returns
/// `(statistic, degrees of freedom)`.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> (f64, usize) {
    let mut pooled: Vec<(u64, u64)> = Vec::new();
    let mut rest = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        if x + y < 10 {
            rest.0 += x;
            rest.1 += y;
        } else {
            pooled.push((x, y));
        }
    }
    if rest.0 + rest.1 > 0 {
        pooled.push(rest);
    }
    let na: u64 = pooled.iter().map(|p| p.0).sum();
    let nb: u64 = pooled.iter().map(|p| p.1).sum();
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    for &(x, y) in &pooled {
        let col = (x + y) as f64;
        let ea = col * na as f64 / total;
        let eb = col * nb as f64 / total;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    (stat, pooled.len().saturating_sub(1))
}
