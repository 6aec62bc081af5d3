use proptest::prelude::*;
use qqlab::bounds::{collision_lb, composed_lb, continuous_optimum, distinction_lb, grid, optimize_r, GridKind};

proptest! {
    #[test]
    fn divisor_grid_matches_scan(n in 2u64..5000) {
        let scan: Vec<u64> = (2..n).filter(|r| n % r == 0).collect();
        prop_assert_eq!(grid(n, GridKind::Divisors), scan);
    }

    #[test]
    fn composed_is_the_smaller_term(e in 4u32..30, k in 1u32..29) {
        prop_assume!(k < e);
        let (n, r) = (1u64 << e, 1u64 << k);
        let v = composed_lb(n, r).unwrap();
        prop_assert!(v <= collision_lb(n, r).unwrap());
        prop_assert!(v <= distinction_lb(n, r).unwrap());
    }
}

#[test]
fn optimum_dominates_the_grid() {
    for n in [360u64, 1 << 12, 5040, 1 << 18, 3 * (1 << 15)] {
        for kind in [GridKind::Pow2, GridKind::Divisors] {
            let g = grid(n, kind);
            let (r_star, v) = optimize_r(n, &g).unwrap();
            assert!(g.contains(&r_star));
            for &r in &g {
                assert!(v >= composed_lb(n, r).unwrap());
            }
        }
    }
}

#[test]
fn terms_cross_at_the_continuous_optimum() {
    for e in [12u32, 16, 20, 24] {
        let n = 1u64 << e;
        let r = continuous_optimum(n);
        let c = (n as f64 / r).cbrt();
        let d = (r / (n as f64).ln()).sqrt();
        assert!((c - d).abs() / c <= 0.05);
        // The pow2 optimum sits within a factor 2 of it.
        let (r_star, _) = optimize_r(n, &grid(n, GridKind::Pow2)).unwrap();
        assert!(r_star as f64 >= r / 2.0 && r_star as f64 <= 2.0 * r);
    }
}

#[test]
fn ties_go_to_smaller_r() {
    // Hand-built grid where both candidates give the same composed value is
    // rare; check ordering independence instead.
    let n = 1u64 << 16;
    let g = grid(n, GridKind::Pow2);
    let mut rev = g.clone();
    rev.reverse();
    assert_eq!(optimize_r(n, &g).unwrap(), optimize_r(n, &rev).unwrap());
}
