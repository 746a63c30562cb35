use proptest::prelude::*;
use ydde::path::{
    counterexample_growth, holder_norm, holder_seminorm, pvar_seminorm, read_csv, segment_norms, segment_path_holder,
    segment_path_norm, sup_norm, write_csv,
};
use ydde::GridPath;

const H: f64 = 1.0 / 16.0;

fn brute_holder(v: &[f64], beta: f64, lo: usize, hi: usize) -> f64 {
    let mut best = 0.0_f64;
    for s in lo..=hi {
        for t in s + 1..=hi {
            best = best.max((v[t] - v[s]).abs() / ((t - s) as f64 * H).powf(beta));
        }
    }
    best
}

/// Exhaustive search over every subset of interior nodes.
fn brute_pvar(v: &[f64], p: f64, lo: usize, hi: usize) -> f64 {
    let inner = hi - lo - 1;
    let mut best = 0.0_f64;
    for mask in 0u32..(1 << inner) {
        let mut prev = lo;
        let mut sum = 0.0;
        for j in 0..inner {
            if mask & (1 << j) != 0 {
                let k = lo + 1 + j;
                sum += (v[k] - v[prev]).abs().powf(p);
                prev = k;
            }
        }
        sum += (v[hi] - v[prev]).abs().powf(p);
        best = best.max(sum);
    }
    best.powf(1.0 / p)
}

fn path_strategy(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, min..max)
}

fn t(k: usize) -> f64 {
    k as f64 * H
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn holder_matches_pair_scan(v in path_strategy(2, 40), beta in 0.05..0.95f64) {
        let p = GridPath::scalar(0.0, H, v.clone()).unwrap();
        let n = v.len() - 1;
        let rep = holder_seminorm(&p, beta, (0.0, t(n))).unwrap();
        let oracle = brute_holder(&v, beta, 0, n);
        prop_assert!((rep.seminorm - oracle).abs() <= 1e-12 * oracle.max(1.0));
        prop_assert!((rep.reevaluate(&p) - rep.seminorm).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn holder_subadditive(v in path_strategy(3, 40), beta in 0.05..0.95f64, a in 0usize..40, b in 0usize..40, c in 0usize..40) {
        let n = v.len() - 1;
        let mut w = [a % (n + 1), b % (n + 1), c % (n + 1)];
        w.sort();
        prop_assume!(w[0] < w[1] && w[1] < w[2]);
        let p = GridPath::scalar(0.0, H, v).unwrap();
        let whole = holder_seminorm(&p, beta, (t(w[0]), t(w[2]))).unwrap().seminorm;
        let left = holder_seminorm(&p, beta, (t(w[0]), t(w[1]))).unwrap().seminorm;
        let right = holder_seminorm(&p, beta, (t(w[1]), t(w[2]))).unwrap().seminorm;
        prop_assert!(whole <= (left + right) * (1.0 + 1e-12));
    }

    #[test]
    fn pvar_below_holder(v in path_strategy(2, 40), beta in 0.1..0.9f64, extra in 0.0..2.0f64) {
        let p_idx = 1.0 / beta + extra;
        let n = v.len() - 1;
        let p = GridPath::scalar(0.0, H, v).unwrap();
        let w = (0.0, t(n));
        let pv = pvar_seminorm(&p, p_idx, w).unwrap().seminorm;
        let hol = holder_seminorm(&p, beta, w).unwrap().seminorm;
        prop_assert!(pv <= hol * t(n).powf(beta) * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn pvar_dp_matches_enumeration(v in path_strategy(2, 13), p_idx in 1.0..4.0f64) {
        let n = v.len() - 1;
        let p = GridPath::scalar(0.0, H, v.clone()).unwrap();
        for lo in 0..n {
            for hi in lo + 1..=n {
                let rep = pvar_seminorm(&p, p_idx, (t(lo), t(hi))).unwrap();
                let oracle = brute_pvar(&v, p_idx, lo, hi);
                prop_assert!((rep.seminorm - oracle).abs() <= 1e-12 * oracle.max(1.0));
                prop_assert!((rep.reevaluate(&p) - oracle).abs() <= 1e-12 * oracle.max(1.0));
            }
        }
    }

    #[test]
    fn segment_path_seminorm_below_path_seminorm(
        v in path_strategy(12, 40),
        beta in 0.05..0.95f64,
        lag in 1usize..6,
        a in 0usize..40,
        len in 1usize..30,
    ) {
        let n = v.len() - 1;
        let lo = lag + a % (n - lag);
        let hi = (lo + len).min(n);
        prop_assume!(hi > lo);
        let p = GridPath::scalar(0.0, H, v).unwrap();
        let r = t(lag);
        let seg = segment_path_holder(&p, beta, r, (t(lo), t(hi))).unwrap().seminorm;
        let wide = holder_seminorm(&p, beta, (t(lo) - r, t(hi))).unwrap().seminorm;
        prop_assert!(seg <= wide * (1.0 + 1e-12));
        let seg_norm = segment_path_norm(&p, beta, r, (t(lo), t(hi))).unwrap();
        let wide_norm = holder_norm(&p, beta, (t(lo) - r, t(hi))).unwrap();
        prop_assert!(seg_norm <= wide_norm * (1.0 + 1e-12));
    }

    #[test]
    fn segment_norms_match_direct(v in path_strategy(6, 30), beta in 0.05..0.95f64, lag in 1usize..5) {
        let p = GridPath::scalar(0.0, H, v.clone()).unwrap();
        let norms = segment_norms(&p, beta, t(lag)).unwrap();
        prop_assert_eq!(norms.len(), v.len() - lag);
        for (i, got) in norms.iter().enumerate() {
            let sup = v[i..=i + lag].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let want = sup + brute_holder(&v, beta, i, i + lag);
            prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn counterexample_exceeds_power(beta in 0.1..0.45f64, k in 1u32..4) {
        let n = 10usize.pow(k);
        let p = 2.0;
        let v = counterexample_growth(beta, p, n).unwrap();
        prop_assert!(v >= (n as f64).powf((1.0 - beta * p) / p) * (1.0 - 1e-12));
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 2), 2..20)) {
        let p = GridPath::from_rows(-0.25, H, &rows).unwrap();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values(), p.values());
        prop_assert_eq!(back.dim(), 2);
    }
}

#[test]
fn counterexample_ladder_grows() {
    let sums: Vec<f64> = [100, 1000, 10000].iter().map(|&n| counterexample_growth(0.4, 2.0, n).unwrap()).collect();
    assert!(sums.windows(2).all(|w| w[1] > w[0]));
    // The block sup of x(t) = |t|^β is its value at the origin cell, so every
    // term equals n^{-β} and the sum is n^{(1−2β)/2}.
    for (s, n) in sums.iter().zip([100.0_f64, 1000.0, 10000.0]) {
        let closed = n.powf(0.1);
        assert!((s - closed).abs() <= 1e-9 * closed, "{s} vs {closed}");
    }
    assert!((sums[0] - 1.5849).abs() < 1e-4);
}

#[test]
fn examples_from_grid_arithmetic() {
    let p = GridPath::scalar(0.0, 0.5, vec![0.0, 1.0, 0.0]).unwrap();
    let w = (0.0, 1.0);
    assert_eq!(sup_norm(&p, w).unwrap(), 1.0);
    let beta = 0.5;
    let want = 1.0 / 0.5_f64.powf(beta);
    assert!((holder_seminorm(&p, beta, w).unwrap().seminorm - want).abs() < 1e-15);
    // Two unit jumps, so the p = 1 variation is 2.
    assert!((pvar_seminorm(&p, 1.0, w).unwrap().seminorm - 2.0).abs() < 1e-15);
    let flat = GridPath::scalar(0.0, 0.25, vec![3.0; 5]).unwrap();
    assert_eq!(holder_seminorm(&flat, 0.3, (0.0, 1.0)).unwrap().seminorm, 0.0);
    assert!(holder_seminorm(&p, 1.2, w).is_err());
}
