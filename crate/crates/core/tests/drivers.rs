use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use ydde::driver::{empirical_holder_exponent, generate, DriverKind, DriverSpec, FbmSampler};
use ydde::path::holder_seminorm;

const SAMPLES: usize = 10_000;

/// Sample mean of `a·b` with its standard error.
fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn fbm_covariance_matches_closed_form() {
    let h = 1.0 / 256.0;
    let sampler = FbmSampler::cached(128, 0.75).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let prods: Vec<f64> = (0..SAMPLES)
        .map(|_| {
            let w = sampler.sample_path(&mut rng, h, 1.0);
            assert_eq!(w[0], 0.0);
            w[64] * w[128]
        })
        .collect();
    let (m, se) = mean_and_se(&prods);
    let (s, t) = (0.25_f64, 0.5_f64);
    let exact = 0.5 * (s.powf(1.5) + t.powf(1.5) - (t - s).powf(1.5));
    assert!((m - exact).abs() <= 3.0 * se, "sample {m}, exact {exact}, se {se}");
}

#[test]
fn brownian_boundary_has_variance_h() {
    // H = 1/2 is outside the driver spec; the sampler itself accepts it.
    let h = 1.0 / 64.0;
    let sampler = FbmSampler::new(16, 0.5).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let sq: Vec<f64> = (0..SAMPLES)
        .map(|_| {
            let w = sampler.sample_path(&mut rng, h, 1.0);
            (w[7] - w[6]).powi(2)
        })
        .collect();
    let (m, se) = mean_and_se(&sq);
    assert!((m - h).abs() <= 3.0 * se, "variance {m}, h {h}, se {se}");
}

#[test]
fn increments_are_stationary() {
    let h = 1.0 / 64.0;
    let sampler = FbmSampler::cached(64, 0.75).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let (mut early, mut late) = (Vec::new(), Vec::new());
    for _ in 0..SAMPLES {
        let w = sampler.sample_path(&mut rng, h, 1.0);
        early.push((w[8] - w[0]).powi(2));
        late.push((w[64] - w[56]).powi(2));
    }
    let ((a, sa), (b, sb)) = (mean_and_se(&early), mean_and_se(&late));
    assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
    let exact = (8.0 * h).powf(1.5);
    assert!((a - exact).abs() <= 3.0 * sa);
}

#[test]
fn same_seed_same_path() {
    let spec = DriverSpec::new(DriverKind::Fbm { hurst: 0.75, amplitude: 1.0 }, 1.0, 1.0 / 512.0).with_seed(99);
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a.values(), b.values());
    let c = generate(&spec.clone().with_seed(100)).unwrap();
    assert_ne!(a.values(), c.values());
    assert_eq!(a.len(), 513);
}

#[test]
fn deterministic_kinds() {
    let zero = generate(&DriverSpec::new(DriverKind::Zero, 1.0, 0.125)).unwrap();
    assert!(zero.values().iter().all(|&v| v == 0.0));
    let sine = generate(&DriverSpec::new(DriverKind::Sine { amplitude: 1.0, frequency: 1.0 }, 1.0, 0.125)).unwrap();
    assert!((sine.node(2)[0] - 1.0).abs() < 1e-15);
    let h = 1.0 / 64.0;
    let power = generate(&DriverSpec::new(DriverKind::Power { exponent: 0.75, amplitude: 1.0 }, 1.0, h)).unwrap();
    let rep = holder_seminorm(&power, 0.75, (0.0, 1.0)).unwrap();
    // t^ν is ν-Hölder with constant 1, attained on every pair starting at 0.
    let mut brute = 0.0_f64;
    for s in 0..=64 {
        for t in s + 1..=64 {
            let (x, y) = (power.node(s)[0], power.node(t)[0]);
            brute = brute.max((y - x).abs() / ((t - s) as f64 * h).powf(0.75));
        }
    }
    assert!((rep.seminorm - brute).abs() < 1e-12);
    assert!((rep.seminorm - 1.0).abs() < 1e-12);
}

#[test]
fn empirical_exponent_orders_by_beta() {
    let spec = DriverSpec::new(DriverKind::Fbm { hurst: 0.75, amplitude: 1.0 }, 1.0, 1.0 / 1024.0).with_seed(4);
    let w = generate(&spec).unwrap();
    let tab = empirical_holder_exponent(&w, &[0.6, 0.74]).unwrap();
    assert!(tab[0].1.is_finite() && tab[0].1 < tab[1].1);
    let line = ydde::GridPath::from_fn(0.0, 0.125, 8, 1, |t| vec![t]).unwrap();
    assert!((empirical_holder_exponent(&line, &[1.0]).unwrap()[0].1 - 1.0).abs() < 1e-12);
}
