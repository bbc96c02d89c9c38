use youngflow::drivers::{
    analytic_driver, analytic_driver_dim, fbm_covariance, fbm_covariance_error, fbm_sample, fbm_sample_dim,
    uniform_grid, DriverKind, FbmSpec,
};
use youngflow::paths::{p_variation, Interval};

fn spec(hurst: f64, samples: usize, seed: u64) -> FbmSpec {
    FbmSpec {
        hurst,
        horizon: 1.0,
        samples,
        seed,
    }
}

#[test]
fn brownian_increments_are_uncorrelated() {
    let n = 1 << 14;
    let w = fbm_sample(&spec(0.5, n, 11)).unwrap();
    let inc: Vec<f64> = (0..n).map(|i| w.value(i + 1)[0] - w.value(i)[0]).collect();
    let mean = inc.iter().sum::<f64>() / n as f64;
    let var = inc.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let band = 3.0 / (n as f64).sqrt();
    for lag in 1..=5 {
        let c = (0..n - lag).map(|i| (inc[i] - mean) * (inc[i + lag] - mean)).sum::<f64>() / n as f64;
        assert!((c / var).abs() < band, "lag {lag}: {}", c / var);
    }
    // Variance of each step is 1/n.
    assert!((var * n as f64 - 1.0).abs() < 0.05);
}

#[test]
fn covariance_formula_agrees_with_noise_sums() {
    // R(s, t) for s = i h, t = j h equals the sum of unit-step noise
    // covariances over the two index ranges, scaled by h^{2H}.
    let h = 0.7;
    let rho = |k: i64| {
        let k = k.abs() as f64;
        0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h))
    };
    let step = 0.125;
    for i in 1..8i64 {
        for j in 1..8i64 {
            let s: f64 = (0..i).flat_map(|a| (0..j).map(move |b| (a, b))).map(|(a, b)| rho(a - b)).sum();
            let r = fbm_covariance(h, i as f64 * step, j as f64 * step);
            assert!((s * step.powf(2.0 * h) - r).abs() < 1e-13);
        }
    }
}

#[test]
fn factor_reproduces_covariance() {
    for h in [0.5, 0.6, 0.75, 0.9] {
        for n in [16, 128, 512] {
            let e = fbm_covariance_error(&spec(h, n, 0)).unwrap();
            assert!(e <= 1e-10, "H {h} n {n}: {e}");
        }
    }
    assert!(fbm_covariance_error(&spec(0.75, 4096, 0)).is_err());
}

#[test]
fn generation_is_seeded() {
    let a = fbm_sample(&spec(0.75, 300, 5)).unwrap();
    let b = fbm_sample(&spec(0.75, 300, 5)).unwrap();
    let c = fbm_sample(&spec(0.75, 300, 6)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.len(), 301);
    assert_eq!(a.first_value(), &[0.0]);
    let planar = fbm_sample_dim(&spec(0.75, 300, 5), 2).unwrap();
    assert_eq!(planar.dim(), 2);
    assert_ne!(planar.value(300)[0], planar.value(300)[1]);
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(fbm_sample(&spec(0.4, 10, 0)).is_err());
    assert!(fbm_sample(&spec(1.0, 10, 0)).is_err());
    assert!(fbm_sample(&spec(0.7, 1, 0)).is_err());
    assert!(DriverKind::from_name("square", &[]).is_err());
}

#[test]
fn sine_total_variation() {
    let grid = uniform_grid(0.0, std::f64::consts::PI, 10_000);
    let w = analytic_driver(DriverKind::Sine { a: 1.0 }, &grid).unwrap();
    let v = p_variation(&w, 1.0, w.domain()).unwrap();
    assert!((v - 2.0).abs() < 1e-3, "{v}");
}

#[test]
fn analytic_kinds() {
    let grid = uniform_grid(0.0, 2.0, 40);
    let lin = analytic_driver(DriverKind::from_name("linear", &[3.0]).unwrap(), &grid).unwrap();
    assert!((lin.last_value()[0] - 6.0).abs() < 1e-14);
    let pow = analytic_driver(DriverKind::Power { k: 2.0 }, &grid).unwrap();
    assert!((pow.eval(1.5)[0] - 2.25).abs() < 1e-14);
    let walk = analytic_driver_dim(DriverKind::BrownianLike { seed: 3, scale: 1.0 }, &grid, 2).unwrap();
    assert_eq!(walk.dim(), 2);
    let v = p_variation(&lin, 1.5, Interval::new(0.0, 1.0).unwrap()).unwrap();
    assert!((v - 3.0).abs() < 1e-12);
}
