use proptest::prelude::*;
use youngflow::coefficients::{builtin_field, CoefficientField, FieldSpec};
use youngflow::drivers::{analytic_driver, fbm_sample, uniform_grid, DriverKind, FbmSpec};
use youngflow::flow::{cauchy_operator, flow_axiom_check, non_intersection_check};
use youngflow::paths::{Interval, SampledPath};
use youngflow::solver::SolveOptions;

fn field(name: &str, horizon: f64) -> CoefficientField {
    let spec = FieldSpec {
        name: name.into(),
        a: -0.4,
        b0: 0.2,
        c: 0.7,
        d0: 0.3,
        ..FieldSpec::default()
    };
    builtin_field(&spec, 0.75, 1.0, 1.0, horizon).unwrap()
}

fn fbm(seed: u64) -> SampledPath {
    fbm_sample(&FbmSpec {
        hurst: 0.75,
        horizon: 1.0,
        samples: 512,
        seed,
    })
    .unwrap()
}

#[test]
fn linear_flow_is_explicit() {
    // With f = 0 and g = x the flow is x e^{ω_t - ω_s}, off-grid times included.
    let spec = FieldSpec {
        name: "linear".into(),
        c: 1.0,
        ..FieldSpec::default()
    };
    let f = builtin_field(&spec, 0.75, 1.0, 1.0, 2.0).unwrap();
    let w = analytic_driver(DriverKind::Sine { a: 1.0 }, &uniform_grid(0.0, 2.0, 8000)).unwrap();
    let opts = SolveOptions::default();
    for (s, t) in [(0.1234, 1.777), (1.9, 0.05), (0.5, 0.5)] {
        let x = cauchy_operator(&f, &w, s, t, &[0.8], &opts).unwrap();
        let exact = 0.8 * (t.sin() - s.sin()).exp();
        assert!((x[0] - exact).abs() < 1e-5, "{s} -> {t}: {} vs {exact}", x[0]);
    }
}

#[test]
fn composition_tightens_with_tolerance() {
    let f = field("time-varying", 1.0);
    let w = fbm(21);
    let probes = vec![vec![0.3]];
    let run = |tol: f64| {
        let opts = SolveOptions {
            picard_tol: tol,
            ..SolveOptions::default()
        };
        flow_axiom_check(&f, &w, (0.1, 0.6, 0.9), &probes, 1e-5, &opts).unwrap().composition_residual
    };
    let (tight, loose) = (run(1e-12), run(1e-6));
    assert!(tight <= loose, "{tight} > {loose}");
}

#[test]
fn continuity_table_is_monotone_for_linear_field() {
    let spec = FieldSpec {
        name: "linear".into(),
        a: -0.5,
        c: 0.8,
        ..FieldSpec::default()
    };
    let f = builtin_field(&spec, 0.75, 1.0, 1.0, 1.0).unwrap();
    let w = fbm(5);
    let r = flow_axiom_check(&f, &w, (0.0, 0.5, 1.0), &[vec![1.0]], 1e-5, &SolveOptions::default()).unwrap();
    assert_eq!(r.continuity_table.len(), 3);
    assert!(r.continuity_table.windows(2).all(|p| p[0].1 < p[1].1), "{:?}", r.continuity_table);
    assert!(r.ok);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn distinct_starts_never_meet(seed in 0u64..1000, x0 in -2.0f64..2.0, gap in 0.01f64..1.0) {
        let f = field("bounded-smooth", 1.0);
        let w = fbm(seed);
        let r = non_intersection_check(&f, &w, 0.0, &[x0], &[x0 + gap], Interval::new(0.0, 1.0).unwrap(),
                                       None, &SolveOptions::default()).unwrap();
        prop_assert!(r.min_separation > 0.0);
        prop_assert!(r.certificate.ok, "{:?}", r);
    }
}
