use proptest::prelude::*;
use youngflow::coefficients::{
    builtin_field, composed_difference_bound, composed_variation_bound, four_point_probe, growth_bound_probe,
    probe_hypotheses, select_exponents, FieldSpec, BUILTIN_FIELDS,
};
use youngflow::drivers::{fbm_sample, uniform_grid, FbmSpec};
use youngflow::paths::SampledPath;
use youngflow::Error;

fn spec(name: &str) -> FieldSpec {
    FieldSpec {
        name: name.into(),
        a: -0.7,
        b0: 0.3,
        c: 0.9,
        d0: 0.4,
        dim: 2,
        noise_dim: 1,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn selected_exponents_satisfy_every_relation(p in 1.01f64..1.99, alpha in 0.5f64..0.999,
                                                 beta in 0.01f64..=1.0, delta in 0.01f64..=1.0) {
        if let Ok(e) = select_exponents(p, alpha, beta, delta) {
            prop_assert!(1.0 / e.p + 1.0 / e.q0 > 1.0);
            prop_assert!(e.q0 * e.beta > 1.0);
            prop_assert!(e.q0 * e.delta >= e.q);
            prop_assert!(e.q > e.p);
            prop_assert!(e.q * e.alpha > 1.0);
            prop_assert!(1.0 / e.q0 <= 0.5);
            prop_assert_eq!(e.p_prime, p.max(1.0 / alpha));
        }
    }

    #[test]
    fn infeasible_sets_name_an_inequality(p in 1.01f64..1.99, alpha in 0.5f64..0.999,
                                          beta in 0.01f64..=1.0, delta in 0.01f64..=1.0) {
        match select_exponents(p, alpha, beta, delta) {
            Ok(_) => {}
            Err(Error::Infeasible(msg)) => prop_assert!(msg.contains("fails"), "{msg}"),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn smooth_case_is_feasible() {
    for p in [1.1, 1.3, 1.5, 1.7, 1.9] {
        select_exponents(p, 0.75, 1.0, 1.0).unwrap_or_else(|e| panic!("p = {p}: {e}"));
    }
    assert!(matches!(select_exponents(1.5, 0.75, 0.2, 1.0), Err(Error::Infeasible(_))));
    assert!(matches!(select_exponents(2.0, 0.75, 1.0, 1.0), Err(Error::Parameter(_))));
}

#[test]
fn builtin_fields_pass_hypothesis_probes() {
    let exps = select_exponents(1.5, 0.75, 1.0, 1.0).unwrap();
    for name in BUILTIN_FIELDS {
        let field = builtin_field(&spec(name), 0.75, 1.0, 1.0, 2.0).unwrap();
        let r = probe_hypotheses(&field, 2.0, &exps, 3.0, 400, 7).unwrap();
        assert!(r.ok(), "{name}: {r:?}");
        let derived = field.derived(2.0, &exps).unwrap();
        assert!(growth_bound_probe(&field, &derived, 3.0, 400, 8).ok, "{name}");
        assert!(four_point_probe(&field, 2.0, 3.0, 400, 9).ok, "{name}");
    }
    assert!(builtin_field(&spec("nope"), 0.75, 1.0, 1.0, 2.0).is_err());
}

#[test]
fn composition_bounds_on_rough_paths() {
    let exps = select_exponents(1.5, 0.75, 1.0, 1.0).unwrap();
    for seed in 0..5 {
        let mk = |s: u64| {
            let fbm = fbm_sample(&FbmSpec {
                hurst: 0.75,
                horizon: 1.0,
                samples: 256,
                seed: s,
            })
            .unwrap();
            fbm.map(2, |t, v| vec![v[0], 0.5 * v[0] + t])
        };
        let x = mk(seed).unwrap();
        let y0 = mk(seed + 100).unwrap();
        // Shift y so that both paths start at the same point.
        let y = y0.map(2, |_, v| vec![v[0] - y0.value(0)[0] + x.value(0)[0], v[1] - y0.value(0)[1] + x.value(0)[1]]).unwrap();
        for name in ["linear", "bounded-smooth", "time-varying"] {
            let field = builtin_field(&spec(name), 0.75, 1.0, 1.0, 1.0).unwrap();
            let derived = field.derived(1.0, &exps).unwrap();
            let c = composed_variation_bound(&field, &x, x.domain(), &exps, &derived).unwrap();
            assert!(c.ok, "{name} seed {seed}: {c:?}");
            let radius = 1.0 + x.sup_norm().max(y.sup_norm()) + 10.0;
            let d = composed_difference_bound(&field, &x, &y, x.domain(), &exps, &derived, radius).unwrap();
            assert!(d.ok, "{name} seed {seed}: {d:?}");
        }
    }
}

#[test]
fn difference_bound_needs_common_start() {
    let exps = select_exponents(1.5, 0.75, 1.0, 1.0).unwrap();
    let field = builtin_field(&spec("linear"), 0.75, 1.0, 1.0, 1.0).unwrap();
    let derived = field.derived(1.0, &exps).unwrap();
    let t = uniform_grid(0.0, 1.0, 10);
    let x = SampledPath::constant(t.clone(), &[0.0, 0.0]).unwrap();
    let y = SampledPath::constant(t, &[1.0, 0.0]).unwrap();
    assert!(composed_difference_bound(&field, &x, &y, x.domain(), &exps, &derived, 2.0).is_err());
}

#[test]
fn reversed_field_negates_drift_and_mirrors_time() {
    let field = builtin_field(&spec("time-varying"), 0.75, 1.0, 1.0, 2.0).unwrap();
    let rev = field.reversed(2.0);
    let x = [0.3, -1.2];
    for u in [0.0, 0.4, 1.7] {
        let f = field.eval_f(2.0 - u, &x);
        let fr = rev.eval_f(u, &x);
        assert!(f.iter().zip(&fr).all(|(a, b)| (a + b).abs() < 1e-15));
        assert_eq!(rev.eval_g(u, &x), field.eval_g(2.0 - u, &x));
    }
}
