use proptest::prelude::*;
use youngflow::drivers::{analytic_driver, uniform_grid, DriverKind};
use youngflow::greedy::{count_bound, greedy_sequence, kappa};
use youngflow::paths::{Interval, SampledPath};

fn walk(steps: &[f64]) -> SampledPath {
    let t: Vec<f64> = uniform_grid(0.0, 1.0, steps.len());
    let mut v = vec![0.0];
    for s in steps {
        v.push(v.last().unwrap() + s);
    }
    SampledPath::from_scalar(t, v).unwrap()
}

#[test]
fn linear_driver_quarters() {
    let w = analytic_driver(DriverKind::Linear { slope: 1.0 }, &uniform_grid(0.0, 1.0, 400)).unwrap();
    let seq = greedy_sequence(&w, 0.0, 1.0, 1.0, 0.5, 1.5).unwrap();
    let want = [0.0, 0.25, 0.5, 0.75, 1.0];
    assert_eq!(seq.times.len(), want.len());
    for (a, b) in seq.times.iter().zip(want) {
        assert!((a - b).abs() < 1e-10, "{:?}", seq.times);
    }
}

#[test]
fn constant_driver_count_is_exact() {
    // Only the time term matters: each step has length mu^{1/lambda}.
    let w = SampledPath::constant(uniform_grid(0.0, 2.0, 50), &[3.0]).unwrap();
    for (lambda, mu) in [(1.0, 0.3), (0.75, 0.4), (0.6, 0.9)] {
        let seq = greedy_sequence(&w, 0.0, 2.0, lambda, mu, 1.5).unwrap();
        let expected = (2.0 / mu.powf(1.0 / lambda)).ceil() as usize;
        assert_eq!(seq.interval_count(), expected, "lambda {lambda} mu {mu}");
        let cb = count_bound(&w, Interval::new(0.0, 2.0).unwrap(), lambda, mu, 1.5, 1.5f64.max(1.0 / lambda)).unwrap();
        assert_eq!(cb.actual, expected);
        assert!(cb.holds());
    }
}

#[test]
fn invalid_parameters_error() {
    let w = walk(&[0.1, -0.2]);
    assert!(greedy_sequence(&w, 0.0, 1.0, 0.0, 0.5, 1.5).is_err());
    assert!(greedy_sequence(&w, 0.0, 1.0, 1.0, -1.0, 1.5).is_err());
    assert!(greedy_sequence(&w, 1.0, 0.5, 1.0, 0.5, 1.5).is_err());
    assert!(count_bound(&w, Interval::new(0.0, 1.0).unwrap(), 0.5, 0.5, 1.5, 1.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_meet_budget_and_bound(steps in prop::collection::vec(-0.3f64..0.3, 8..64),
                                   lambda in 0.5f64..1.0, mu in 0.05f64..1.0) {
        let w = walk(&steps);
        let p = 1.5;
        let seq = greedy_sequence(&w, 0.0, 1.0, lambda, mu, p).unwrap();
        prop_assert_eq!(seq.times[0], 0.0);
        prop_assert_eq!(*seq.times.last().unwrap(), 1.0);
        for i in 0..seq.interval_count() {
            let (a, b) = (seq.times[i], seq.times[i + 1]);
            prop_assert!(a < b);
            let k = kappa(&w, a, b, lambda, p).unwrap();
            if seq.is_clamped(i) {
                prop_assert!(k <= mu + 1e-8);
            } else {
                prop_assert!((k - mu).abs() <= 1e-8, "step {i}: {k} vs {mu}");
            }
        }
        let cb = count_bound(&w, Interval::new(0.0, 1.0).unwrap(), lambda, mu, p, p.max(1.0 / lambda)).unwrap();
        prop_assert_eq!(cb.actual, seq.interval_count());
        prop_assert!(cb.holds(), "{:?}", cb);
    }
}
