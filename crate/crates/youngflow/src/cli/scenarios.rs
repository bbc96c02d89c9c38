//! Bundled scenarios.

use super::config::{DriverConfig, ExponentConfig, ExperimentConfig};
use crate::coefficients::FieldSpec;
use crate::solver::SolveOptions;

/// Names of the bundled scenarios, in run order.
pub const SCENARIOS: [&str; 5] = ["zero", "linear-sine", "drift-decay", "bounded-smooth-fbm", "time-varying-sine"];

fn analytic(kind: &str, params: &[f64], horizon: f64, samples: usize) -> DriverConfig {
    DriverConfig {
        kind: kind.into(),
        hurst: None,
        params: params.to_vec(),
        horizon,
        samples,
    }
}

fn field(name: &str, a: f64, b0: f64, c: f64, d0: f64) -> FieldSpec {
    FieldSpec {
        name: name.into(),
        a,
        b0,
        c,
        d0,
        dim: 1,
        noise_dim: 1,
    }
}

/// The bundled scenario called `name`.
pub fn scenario(name: &str) -> Option<ExperimentConfig> {
    let (field, driver, x0, seeds) = match name {
        "zero" => (field("zero", 0.0, 0.0, 0.0, 0.0), analytic("sine", &[1.0], 1.0, 200), 1.0, vec![0]),
        "linear-sine" => (field("linear", 0.0, 0.0, 1.0, 0.0), analytic("sine", &[1.0], 2.0, 2000), 1.0, vec![0]),
        "drift-decay" => (field("linear", -1.0, 0.0, 0.0, 0.0), analytic("sine", &[3.0], 1.0, 1000), 2.0, vec![0]),
        "bounded-smooth-fbm" => (
            field("bounded-smooth", -0.5, 0.2, 0.8, 0.0),
            DriverConfig {
                kind: "fbm".into(),
                hurst: Some(0.75),
                params: Vec::new(),
                horizon: 1.0,
                samples: 512,
            },
            0.5,
            vec![1, 2, 3],
        ),
        "time-varying-sine" => (
            field("time-varying", -0.3, 0.5, 0.6, 0.4),
            analytic("sine", &[2.0], 1.5, 1500),
            -0.5,
            vec![0],
        ),
        _ => return None,
    };
    Some(ExperimentConfig {
        scenario: name.into(),
        field,
        driver,
        exponents: ExponentConfig::default(),
        solve: SolveOptions::default(),
        t0: 0.0,
        x0: vec![x0],
        output: None,
        seeds,
        flow_probes: 2,
    })
}

/// Every bundled scenario.
pub fn all() -> Vec<ExperimentConfig> {
    SCENARIOS.iter().filter_map(|n| scenario(n)).collect()
}
