//! The Cauchy operator `X(t1, t2, ω, ·)`, checks of the two-parameter flow
//! axioms, and non-intersection of trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::coefficients::CoefficientField;
use crate::paths::{norm, p_variation, Interval, SampledPath};
use crate::solver::{continuity_constant, reverse_driver, solve_backward, solve_forward, SolveOptions};
use crate::Result;

fn quiet(opts: &SolveOptions) -> SolveOptions {
    SolveOptions {
        certify: false,
        ..opts.clone()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Value at `t2` of the solution through `x` at `t1`. Solves forward when
/// `t1 < t2`, backward when `t1 > t2`, and returns `x` itself when they are equal.
pub fn cauchy_operator(
    field: &CoefficientField,
    driver: &SampledPath,
    t1: f64,
    t2: f64,
    x: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    if t1 == t2 {
        return Ok(x.to_vec());
    }
    let opts = quiet(opts);
    if t1 < t2 {
        Ok(solve_forward(field, driver, t1, x, t2, &opts)?.final_value().to_vec())
    } else {
        Ok(solve_backward(field, driver, t1, x, t2, &opts)?.solution.first_value().to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCheckReport {
    pub times: (f64, f64, f64),
    /// `max |X(s,s,x) - x|`.
    pub identity_residual: f64,
    /// `max |X(t,s,X(s,t,x)) - x|`.
    pub inversion_residual: f64,
    /// `max |X(u,t,X(s,u,x)) - X(s,t,x)|`.
    pub composition_residual: f64,
    /// `(|δ|, |X(s,t,x+δ) - X(s,t,x)|)` for growing perturbations of the first probe.
    pub continuity_table: Vec<(f64, f64)>,
    pub tol: f64,
    pub ok: bool,
}

/// Perturbation sizes of the continuity table.
pub const CONTINUITY_STEPS: [f64; 3] = [1e-3, 1e-2, 1e-1];

/// Evaluates the flow axioms at `(s, u, t)` on every probe.
pub fn flow_axiom_check(
    field: &CoefficientField,
    driver: &SampledPath,
    times: (f64, f64, f64),
    probes: &[Vec<f64>],
    tol: f64,
    opts: &SolveOptions,
) -> Result<FlowCheckReport> {
    let (s, u, t) = times;
    let x_op = |a: f64, b: f64, x: &[f64]| cauchy_operator(field, driver, a, b, x, opts);
    let rows = probes
        .par_iter()
        .map(|x| {
            let id = dist(&x_op(s, s, x)?, x);
            let xst = x_op(s, t, x)?;
            let inv = dist(&x_op(t, s, &xst)?, x);
            let comp = dist(&x_op(u, t, &x_op(s, u, x)?)?, &xst);
            Ok((id, inv, comp))
        })
        .collect::<Result<Vec<_>>>()?;
    let fold = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let identity_residual = fold(|r| r.0);
    let inversion_residual = fold(|r| r.1);
    let composition_residual = fold(|r| r.2);
    let mut continuity_table = Vec::new();
    if let Some(x) = probes.first() {
        let base = x_op(s, t, x)?;
        for &eps in &CONTINUITY_STEPS {
            let mut xp = x.clone();
            xp[0] += eps;
            continuity_table.push((eps, dist(&x_op(s, t, &xp)?, &base)));
        }
    }
    let ok = identity_residual <= tol && inversion_residual <= tol && composition_residual <= tol;
    Ok(FlowCheckReport {
        times,
        identity_residual,
        inversion_residual,
        composition_residual,
        continuity_table,
        tol,
        ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub min_separation: f64,
    pub floor: f64,
    pub certificate: Certificate,
}

/// Certifies that trajectories from distinct initial values stay apart.
///
/// If two trajectories met at some time, solving backward from there would
/// send both to the same point, yet the backward continuity estimate bounds
/// `|x0 - x0'|` by `2^{N+1}` times their gap. Hence the gap never drops below
/// `|x0 - x0'| / 2^{N+1}`, with `N` the larger of the forward and reversed
/// greedy counts. An explicit `separation_floor` overrides the derived one.
#[allow(clippy::too_many_arguments)]
pub fn non_intersection_check(
    field: &CoefficientField,
    driver: &SampledPath,
    t0: f64,
    x0: &[f64],
    x0_prime: &[f64],
    window: Interval,
    separation_floor: Option<f64>,
    opts: &SolveOptions,
) -> Result<SeparationReport> {
    let opts = quiet(opts);
    let a = solve_forward(field, driver, t0.max(window.lo), x0, window.hi, &opts)?;
    let b = solve_forward(field, driver, t0.max(window.lo), x0_prime, window.hi, &opts)?;
    let gap = a.solution.difference(&b.solution)?;
    let min_separation = (0..gap.len()).map(|i| norm(gap.value(i))).fold(f64::INFINITY, f64::min);
    let win = a.solution.domain();
    let floor = match separation_floor {
        Some(f) => f,
        None => {
            let q = a.exponents.q;
            let qn = |x: &SampledPath| -> Result<f64> { Ok(norm(x.first_value()) + p_variation(x, q, x.domain())?) };
            let radius = qn(&a.solution)?.max(qn(&b.solution)?);
            let fwd = continuity_constant(field, driver, win, radius, &a.exponents, &a.derived)?;
            let rev = reverse_driver(driver, win.lo, win.hi)?;
            let bwd = continuity_constant(
                &field.reversed(win.hi),
                &rev,
                rev.domain(),
                radius,
                &a.exponents,
                &a.derived,
            )?;
            dist(x0, x0_prime) / fwd.factor.max(bwd.factor)
        }
    };
    Ok(SeparationReport {
        min_separation,
        floor,
        certificate: Certificate::check("non-intersection", floor, min_separation, 0.0, (win.lo, win.hi)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{builtin_field, FieldSpec};
    use crate::drivers::{analytic_driver, uniform_grid, DriverKind};

    #[test]
    fn zero_field_flow_is_identity() {
        let w = analytic_driver(DriverKind::Sine { a: 2.0 }, &uniform_grid(0.0, 1.0, 200)).unwrap();
        let f = CoefficientField::zero(2, 1);
        let probes = vec![vec![0.5, -1.0], vec![2.0, 0.0]];
        let r = flow_axiom_check(&f, &w, (0.1, 0.5, 0.9), &probes, 1e-12, &SolveOptions::default()).unwrap();
        assert_eq!(r.identity_residual, 0.0);
        assert_eq!(r.inversion_residual, 0.0);
        assert_eq!(r.composition_residual, 0.0);
        assert!(r.ok);
    }

    #[test]
    fn linear_flow_matches_closed_form_both_ways() {
        let w = analytic_driver(DriverKind::Sine { a: 1.0 }, &uniform_grid(0.0, 2.0, 4000)).unwrap();
        let spec = FieldSpec {
            name: "linear".into(),
            c: 1.0,
            ..FieldSpec::default()
        };
        let f = builtin_field(&spec, 0.75, 1.0, 1.0, 2.0).unwrap();
        let opts = SolveOptions::default();
        let fwd = cauchy_operator(&f, &w, 0.5, 1.5, &[1.0], &opts).unwrap()[0];
        let bwd = cauchy_operator(&f, &w, 1.5, 0.5, &[1.0], &opts).unwrap()[0];
        let e = (1.5f64.sin() - 0.5f64.sin()).exp();
        assert!((fwd - e).abs() < 1e-5);
        assert!((bwd - 1.0 / e).abs() < 1e-5);
    }

    #[test]
    fn separation_of_zero_field() {
        let w = analytic_driver(DriverKind::Linear { slope: 1.0 }, &uniform_grid(0.0, 1.0, 50)).unwrap();
        let f = CoefficientField::zero(1, 1);
        let r = non_intersection_check(
            &f,
            &w,
            0.0,
            &[1.0],
            &[1.25],
            w.domain(),
            None,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(r.min_separation, 0.25);
        assert!(r.certificate.ok);
    }
}
