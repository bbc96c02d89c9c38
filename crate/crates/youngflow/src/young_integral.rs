//! Riemann–Stieltjes sums for Young integrals `∫ x dω`, evaluation under
//! dyadic refinement, and Young–Loève certificates.
//!
//! The integrand is a path of `d × m` matrices stored row-major (dimension
//! `d * m`) and the driver a path in `R^m`; the integral is a vector in `R^d`.
//! Sums run over the union of both sample grids inside the window.

use serde::{Deserialize, Serialize};

use crate::paths::{merge_times, norm, p_variation, p_variation_from, Interval, SampledPath};
use crate::{Error, Result};

/// Tag position inside each partition interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    #[default]
    Left,
    Right,
    Midpoint,
}

/// `θ = 1/p + 1/q` and the Young–Loève constant `K = (1 - 2^{1-θ})^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungConstants {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub k: f64,
}

impl YoungConstants {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0 && q >= 1.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::Parameter(format!("variation exponents must be >= 1, got p = {p}, q = {q}")));
        }
        let theta = 1.0 / p + 1.0 / q;
        if theta <= 1.0 {
            return Err(Error::Regularity(format!("1/p + 1/q = {theta} must exceed 1")));
        }
        let k = 1.0 / (1.0 - 2f64.powf(1.0 - theta));
        Ok(YoungConstants { p, q, theta, k })
    }
}

/// One level of the dyadic refinement table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub partition_size: usize,
    pub value: Vec<f64>,
}

/// Value of a Young integral on the finest grid with its a priori defect bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: Vec<f64>,
    /// Number of partition intervals of the finest grid.
    pub partition_size: usize,
    /// `K |||x|||_{q-var} |||ω|||_{p-var}` over the window.
    pub defect_bound: f64,
    /// Sup-norm distance to the half-resolution sum.
    pub refinement_gap: f64,
    /// False when `refinement_gap >= refine_tol`.
    pub converged: bool,
    /// Values from the finest grid down through successive dyadic coarsenings.
    pub levels: Vec<RefinementLevel>,
}

/// Young–Loève certificate over a window, with the accompanying variation bound
/// `|||∫x dω|||_{p-var} <= |||ω|||_{p-var} (|x_s| + (K+1)|||x|||_{q-var})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungLoeveCertificate {
    pub defect: f64,
    pub bound: f64,
    pub ok: bool,
    pub window: (f64, f64),
    pub variation_lhs: f64,
    pub variation_rhs: f64,
    pub variation_ok: bool,
}

/// Integrand and driver values on a common grid.
struct Grid {
    times: Vec<f64>,
    x: Vec<f64>,
    w: Vec<f64>,
    d: usize,
    m: usize,
}

fn shapes(integrand: &SampledPath, driver: &SampledPath) -> Result<(usize, usize)> {
    let m = driver.dim();
    if !integrand.dim().is_multiple_of(m) {
        return Err(Error::Shape(format!(
            "integrand dimension {} is not a multiple of driver dimension {m}",
            integrand.dim()
        )));
    }
    Ok((integrand.dim() / m, m))
}

fn common_grid(integrand: &SampledPath, driver: &SampledPath, window: Interval) -> Result<Option<Grid>> {
    let (d, m) = shapes(integrand, driver)?;
    let wx = integrand.check_window(window)?;
    let ww = driver.check_window(window)?;
    let lo = wx.lo.max(ww.lo);
    let hi = wx.hi.min(ww.hi);
    if hi <= lo {
        return Ok(None);
    }
    let times = merge_times(integrand.times(), driver.times(), lo, hi);
    let mut x = vec![0.0; times.len() * d * m];
    let mut w = vec![0.0; times.len() * m];
    for (k, &t) in times.iter().enumerate() {
        integrand.eval_into(t, &mut x[k * d * m..(k + 1) * d * m]);
        driver.eval_into(t, &mut w[k * m..(k + 1) * m]);
    }
    Ok(Some(Grid { times, x, w, d, m }))
}

/// Adds `sign * X(tag) (ω_{j} - ω_{i})` to `acc` for grid indices `i < j`.
fn add_term(g: &Grid, i: usize, j: usize, rule: Rule, sign: f64, acc: &mut [f64]) {
    let (d, m) = (g.d, g.m);
    let xi = &g.x[i * d * m..(i + 1) * d * m];
    let xj = &g.x[j * d * m..(j + 1) * d * m];
    for r in 0..d {
        let mut s = 0.0;
        for c in 0..m {
            let dw = sign * (g.w[j * m + c] - g.w[i * m + c]);
            let tag = match rule {
                Rule::Left => xi[r * m + c],
                Rule::Right => xj[r * m + c],
                Rule::Midpoint => 0.5 * (xi[r * m + c] + xj[r * m + c]),
            };
            s += tag * dw;
        }
        acc[r] += s;
    }
}

fn sum_on(g: &Grid, idx: &[usize], rule: Rule) -> Vec<f64> {
    let mut acc = vec![0.0; g.d];
    for w in idx.windows(2) {
        add_term(g, w[0], w[1], rule, 1.0, &mut acc);
    }
    acc
}

/// `Σ x_{ξ_i} (ω_{t_{i+1}} - ω_{t_i})` over the common sample partition of the window.
pub fn rs_sum(integrand: &SampledPath, driver: &SampledPath, window: Interval, rule: Rule) -> Result<Vec<f64>> {
    let (d, _) = shapes(integrand, driver)?;
    match common_grid(integrand, driver, window)? {
        None => Ok(vec![0.0; d]),
        Some(g) => {
            let idx: Vec<usize> = (0..g.times.len()).collect();
            Ok(sum_on(&g, &idx, rule))
        }
    }
}

/// `∫_b^a x dω`: the left-rule sum with every driver increment reversed,
/// which is the exact negation of the forward sum.
pub fn reverse_integral(integrand: &SampledPath, driver: &SampledPath, window: Interval) -> Result<Vec<f64>> {
    let (d, _) = shapes(integrand, driver)?;
    match common_grid(integrand, driver, window)? {
        None => Ok(vec![0.0; d]),
        Some(g) => {
            let mut acc = vec![0.0; d];
            for i in 0..g.times.len() - 1 {
                add_term(&g, i, i + 1, Rule::Left, -1.0, &mut acc);
            }
            Ok(acc)
        }
    }
}

/// Cumulative left-rule integral `t -> ∫_lo^t x dω` on the common grid.
pub fn integral_path(integrand: &SampledPath, driver: &SampledPath, window: Interval) -> Result<SampledPath> {
    let g = common_grid(integrand, driver, window)?
        .ok_or_else(|| Error::Domain("integral path needs a window of positive width".into()))?;
    let n = g.times.len();
    let mut values = vec![0.0; n * g.d];
    let mut acc = vec![0.0; g.d];
    for i in 0..n - 1 {
        add_term(&g, i, i + 1, Rule::Left, 1.0, &mut acc);
        values[(i + 1) * g.d..(i + 2) * g.d].copy_from_slice(&acc);
    }
    SampledPath::from_flat(g.times, values, g.d)
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Left-rule Young integral on the finest common grid, compared against the
/// half-resolution sum. `converged` is false when the two differ by at least
/// `refine_tol` in the sup norm.
pub fn young_integral(
    integrand: &SampledPath,
    driver: &SampledPath,
    window: Interval,
    constants: &YoungConstants,
    refine_tol: f64,
) -> Result<IntegralResult> {
    let (d, _) = shapes(integrand, driver)?;
    if constants.theta <= 1.0 {
        return Err(Error::Regularity(format!("1/p + 1/q = {} must exceed 1", constants.theta)));
    }
    let Some(g) = common_grid(integrand, driver, window)? else {
        return Ok(IntegralResult {
            value: vec![0.0; d],
            partition_size: 1,
            defect_bound: 0.0,
            refinement_gap: 0.0,
            converged: true,
            levels: vec![],
        });
    };
    let n = g.times.len();
    let mut levels = Vec::new();
    let mut stride = 1usize;
    while levels.len() < 8 {
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        levels.push(RefinementLevel {
            partition_size: idx.len() - 1,
            value: sum_on(&g, &idx, Rule::Left),
        });
        if idx.len() <= 2 {
            break;
        }
        stride *= 2;
    }
    let value = levels[0].value.clone();
    let refinement_gap = levels.get(1).map(|l| sup_dist(&value, &l.value)).unwrap_or(0.0);
    let w = Interval::new(g.times[0], g.times[n - 1])?;
    let xq = p_variation(integrand, constants.q, w)?;
    let wp = p_variation(driver, constants.p, w)?;
    Ok(IntegralResult {
        value,
        partition_size: n - 1,
        defect_bound: constants.k * xq * wp,
        refinement_gap,
        converged: refinement_gap < refine_tol,
        levels,
    })
}

/// Certifies `|∫_s^t x dω - x_s(ω_t - ω_s)| <= K |||x|||_{q-var} |||ω|||_{p-var} + 1e-10`
/// on the window, together with the p-variation bound of the integral path.
pub fn young_loeve_check(
    integrand: &SampledPath,
    driver: &SampledPath,
    window: Interval,
    constants: &YoungConstants,
) -> Result<YoungLoeveCertificate> {
    let (d, m) = shapes(integrand, driver)?;
    let Some(g) = common_grid(integrand, driver, window)? else {
        return Ok(YoungLoeveCertificate {
            defect: 0.0,
            bound: 0.0,
            ok: true,
            window: (window.lo, window.hi),
            variation_lhs: 0.0,
            variation_rhs: 0.0,
            variation_ok: true,
        });
    };
    let n = g.times.len();
    let idx: Vec<usize> = (0..n).collect();
    let integral = sum_on(&g, &idx, Rule::Left);
    let mut first = vec![0.0; d];
    add_term(&g, 0, n - 1, Rule::Left, 1.0, &mut first);
    let defect = euclid_dist(&integral, &first);

    let xs = SampledPath::from_flat(g.times.clone(), g.x.clone(), d * m)?;
    let ws = SampledPath::from_flat(g.times.clone(), g.w.clone(), m)?;
    let xq = p_variation_from(&xs, constants.q, 0)?[n - 1];
    let wp = p_variation_from(&ws, constants.p, 0)?[n - 1];
    let bound = constants.k * xq * wp;

    let ip = integral_path(integrand, driver, Interval::new(g.times[0], g.times[n - 1])?)?;
    let variation_lhs = p_variation_from(&ip, constants.p, 0)?[n - 1];
    let variation_rhs = wp * (norm(xs.first_value()) + (constants.k + 1.0) * xq);
    Ok(YoungLoeveCertificate {
        defect,
        bound,
        ok: defect <= bound + 1e-10,
        window: (g.times[0], g.times[n - 1]),
        variation_lhs,
        variation_rhs,
        variation_ok: variation_lhs <= variation_rhs + 1e-10,
    })
}

/// Euclidean distance of two vectors.
fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    #[test]
    fn constants_for_four_thirds() {
        let c = YoungConstants::new(4.0 / 3.0, 4.0 / 3.0).unwrap();
        assert!((c.theta - 1.5).abs() < 1e-15);
        assert!((c.k - 1.0 / (1.0 - 2f64.powf(-0.5))).abs() < 1e-12);
        assert!((c.k - 3.414_213_562_373_095).abs() < 1e-9);
        assert!(matches!(YoungConstants::new(2.0, 2.0), Err(Error::Regularity(_))));
    }

    #[test]
    fn unit_integrand_telescopes() {
        let t = uniform(50, 0.0, 1.0);
        let w = SampledPath::from_fn(t.clone(), 1, |s| vec![(5.0 * s).sin() * s]).unwrap();
        let one = SampledPath::constant(t, &[1.0]).unwrap();
        for rule in [Rule::Left, Rule::Right, Rule::Midpoint] {
            let v = rs_sum(&one, &w, w.domain(), rule).unwrap();
            assert_eq!(v[0], w.last_value()[0] - w.first_value()[0]);
        }
    }

    #[test]
    fn zero_driver_gives_zero() {
        let t = uniform(10, 0.0, 1.0);
        let w = SampledPath::constant(t.clone(), &[0.0]).unwrap();
        let x = SampledPath::from_fn(t, 1, |s| vec![s.exp()]).unwrap();
        assert_eq!(rs_sum(&x, &w, w.domain(), Rule::Left).unwrap(), vec![0.0]);
    }

    #[test]
    fn identity_against_identity_is_one_half() {
        let t = uniform(20_000, 0.0, 1.0);
        let x = SampledPath::from_scalar(t.clone(), t.clone()).unwrap();
        let c = YoungConstants::new(1.0, 1.0).unwrap();
        let r = young_integral(&x, &x, x.domain(), &c, 1e-4).unwrap();
        assert!((r.value[0] - 0.5).abs() < 1e-4);
        assert!(r.converged);
        assert_eq!(r.partition_size, 20_000);
    }

    #[test]
    fn constant_integrand_is_exact_at_every_level() {
        let t = uniform(64, 0.0, 2.0);
        let w = SampledPath::from_fn(t.clone(), 1, |s| vec![s * s - s]).unwrap();
        let x = SampledPath::constant(t, &[3.0]).unwrap();
        let c = YoungConstants::new(1.5, 1.5).unwrap();
        let r = young_integral(&x, &w, w.domain(), &c, 1e-12).unwrap();
        let exact = 3.0 * (w.last_value()[0] - w.first_value()[0]);
        for level in &r.levels {
            assert!((level.value[0] - exact).abs() < 1e-13);
        }
        assert_eq!(r.defect_bound, 0.0);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let t = uniform(4, 0.0, 1.0);
        let x = SampledPath::constant(t.clone(), &[1.0, 2.0, 3.0]).unwrap();
        let w = SampledPath::constant(t, &[0.0, 1.0]).unwrap();
        assert!(matches!(rs_sum(&x, &w, w.domain(), Rule::Left), Err(Error::Shape(_))));
    }

    #[test]
    fn matrix_integrand_contracts_against_driver() {
        let t = uniform(2, 0.0, 1.0);
        // X = [[1, 2], [0, -1]] constant, ω goes from (0,0) to (1,3).
        let x = SampledPath::constant(t.clone(), &[1.0, 2.0, 0.0, -1.0]).unwrap();
        let w = SampledPath::new(t, vec![vec![0.0, 0.0], vec![0.5, 1.0], vec![1.0, 3.0]]).unwrap();
        let v = rs_sum(&x, &w, w.domain(), Rule::Left).unwrap();
        assert_eq!(v, vec![7.0, -3.0]);
    }

    #[test]
    fn reversal_on_zero_width_window() {
        let t = uniform(4, 0.0, 1.0);
        let x = SampledPath::from_scalar(t.clone(), t.clone()).unwrap();
        let v = reverse_integral(&x, &x, Interval::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(v, vec![0.0]);
    }

    #[test]
    fn constant_integrand_has_zero_defect() {
        let t = uniform(30, 0.0, 1.0);
        let w = SampledPath::from_fn(t.clone(), 1, |s| vec![(7.0 * s).cos()]).unwrap();
        let x = SampledPath::constant(t, &[2.0]).unwrap();
        let c = YoungConstants::new(1.5, 2.0).unwrap();
        let cert = young_loeve_check(&x, &w, w.domain(), &c).unwrap();
        assert!(cert.defect < 1e-14);
        assert!(cert.ok && cert.variation_ok);
    }
}
