//! Coefficient fields `(f, g)` with their hypothesis constants, exponent
//! selection, derived constants and the composition bounds used by the solver.
//!
//! A field carries user-declared constants: the Lipschitz constant `L_g` of
//! `g`, the local Hölder constant `M_N` of `∂_x g`, the local Lipschitz
//! constant `L_N` of `f`, the linear growth data `|f(t,x)| <= a|x| + b(t)` and
//! the time modulus `h(s,t) = L_h (t - s)`. [`probe_hypotheses`] spot-checks
//! the declarations on random points.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::paths::{norm, p_variation, Interval, SampledPath};
use crate::young_integral::YoungConstants;
use crate::{Error, Result};

/// `(t, x) -> vector`.
pub type StateFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
/// Radius `N` to a constant valid on the ball `|x| <= N`.
pub type RadiusFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `t -> value`.
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift `f: [0,T] x R^d -> R^d` and diffusion `g: [0,T] x R^d -> R^{d x m}`
/// with the constants of their hypotheses.
#[derive(Clone)]
pub struct CoefficientField {
    pub name: String,
    pub dim: usize,
    pub noise_dim: usize,
    pub f: StateFn,
    /// Row-major `d x m` matrix.
    pub g: StateFn,
    /// Entry `(i * m + j) * d + k` is `∂g_ij / ∂x_k`.
    pub g_x: StateFn,
    pub lipschitz_g: f64,
    pub holder_gx: RadiusFn,
    pub lipschitz_f: RadiusFn,
    pub growth_a: f64,
    pub growth_b: TimeFn,
    /// `L_h` in `h(s, t) = L_h (t - s)`.
    pub time_modulus: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("noise_dim", &self.noise_dim)
            .field("lipschitz_g", &self.lipschitz_g)
            .field("growth_a", &self.growth_a)
            .field("time_modulus", &self.time_modulus)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("delta", &self.delta)
            .finish()
    }
}

impl CoefficientField {
    pub fn eval_f(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.f)(t, x)
    }

    pub fn eval_g(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.g)(t, x)
    }

    pub fn eval_gx(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.g_x)(t, x)
    }

    /// Time modulus `h(s, t)`.
    pub fn h(&self, s: f64, t: f64) -> f64 {
        self.time_modulus * (t - s).abs()
    }

    /// `||b||_{L_r[0, T]}` with `r = 1 / (1 - α)`, by composite Simpson quadrature.
    pub fn b_norm(&self, horizon: f64) -> f64 {
        let r = 1.0 / (1.0 - self.alpha);
        let n = 4096;
        let step = horizon / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * (self.growth_b)(k as f64 * step).abs().powf(r);
        }
        (s * step / 3.0).powf(1.0 / r)
    }

    /// `M = max{L_g, a T^{1-α}, |g(0,0)| + h(0,T)^β, ||b||}`, the Young constant
    /// for `(p, q0)` and `μ* = 1 / (2 M (K + 2))`.
    pub fn derived(&self, horizon: f64, exps: &ExponentSet) -> Result<DerivedConstants> {
        if !(horizon > 0.0) {
            return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
        }
        let young = YoungConstants::new(exps.p, exps.q0)?;
        let g00 = norm(&self.eval_g(0.0, &vec![0.0; self.dim]));
        let m = self
            .lipschitz_g
            .max(self.growth_a * horizon.powf(1.0 - self.alpha))
            .max(g00 + self.h(0.0, horizon).powf(self.beta))
            .max(self.b_norm(horizon));
        let mu_star = if m > 0.0 {
            1.0 / (2.0 * m * (young.k + 2.0))
        } else {
            f64::INFINITY
        };
        Ok(DerivedConstants {
            horizon,
            m,
            k: young.k,
            theta: young.theta,
            mu_star,
        })
    }

    /// `M'_N = max{L_N, M_N, M}`.
    pub fn m_prime(&self, radius: f64, derived: &DerivedConstants) -> f64 {
        (self.lipschitz_f)(radius).max((self.holder_gx)(radius)).max(derived.m)
    }

    /// The field after the change of time `u = T - t` that turns the inverse
    /// problem into a forward one: `f^(u,x) = -f(T-u,x)`, `g^(u,x) = g(T-u,x)`.
    ///
    /// With the driver reversed as `ω^(u) = ω(T-u)`, a forward solution of the
    /// transformed equation retraces the original trajectory backwards.
    pub fn reversed(&self, terminal: f64) -> CoefficientField {
        let (f, g, gx, b) = (
            self.f.clone(),
            self.g.clone(),
            self.g_x.clone(),
            self.growth_b.clone(),
        );
        CoefficientField {
            name: format!("{}-reversed", self.name),
            f: Arc::new(move |u, x| f(terminal - u, x).into_iter().map(|v| -v).collect()),
            g: Arc::new(move |u, x| g(terminal - u, x)),
            g_x: Arc::new(move |u, x| gx(terminal - u, x)),
            growth_b: Arc::new(move |u| b(terminal - u)),
            ..self.clone()
        }
    }

    /// A field with `f = 0` and `g = 0`.
    pub fn zero(dim: usize, noise_dim: usize) -> CoefficientField {
        let spec = FieldSpec {
            name: "zero".into(),
            dim,
            noise_dim,
            ..FieldSpec::default()
        };
        linear_field(&spec, 0.75, 1.0, 1.0)
    }
}

/// Derived constants of a field on a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub horizon: f64,
    pub m: f64,
    /// Young–Loève constant for `θ = 1/p + 1/q0`.
    pub k: f64,
    pub theta: f64,
    pub mu_star: f64,
}

/// Variation exponents of the existence theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub p: f64,
    pub q0: f64,
    pub q: f64,
    pub p_prime: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

/// Picks `q0` and `q` for driver exponent `p` and field exponents `(α, β, δ)`.
///
/// `1/q0` is the midpoint of `(1 - 1/p, min{β, δα, δ/p, 1/2})` and `1/q` the
/// midpoint of `[1/(q0 δ), min{α, 1/p})`. Every required relation is then
/// verified; a failure names the violated inequality.
pub fn select_exponents(p: f64, alpha: f64, beta: f64, delta: f64) -> Result<ExponentSet> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::Parameter(format!("p must lie in (1, 2), got {p}")));
    }
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [1/2, 1), got {alpha}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Parameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    let gap = 1.0 - 1.0 / p;
    if !(delta > p - 1.0) {
        return Err(Error::Infeasible(format!("delta > p - 1 fails: {delta} <= {}", p - 1.0)));
    }
    if !(beta > gap) {
        return Err(Error::Infeasible(format!("beta > 1 - 1/p fails: {beta} <= {gap}")));
    }
    if !(delta * alpha > gap) {
        return Err(Error::Infeasible(format!(
            "delta * alpha > 1 - 1/p fails: {} <= {gap}",
            delta * alpha
        )));
    }
    let hi0 = beta.min(delta * alpha).min(delta / p).min(0.5);
    if !(gap < hi0) {
        return Err(Error::Infeasible(format!(
            "1 - 1/p < min(beta, delta*alpha, delta/p, 1/2) fails: {gap} >= {hi0}"
        )));
    }
    let inv_q0 = 0.5 * (gap + hi0);
    let lo1 = inv_q0 / delta;
    let hi1 = alpha.min(1.0 / p);
    if !(lo1 < hi1) {
        return Err(Error::Infeasible(format!(
            "1/(q0 delta) < min(alpha, 1/p) fails: {lo1} >= {hi1}"
        )));
    }
    let inv_q = 0.5 * (lo1 + hi1);
    let (q0, q) = (1.0 / inv_q0, 1.0 / inv_q);
    let checks = [
        (1.0 / p + 1.0 / q0 > 1.0, "1/p + 1/q0 > 1"),
        (q0 * beta > 1.0, "q0 * beta > 1"),
        (q0 >= q0 * delta, "q0 >= q0 * delta"),
        (q0 * delta >= q, "q0 * delta >= q"),
        (q > p, "q > p"),
        (q * alpha > 1.0, "q * alpha > 1"),
    ];
    if let Some((_, name)) = checks.iter().find(|(ok, _)| !ok) {
        return Err(Error::Infeasible(format!("{name} fails for q0 = {q0}, q = {q}")));
    }
    Ok(ExponentSet {
        p,
        q0,
        q,
        p_prime: p.max(1.0 / alpha),
        alpha,
        beta,
        delta,
    })
}

/// Parameters of a built-in field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b0: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub d0: f64,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default = "one")]
    pub noise_dim: usize,
}

fn one() -> usize {
    1
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            name: "linear".into(),
            a: 0.0,
            b0: 0.0,
            c: 0.0,
            d0: 0.0,
            dim: 1,
            noise_dim: 1,
        }
    }
}

/// Names accepted by [`builtin_field`].
pub const BUILTIN_FIELDS: [&str; 4] = ["zero", "linear", "bounded-smooth", "time-varying"];

/// Builds a named field for exponents `(α, β, δ)` on `[0, horizon]`.
///
/// * `linear`: `f_i = a x_i + b0`, `g_ij = c x_i + d0`.
/// * `bounded-smooth`: `f_i = a tanh(x_i) + b0`, `g_ij = c (cos(x_i) + tanh(x_i)) / 2`.
/// * `time-varying`: `f_i = a x_i + b0 sin t`, `g_ij = c tanh(x_i) + d0 sin t`.
pub fn builtin_field(spec: &FieldSpec, alpha: f64, beta: f64, delta: f64, horizon: f64) -> Result<CoefficientField> {
    if spec.dim == 0 || spec.noise_dim == 0 {
        return Err(Error::Parameter("field dimensions must be positive".into()));
    }
    let finite = [spec.a, spec.b0, spec.c, spec.d0].iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::Parameter("field parameters must be finite".into()));
    }
    match spec.name.as_str() {
        "zero" => Ok(CoefficientField::zero(spec.dim, spec.noise_dim)),
        "linear" => Ok(linear_field(spec, alpha, beta, delta)),
        "bounded-smooth" => Ok(bounded_smooth_field(spec, alpha, beta, delta)),
        "time-varying" => Ok(time_varying_field(spec, alpha, beta, delta, horizon)),
        other => Err(Error::Parameter(format!(
            "unknown field `{other}`; expected one of {}",
            BUILTIN_FIELDS.join(", ")
        ))),
    }
}

/// `M_N` for a `g_x` that is Lipschitz with constant `lip`: on `|x|, |y| <= N`,
/// `lip |x - y| <= lip (2N)^{1-δ} |x - y|^δ`.
fn holder_from_lipschitz(lip: f64, delta: f64) -> RadiusFn {
    Arc::new(move |n: f64| if lip == 0.0 { 0.0 } else { lip * (2.0 * n).powf(1.0 - delta) })
}

/// `L_h` such that `κ (t - s) <= (L_h (t - s))^β` whenever `t - s <= horizon`.
fn time_modulus_for(kappa: f64, beta: f64, horizon: f64) -> f64 {
    if kappa == 0.0 {
        0.0
    } else {
        (kappa * horizon.powf(1.0 - beta)).powf(1.0 / beta)
    }
}

/// `∂g_ij/∂x_k = δ_ik φ'(x_i)` for `g_ij = c φ(x_i) + const`.
fn diagonal_gx(d: usize, m: usize, x: &[f64], dphi: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; d * m * d];
    for i in 0..d {
        let v = dphi(x[i]);
        for j in 0..m {
            out[(i * m + j) * d + i] = v;
        }
    }
    out
}

fn linear_field(spec: &FieldSpec, alpha: f64, beta: f64, delta: f64) -> CoefficientField {
    let (d, m) = (spec.dim, spec.noise_dim);
    let FieldSpec { a, b0, c, d0, .. } = *spec;
    let (sd, sm) = ((d as f64).sqrt(), (m as f64).sqrt());
    CoefficientField {
        name: spec.name.clone(),
        dim: d,
        noise_dim: m,
        f: Arc::new(move |_, x| x.iter().map(|xi| a * xi + b0).collect()),
        g: Arc::new(move |_, x| x.iter().flat_map(|xi| std::iter::repeat_n(c * xi + d0, m)).collect()),
        g_x: Arc::new(move |_, x| diagonal_gx(d, m, x, |_| c)),
        lipschitz_g: c.abs() * sm,
        holder_gx: Arc::new(|_| 0.0),
        lipschitz_f: Arc::new(move |_| a.abs()),
        growth_a: a.abs(),
        growth_b: Arc::new(move |_| b0.abs() * sd),
        time_modulus: 0.0,
        alpha,
        beta,
        delta,
    }
}

fn bounded_smooth_field(spec: &FieldSpec, alpha: f64, beta: f64, delta: f64) -> CoefficientField {
    let (d, m) = (spec.dim, spec.noise_dim);
    let FieldSpec { a, b0, c, .. } = *spec;
    let (sd, sm) = ((d as f64).sqrt(), (m as f64).sqrt());
    // φ = (cos + tanh)/2: |φ'| <= 1 and |φ''| <= 1/2 + 4/(3√3)/2 < 0.9.
    let phi = |x: f64| 0.5 * (x.cos() + x.tanh());
    let dphi = |x: f64| 0.5 * (-x.sin() + 1.0 / x.cosh().powi(2));
    CoefficientField {
        name: spec.name.clone(),
        dim: d,
        noise_dim: m,
        f: Arc::new(move |_, x| x.iter().map(|xi| a * xi.tanh() + b0).collect()),
        g: Arc::new(move |_, x| x.iter().flat_map(|xi| std::iter::repeat_n(c * phi(*xi), m)).collect()),
        g_x: Arc::new(move |_, x| diagonal_gx(d, m, x, |v| c * dphi(v))),
        lipschitz_g: c.abs() * sm,
        holder_gx: holder_from_lipschitz(0.9 * c.abs() * sm, delta),
        lipschitz_f: Arc::new(move |_| a.abs()),
        growth_a: a.abs(),
        growth_b: Arc::new(move |_| b0.abs() * sd),
        time_modulus: 0.0,
        alpha,
        beta,
        delta,
    }
}

fn time_varying_field(spec: &FieldSpec, alpha: f64, beta: f64, delta: f64, horizon: f64) -> CoefficientField {
    let (d, m) = (spec.dim, spec.noise_dim);
    let FieldSpec { a, b0, c, d0, .. } = *spec;
    let (sd, sm) = ((d as f64).sqrt(), (m as f64).sqrt());
    // (sech^2)' = -2 sech^2 tanh is bounded by 4/(3√3) < 0.77.
    let sech2 = |x: f64| 1.0 / x.cosh().powi(2);
    CoefficientField {
        name: spec.name.clone(),
        dim: d,
        noise_dim: m,
        f: Arc::new(move |t, x| x.iter().map(|xi| a * xi + b0 * t.sin()).collect()),
        g: Arc::new(move |t, x| {
            x.iter()
                .flat_map(|xi| std::iter::repeat_n(c * xi.tanh() + d0 * t.sin(), m))
                .collect()
        }),
        g_x: Arc::new(move |_, x| diagonal_gx(d, m, x, |v| c * sech2(v))),
        lipschitz_g: c.abs() * sm,
        holder_gx: holder_from_lipschitz(0.77 * c.abs() * sm, delta),
        lipschitz_f: Arc::new(move |_| a.abs()),
        growth_a: a.abs(),
        growth_b: Arc::new(move |t| b0.abs() * sd * t.sin().abs()),
        time_modulus: time_modulus_for(d0.abs() * (d as f64 * m as f64).sqrt(), beta, horizon),
        alpha,
        beta,
        delta,
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Worst observed ratio for each hypothesis; each holds when `ok` is true.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probes: usize,
    pub radius: f64,
    pub lipschitz_g_ok: bool,
    pub holder_gx_ok: bool,
    pub time_regularity_ok: bool,
    pub lipschitz_f_ok: bool,
    pub growth_f_ok: bool,
    pub growth_g_ok: bool,
    /// Largest excess `lhs - rhs` over all checks.
    pub worst_excess: f64,
}

impl ProbeReport {
    pub fn ok(&self) -> bool {
        self.lipschitz_g_ok
            && self.holder_gx_ok
            && self.time_regularity_ok
            && self.lipschitz_f_ok
            && self.growth_f_ok
            && self.growth_g_ok
    }
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-radius..=radius)).collect();
        if norm(&v) <= radius {
            return v;
        }
    }
}

/// Spot-checks the declared constants on `probes` random points of
/// `[0, horizon] x {|x| <= radius}` (tolerance 1e-9).
pub fn probe_hypotheses(
    field: &CoefficientField,
    horizon: f64,
    exps: &ExponentSet,
    radius: f64,
    probes: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let derived = field.derived(horizon, exps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-9;
    let d = field.dim;
    let mut worst = f64::NEG_INFINITY;
    let mut flags = [true; 6];
    let mut record = |k: usize, lhs: f64, rhs: f64, worst: &mut f64| {
        let excess = lhs - rhs;
        if excess > *worst {
            *worst = excess;
        }
        if excess > tol * (1.0 + rhs.abs()) {
            flags[k] = false;
        }
    };
    for _ in 0..probes {
        let t = rng.gen_range(0.0..=horizon);
        let s = rng.gen_range(0.0..=horizon);
        let x = random_point(&mut rng, d, radius);
        let y = random_point(&mut rng, d, radius);
        let dxy = dist(&x, &y);
        record(0, dist(&field.eval_g(t, &x), &field.eval_g(t, &y)), field.lipschitz_g * dxy, &mut worst);
        record(
            1,
            dist(&field.eval_gx(t, &x), &field.eval_gx(t, &y)),
            (field.holder_gx)(radius) * dxy.powf(field.delta),
            &mut worst,
        );
        let time_lhs = dist(&field.eval_g(t, &x), &field.eval_g(s, &x)) + dist(&field.eval_gx(t, &x), &field.eval_gx(s, &x));
        record(2, time_lhs, field.h(s, t).powf(field.beta), &mut worst);
        record(3, dist(&field.eval_f(t, &x), &field.eval_f(t, &y)), (field.lipschitz_f)(radius) * dxy, &mut worst);
        record(4, norm(&field.eval_f(t, &x)), field.growth_a * norm(&x) + (field.growth_b)(t), &mut worst);
        record(5, norm(&field.eval_g(t, &x)), derived.m * (1.0 + norm(&x)), &mut worst);
    }
    Ok(ProbeReport {
        probes,
        radius,
        lipschitz_g_ok: flags[0],
        holder_gx_ok: flags[1],
        time_regularity_ok: flags[2],
        lipschitz_f_ok: flags[3],
        growth_f_ok: flags[4],
        growth_g_ok: flags[5],
        worst_excess: worst,
    })
}

/// The path `t -> g(t, x_t)` on the samples of `x`.
pub fn compose_g(field: &CoefficientField, x: &SampledPath) -> Result<SampledPath> {
    x.map(field.dim * field.noise_dim, |t, v| field.eval_g(t, v))
}

/// Certifies `|||g(., x.)|||_{q0-var} <= M (1 + |||x|||_{q-var})` on the window.
pub fn composed_variation_bound(
    field: &CoefficientField,
    path: &SampledPath,
    window: Interval,
    exps: &ExponentSet,
    derived: &DerivedConstants,
) -> Result<Certificate> {
    let w = path.check_window(window)?;
    if w.is_degenerate() {
        return Ok(Certificate::check("composed-variation", 0.0, derived.m, 0.0, (w.lo, w.hi)));
    }
    let x = path.restrict(w)?;
    let gx = compose_g(field, &x)?;
    let lhs = p_variation(&gx, exps.q0, gx.domain())?;
    let rhs = derived.m * (1.0 + p_variation(&x, exps.q, x.domain())?);
    Ok(Certificate::check("composed-variation", lhs, rhs, 1e-10, (w.lo, w.hi)))
}

/// Certifies the linear growth `|g(t, x)| <= M (1 + |x|)` on random probes.
pub fn growth_bound_probe(
    field: &CoefficientField,
    derived: &DerivedConstants,
    radius: f64,
    probes: usize,
    seed: u64,
) -> Certificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_ratio = 0.0_f64;
    let mut ok = true;
    for _ in 0..probes {
        let t = rng.gen_range(0.0..=derived.horizon);
        let x = random_point(&mut rng, field.dim, radius);
        let lhs = norm(&field.eval_g(t, &x));
        let rhs = derived.m * (1.0 + norm(&x));
        if lhs > rhs + 1e-10 {
            ok = false;
        }
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        } else if lhs > 0.0 {
            worst_ratio = f64::INFINITY;
        }
    }
    Certificate {
        name: "growth-g".into(),
        lhs: worst_ratio,
        rhs: 1.0,
        ok,
        window: (0.0, derived.horizon),
    }
}

/// Certifies
/// `|||g(.,x) - g(.,y)|||_{q0-var} <= M'_N |||x - y|||_{q-var} (2 + |||x|||^δ_{q-var} + |||y|||^δ_{q-var})`
/// for paths starting at the same point, with `N` bounding both sup norms.
pub fn composed_difference_bound(
    field: &CoefficientField,
    x: &SampledPath,
    y: &SampledPath,
    window: Interval,
    exps: &ExponentSet,
    derived: &DerivedConstants,
    radius: f64,
) -> Result<Certificate> {
    let w = x.check_window(window)?;
    let w = y.check_window(w)?;
    if dist(&x.eval(w.lo), &y.eval(w.lo)) > 1e-12 {
        return Err(Error::Precondition(format!("paths must agree at t = {}", w.lo)));
    }
    if w.is_degenerate() {
        return Ok(Certificate::check("composed-difference", 0.0, 0.0, 0.0, (w.lo, w.hi)));
    }
    let xr = x.restrict(w)?;
    let yr = y.restrict(w)?;
    if xr.sup_norm() > radius * (1.0 + 1e-12) || yr.sup_norm() > radius * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("sup norms exceed the radius N = {radius}")));
    }
    let gx = compose_g(field, &xr)?;
    let gy = compose_g(field, &yr)?;
    let lhs = p_variation(&gx.difference(&gy)?, exps.q0, w)?;
    let diff = p_variation(&xr.difference(&yr)?, exps.q, w)?;
    let vx = p_variation(&xr, exps.q, w)?;
    let vy = p_variation(&yr, exps.q, w)?;
    let rhs = field.m_prime(radius, derived) * diff * (2.0 + vx.powf(exps.delta) + vy.powf(exps.delta));
    Ok(Certificate::check("composed-difference", lhs, rhs, 1e-10, (w.lo, w.hi)))
}

/// Checks the four-point inequality
/// `|g(s,x1) - g(s,x3) - g(t,x2) + g(t,x4)| <= L_g|x1-x2-x3+x4| + |x2-x4| h(s,t)^β
///  + M_N |x2-x4| (|x1-x2|^δ + |x3-x4|^δ)` on random quadruples with `|x_i| <= N`.
pub fn four_point_probe(
    field: &CoefficientField,
    horizon: f64,
    radius: f64,
    probes: usize,
    seed: u64,
) -> Certificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = field.dim;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..probes {
        let mut s = rng.gen_range(0.0..=horizon);
        let mut t = rng.gen_range(0.0..=horizon);
        if s > t {
            std::mem::swap(&mut s, &mut t);
        }
        let x1 = random_point(&mut rng, d, radius);
        let x2 = random_point(&mut rng, d, radius);
        // Half of the probes use nearby states, where the Hölder term is tight.
        let near = rng.gen_bool(0.5);
        let pick = |rng: &mut ChaCha8Rng, base: &[f64]| -> Vec<f64> {
            if near {
                let v: Vec<f64> = base.iter().map(|b| b + rng.gen_range(-0.05..0.05)).collect();
                let n = norm(&v);
                if n > radius {
                    v.iter().map(|c| c * radius / n).collect()
                } else {
                    v
                }
            } else {
                random_point(rng, d, radius)
            }
        };
        let x3 = pick(&mut rng, &x1);
        let x4 = pick(&mut rng, &x2);
        let g = |t: f64, x: &[f64]| field.eval_g(t, x);
        let (a, b, c, e) = (g(s, &x1), g(s, &x3), g(t, &x2), g(t, &x4));
        let lhs = norm(&a.iter().zip(&b).zip(&c).zip(&e).map(|(((a, b), c), e)| a - b - c + e).collect::<Vec<_>>());
        let mixed: Vec<f64> = (0..d).map(|k| x1[k] - x2[k] - x3[k] + x4[k]).collect();
        let d24 = dist(&x2, &x4);
        let rhs = field.lipschitz_g * norm(&mixed)
            + d24 * field.h(s, t).powf(field.beta)
            + (field.holder_gx)(radius) * d24 * (dist(&x1, &x2).powf(field.delta) + dist(&x3, &x4).powf(field.delta));
        worst = worst.max(lhs - rhs);
    }
    Certificate {
        name: "four-point".into(),
        lhs: worst.max(0.0),
        rhs: 0.0,
        ok: worst <= 1e-9,
        window: (0.0, horizon),
    }
}
