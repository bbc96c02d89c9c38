//! Forward and backward solution of
//! `x_t = x_{t0} + ∫ f(s, x_s) ds + ∫ g(s, x_s) dω_s`
//! by Picard iteration on greedy intervals, plus the bound certificates that
//! accompany a solve.
//!
//! The computational grid is the driver's sample grid on `[t0, T]` unless
//! [`SolveOptions::grid`] is set. On each interval the discrete map `F` uses
//! the trapezoid rule for both the drift and the Young term, so its fixed
//! point is second-order accurate for smooth drivers.

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::coefficients::{select_exponents, CoefficientField, DerivedConstants, ExponentSet};
use crate::greedy::{greedy_sequence, GreedySequence};
use crate::paths::{norm, p_variation, p_variation_from, pvar_profile, ControlFunction, Interval, SampledPath};
use crate::young_integral::{young_loeve_check, YoungConstants};
use crate::{Error, Result};

/// Recursion cap for interval shrinking.
pub const MAX_SHRINK_DEPTH: usize = 20;
/// Extra Picard steps taken after convergence while the change keeps shrinking.
const POLISH_STEPS: usize = 12;
/// Number of left endpoints sampled by the Gronwall checks.
const GRONWALL_ANCHORS: usize = 24;

/// Initial iterate of the Picard loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    /// The constant path at the initial value.
    #[default]
    Constant,
    /// The explicit Euler path from the initial value.
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub shrink_factor: f64,
    /// Output grid; defaults to the driver samples in `[t0, T]`.
    pub grid: Option<Vec<f64>>,
    pub mu_override: Option<f64>,
    /// Driver variation exponent used for exponent selection.
    pub p: f64,
    pub warm_start: WarmStart,
    /// Emit Gronwall, growth and Young–Loève certificates.
    pub certify: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            picard_tol: 1e-10,
            picard_max_iters: 50,
            shrink_factor: 0.5,
            grid: None,
            mu_override: None,
            p: 1.5,
            warm_start: WarmStart::Constant,
            certify: true,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0) {
            return Err(Error::Parameter(format!("picard_tol must be positive, got {}", self.picard_tol)));
        }
        if self.picard_max_iters == 0 {
            return Err(Error::Parameter("picard_max_iters must be positive".into()));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::Parameter(format!("shrink_factor must lie in (0, 1), got {}", self.shrink_factor)));
        }
        if let Some(mu) = self.mu_override {
            if !(mu > 0.0) {
                return Err(Error::Parameter(format!("mu_override must be positive, got {mu}")));
            }
        }
        Ok(())
    }
}

/// Outcome of the Picard loop on one computational interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub lo: f64,
    pub hi: f64,
    pub iters: usize,
    /// `sup |x - F(x)|` of the returned iterate.
    pub residual: f64,
    /// Every iterate satisfied `|x_lo| + |||x|||_{q-var} <= 2|x_lo| + 1`.
    pub ball_ok: bool,
    /// Number of halvings that produced this interval.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: SampledPath,
    /// Exact greedy times with `λ = α` and the budget `mu`.
    pub greedy: GreedySequence,
    pub intervals: Vec<IntervalReport>,
    pub iters_per_interval: Vec<usize>,
    pub fixed_point_residuals: Vec<f64>,
    pub certificates: Vec<Certificate>,
    pub exponents: ExponentSet,
    pub derived: DerivedConstants,
    pub mu: f64,
}

impl SolveReport {
    pub fn certificates_ok(&self) -> bool {
        self.certificates.iter().all(|c| c.ok)
    }

    pub fn certificate(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name)
    }

    /// True when every certificate whose name starts with `prefix` holds.
    pub fn family_ok(&self, prefix: &str) -> bool {
        self.certificates.iter().filter(|c| c.name.starts_with(prefix)).all(|c| c.ok)
    }

    pub fn max_iters(&self) -> usize {
        self.iters_per_interval.iter().copied().max().unwrap_or(0)
    }

    pub fn max_residual(&self) -> f64 {
        self.fixed_point_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn ball_ok(&self) -> bool {
        self.intervals.iter().all(|r| r.ball_ok)
    }

    pub fn final_value(&self) -> &[f64] {
        self.solution.last_value()
    }
}

/// `F(x)` together with its drift part `I(x)` and Young part `J(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FMap {
    pub value: SampledPath,
    pub drift: SampledPath,
    pub young: SampledPath,
}

/// Driver and state data on a computational grid.
struct Grid<'a> {
    field: &'a CoefficientField,
    times: Vec<f64>,
    omega: Vec<f64>,
    d: usize,
    m: usize,
}

impl<'a> Grid<'a> {
    fn new(field: &'a CoefficientField, driver: &SampledPath, times: Vec<f64>) -> Self {
        let m = driver.dim();
        let mut omega = vec![0.0; times.len() * m];
        for (k, &t) in times.iter().enumerate() {
            driver.eval_into(t, &mut omega[k * m..(k + 1) * m]);
        }
        Grid {
            field,
            times,
            omega,
            d: field.dim,
            m,
        }
    }

    /// Writes the per-step increments of `I` and `J` for `x` on samples `a..=b`.
    fn increments(&self, a: usize, x: &[f64], drift: &mut [f64], young: &mut [f64]) {
        let (d, m) = (self.d, self.m);
        let n = x.len() / d;
        let mut f_prev = self.field.eval_f(self.times[a], &x[..d]);
        let mut g_prev = self.field.eval_g(self.times[a], &x[..d]);
        for k in 0..n - 1 {
            let t1 = self.times[a + k + 1];
            let f_next = self.field.eval_f(t1, &x[(k + 1) * d..(k + 2) * d]);
            let g_next = self.field.eval_g(t1, &x[(k + 1) * d..(k + 2) * d]);
            let dt = t1 - self.times[a + k];
            let w0 = &self.omega[(a + k) * m..(a + k + 1) * m];
            let w1 = &self.omega[(a + k + 1) * m..(a + k + 2) * m];
            for i in 0..d {
                drift[k * d + i] = 0.5 * (f_prev[i] + f_next[i]) * dt;
                let mut s = 0.0;
                for j in 0..m {
                    s += 0.5 * (g_prev[i * m + j] + g_next[i * m + j]) * (w1[j] - w0[j]);
                }
                young[k * d + i] = s;
            }
            f_prev = f_next;
            g_prev = g_next;
        }
    }

    /// `out = F(x)` on samples `a..=b`, starting from `x0`.
    fn apply(&self, a: usize, x0: &[f64], x: &[f64], out: &mut [f64], scratch: &mut (Vec<f64>, Vec<f64>)) {
        let d = self.d;
        let n = x.len() / d;
        scratch.0.resize((n - 1) * d, 0.0);
        scratch.1.resize((n - 1) * d, 0.0);
        self.increments(a, x, &mut scratch.0, &mut scratch.1);
        out[..d].copy_from_slice(x0);
        for k in 0..n - 1 {
            for i in 0..d {
                out[(k + 1) * d + i] = out[k * d + i] + scratch.0[k * d + i] + scratch.1[k * d + i];
            }
        }
    }

    fn euler(&self, a: usize, b: usize, x0: &[f64]) -> Vec<f64> {
        let (d, m) = (self.d, self.m);
        let mut x = vec![0.0; (b - a + 1) * d];
        x[..d].copy_from_slice(x0);
        for k in 0..b - a {
            let t = self.times[a + k];
            let xk = x[k * d..(k + 1) * d].to_vec();
            let f = self.field.eval_f(t, &xk);
            let g = self.field.eval_g(t, &xk);
            let dt = self.times[a + k + 1] - t;
            for i in 0..d {
                let mut s = xk[i] + f[i] * dt;
                for j in 0..m {
                    s += g[i * m + j] * (self.omega[(a + k + 1) * m + j] - self.omega[(a + k) * m + j]);
                }
                x[(k + 1) * d + i] = s;
            }
        }
        x
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct Picard {
    x: Vec<f64>,
    iters: usize,
    residual: f64,
    ball_ok: bool,
}

/// Picard iteration on samples `a..=b`. Fails with a reason when the change
/// does not drop below the tolerance within the iteration cap.
fn picard(grid: &Grid, a: usize, b: usize, x0: &[f64], opts: &SolveOptions, q: f64) -> std::result::Result<Picard, String> {
    let d = grid.d;
    let n = b - a + 1;
    let mut x = match opts.warm_start {
        WarmStart::Constant => x0.repeat(n),
        WarmStart::Euler => grid.euler(a, b, x0),
    };
    let mut fx = vec![0.0; n * d];
    let mut scratch = (Vec::new(), Vec::new());
    let radius = 2.0 * norm(x0) + 1.0;
    let in_ball = |x: &[f64]| {
        let var = pvar_profile(x, d, q).last().copied().unwrap_or(0.0).powf(1.0 / q);
        norm(x0) + var <= radius * (1.0 + 1e-12)
    };
    let mut ball_ok = true;
    let mut iters = 0;
    let mut change;
    loop {
        if iters >= opts.picard_max_iters {
            return Err(format!("no convergence within {} Picard iterations", opts.picard_max_iters));
        }
        grid.apply(a, x0, &x, &mut fx, &mut scratch);
        iters += 1;
        change = sup_diff(&fx, &x);
        if !change.is_finite() {
            return Err("Picard iterates diverged".into());
        }
        std::mem::swap(&mut x, &mut fx);
        ball_ok &= in_ball(&x);
        if change < opts.picard_tol {
            break;
        }
    }
    // Polish: keep stepping while the change still halves.
    let mut residual;
    let mut extra = 0;
    loop {
        grid.apply(a, x0, &x, &mut fx, &mut scratch);
        residual = sup_diff(&fx, &x);
        if extra >= POLISH_STEPS || residual == 0.0 || residual > 0.5 * change {
            break;
        }
        std::mem::swap(&mut x, &mut fx);
        ball_ok &= in_ball(&x);
        change = residual;
        extra += 1;
    }
    if residual > opts.picard_tol {
        return Err(format!("fixed-point residual {residual:e} above tolerance"));
    }
    Ok(Picard {
        x,
        iters,
        residual,
        ball_ok,
    })
}

/// Solves on samples `a..=b`, halving on failure. Writes the solution into `xs`.
#[allow(clippy::too_many_arguments)]
fn solve_range(
    grid: &Grid,
    a: usize,
    b: usize,
    depth: usize,
    opts: &SolveOptions,
    q: f64,
    xs: &mut [f64],
    reports: &mut Vec<IntervalReport>,
) -> Result<()> {
    let d = grid.d;
    let x0 = xs[a * d..(a + 1) * d].to_vec();
    match picard(grid, a, b, &x0, opts, q) {
        Ok(p) => {
            // The left endpoint is kept bit-identical to the previous interval's end.
            xs[(a + 1) * d..(b + 1) * d].copy_from_slice(&p.x[d..]);
            reports.push(IntervalReport {
                lo: grid.times[a],
                hi: grid.times[b],
                iters: p.iters,
                residual: p.residual,
                ball_ok: p.ball_ok,
                depth,
            });
            Ok(())
        }
        Err(reason) => {
            if depth >= MAX_SHRINK_DEPTH || b - a < 2 {
                return Err(Error::Solver {
                    lo: grid.times[a],
                    hi: grid.times[b],
                    reason,
                });
            }
            let cut = a + ((b - a) as f64 * opts.shrink_factor).round() as usize;
            let cut = cut.clamp(a + 1, b - 1);
            solve_range(grid, a, cut, depth + 1, opts, q, xs, reports)?;
            solve_range(grid, cut, b, depth + 1, opts, q, xs, reports)
        }
    }
}

/// Output grid on `[t0, t1]`: the requested grid or the driver samples,
/// with both endpoints present.
fn build_grid(driver: &SampledPath, t0: f64, t1: f64, requested: Option<&[f64]>) -> Result<Vec<f64>> {
    let source = requested.unwrap_or(driver.times());
    if let Some(g) = requested {
        if g.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Parameter("solve grid must be strictly increasing".into()));
        }
        let slack = 1e-12 * t0.abs().max(t1.abs()).max(1.0);
        if g.is_empty() || g[0] > t0 + slack || g[g.len() - 1] < t1 - slack {
            return Err(Error::Parameter(format!("solve grid must cover [{t0}, {t1}]")));
        }
    }
    let mut times = vec![t0];
    times.extend(source.iter().copied().filter(|&t| t > t0 && t < t1));
    times.push(t1);
    Ok(times)
}

/// Computational breakpoints: greedy times snapped down to grid indices.
fn breakpoints(grid: &[f64], greedy: &GreedySequence) -> Vec<usize> {
    let last = grid.len() - 1;
    let mut idx = vec![0];
    for &t in &greedy.times[1..] {
        let k = grid.partition_point(|&s| s <= t).saturating_sub(1).min(last);
        if k > *idx.last().unwrap() {
            idx.push(k);
        }
    }
    if *idx.last().unwrap() != last {
        idx.push(last);
    }
    idx
}

fn check_inputs(field: &CoefficientField, driver: &SampledPath, t0: f64, x0: &[f64], t1: f64) -> Result<Interval> {
    if x0.len() != field.dim {
        return Err(Error::Shape(format!("initial value has {} components, field has {}", x0.len(), field.dim)));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("initial value must be finite".into()));
    }
    if driver.dim() != field.noise_dim {
        return Err(Error::Shape(format!(
            "driver has {} components, field expects {}",
            driver.dim(),
            field.noise_dim
        )));
    }
    if !(t0 < t1) {
        return Err(Error::Parameter(format!("solve needs t0 < T, got [{t0}, {t1}]")));
    }
    driver.check_window(Interval::new(t0, t1)?)
}

/// Horizon used for the field constants.
fn horizon(t0: f64, t1: f64) -> f64 {
    t1.max(t1 - t0)
}

/// `F(x)` on the samples of `x` inside `window`.
pub fn apply_f(field: &CoefficientField, driver: &SampledPath, x: &SampledPath, window: Interval) -> Result<FMap> {
    if x.dim() != field.dim || driver.dim() != field.noise_dim {
        return Err(Error::Shape("path dimensions do not match the field".into()));
    }
    let w = driver.check_window(x.check_window(window)?)?;
    let xr = x.restrict(w)?;
    let grid = Grid::new(field, driver, xr.times().to_vec());
    let d = field.dim;
    let n = xr.len();
    let (mut drift, mut young) = (vec![0.0; (n - 1) * d], vec![0.0; (n - 1) * d]);
    grid.increments(0, xr.flat_values(), &mut drift, &mut young);
    let mut vals = vec![0.0; n * d];
    let mut iv = vec![0.0; n * d];
    let mut jv = vec![0.0; n * d];
    vals[..d].copy_from_slice(xr.first_value());
    for k in 0..n - 1 {
        for i in 0..d {
            iv[(k + 1) * d + i] = iv[k * d + i] + drift[k * d + i];
            jv[(k + 1) * d + i] = jv[k * d + i] + young[k * d + i];
            vals[(k + 1) * d + i] = vals[k * d + i] + drift[k * d + i] + young[k * d + i];
        }
    }
    let times = xr.times().to_vec();
    Ok(FMap {
        value: SampledPath::from_flat(times.clone(), vals, d)?,
        drift: SampledPath::from_flat(times.clone(), iv, d)?,
        young: SampledPath::from_flat(times, jv, d)?,
    })
}

/// Certifies `|||F(x)|||_{q-var} <= M(K+2)(1 + ||x||_{q-var})((t1-t0)^α + |||ω|||_{p-var})`.
pub fn apply_f_bound(
    field: &CoefficientField,
    driver: &SampledPath,
    x: &SampledPath,
    window: Interval,
    exps: &ExponentSet,
    derived: &DerivedConstants,
) -> Result<Certificate> {
    let fm = apply_f(field, driver, x, window)?;
    let w = fm.value.domain();
    let lhs = p_variation(&fm.value, exps.q, w)?;
    let xn = norm(&x.eval(w.lo)) + p_variation(x, exps.q, w)?;
    let rhs = derived.m
        * (derived.k + 2.0)
        * (1.0 + xn)
        * (w.width().powf(exps.alpha) + p_variation(driver, exps.p, w)?);
    Ok(Certificate::check("f-map-bound", lhs, rhs, 1e-10, (w.lo, w.hi)))
}

/// Solves one interval by Picard iteration (with shrinking on failure).
/// Returns the path, the largest iteration count and the largest residual.
pub fn solve_interval(
    field: &CoefficientField,
    driver: &SampledPath,
    t0: f64,
    x0: &[f64],
    t1: f64,
    opts: &SolveOptions,
) -> Result<(SampledPath, usize, f64)> {
    opts.validate()?;
    check_inputs(field, driver, t0, x0, t1)?;
    let exps = select_exponents(opts.p, field.alpha, field.beta, field.delta)?;
    let grid = Grid::new(field, driver, build_grid(driver, t0, t1, opts.grid.as_deref())?);
    let n = grid.times.len();
    let mut xs = vec![0.0; n * field.dim];
    xs[..field.dim].copy_from_slice(x0);
    let mut reports = Vec::new();
    solve_range(&grid, 0, n - 1, 0, opts, exps.q, &mut xs, &mut reports)?;
    let iters = reports.iter().map(|r| r.iters).max().unwrap_or(0);
    let residual = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok((SampledPath::from_flat(grid.times, xs, field.dim)?, iters, residual))
}

/// Solves on `[t0, T]` along greedy intervals and attaches certificates.
pub fn solve_forward(
    field: &CoefficientField,
    driver: &SampledPath,
    t0: f64,
    x0: &[f64],
    t_end: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let w = check_inputs(field, driver, t0, x0, t_end)?;
    let (t0, t_end) = (w.lo, w.hi);
    let exps = select_exponents(opts.p, field.alpha, field.beta, field.delta)?;
    let derived = field.derived(horizon(t0, t_end), &exps)?;
    let mu = opts.mu_override.unwrap_or(derived.mu_star);
    let greedy = greedy_sequence(driver, t0, t_end, exps.alpha, mu, exps.p)?;
    let grid = Grid::new(field, driver, build_grid(driver, t0, t_end, opts.grid.as_deref())?);
    let d = field.dim;
    let mut xs = vec![0.0; grid.times.len() * d];
    xs[..d].copy_from_slice(x0);
    let mut intervals = Vec::new();
    for pair in breakpoints(&grid.times, &greedy).windows(2) {
        solve_range(&grid, pair[0], pair[1], 0, opts, exps.q, &mut xs, &mut intervals)?;
    }
    let solution = SampledPath::from_flat(grid.times.clone(), xs, d)?;
    let mut report = SolveReport {
        solution,
        greedy,
        iters_per_interval: intervals.iter().map(|r| r.iters).collect(),
        fixed_point_residuals: intervals.iter().map(|r| r.residual).collect(),
        intervals,
        certificates: Vec::new(),
        exponents: exps,
        derived,
        mu,
    };
    if opts.certify {
        report.certificates = solve_certificates(&report, field, driver)?;
    }
    Ok(report)
}

/// Driver on `[t0, T]` under `u = T - t`, on `[0, T - t0]`.
pub fn reverse_driver(driver: &SampledPath, t0: f64, t_end: f64) -> Result<SampledPath> {
    let r = driver.restrict(Interval::new(t0, t_end)?)?;
    reverse_path(&r, t_end)
}

/// `u -> x(T - u)` on the mirrored sample times.
fn reverse_path(path: &SampledPath, t_end: f64) -> Result<SampledPath> {
    let n = path.len();
    let d = path.dim();
    let mut times: Vec<f64> = path.times().iter().rev().map(|t| t_end - t).collect();
    times[0] = 0.0;
    let mut vals = Vec::with_capacity(n * d);
    for i in (0..n).rev() {
        vals.extend_from_slice(path.value(i));
    }
    SampledPath::from_flat(times, vals, d)
}

/// Solves the terminal-value problem `x_T = xT` backwards to `t0`.
///
/// The change of time `u = T - t` turns it into a forward problem for the
/// field [`CoefficientField::reversed`] and the driver `ω(T - u)`. The
/// returned solution lives on the original times; its greedy sequence and
/// certificates refer to the reversed problem.
pub fn solve_backward(
    field: &CoefficientField,
    driver: &SampledPath,
    t_end: f64,
    x_end: &[f64],
    t0: f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let w = check_inputs(field, driver, t0, x_end, t_end)?;
    let (t0, t_end) = (w.lo, w.hi);
    let original = build_grid(driver, t0, t_end, opts.grid.as_deref())?;
    let mut mirrored: Vec<f64> = original.iter().rev().map(|t| t_end - t).collect();
    mirrored[0] = 0.0;
    let span = t_end - t0;
    let last = mirrored.len() - 1;
    mirrored[last] = span;
    let rev_field = field.reversed(t_end);
    let rev_driver = reverse_driver(driver, t0, t_end)?;
    let rev_opts = SolveOptions {
        grid: Some(mirrored),
        ..opts.clone()
    };
    let mut report = solve_forward(&rev_field, &rev_driver, 0.0, x_end, span, &rev_opts)?;
    let d = field.dim;
    let sol = &report.solution;
    let mut vals = Vec::with_capacity(sol.len() * d);
    for i in (0..sol.len()).rev() {
        vals.extend_from_slice(sol.value(i));
    }
    report.solution = SampledPath::from_flat(original, vals, d)?;
    Ok(report)
}

/// Explicit Young–Euler scheme
/// `x_{k+1} = x_k + f(t_k, x_k) Δt + g(t_k, x_k) Δω` on `grid`.
pub fn euler_solve(
    field: &CoefficientField,
    driver: &SampledPath,
    t0: f64,
    x0: &[f64],
    t_end: f64,
    grid: &[f64],
) -> Result<SampledPath> {
    let w = check_inputs(field, driver, t0, x0, t_end)?;
    let times = build_grid(driver, w.lo, w.hi, Some(grid))?;
    let g = Grid::new(field, driver, times);
    let n = g.times.len();
    let xs = g.euler(0, n - 1, x0);
    SampledPath::from_flat(g.times, xs, field.dim)
}

/// Form of the hypothesis assumed on `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// `|y_t - y_s| <= A^{1/q} + a1 |∫ y du| + a2 |∫ y dω|`, scalar driver only.
    Increment { a1: f64, a2: f64 },
    /// `|||y|||_{q-var} <= A^{1/q} + c (|y_s| + |||y|||_{q-var}) ((t-s)^λ + |||ω|||_{p-var})`.
    Variation { c: f64 },
}

/// The forcing term `A_{s,t}^{1/q}`.
pub enum Forcing<'a> {
    /// A control function `A`.
    Control(&'a dyn ControlFunction),
    /// `A^{1/q} = scale ((t-s)^λ + |||ω|||_{p-var,[s,t]})`.
    Budget { scale: f64 },
}

pub struct GronwallInput<'a> {
    pub y: &'a SampledPath,
    pub forcing: Forcing<'a>,
    pub hypothesis: Hypothesis,
    /// Exponent `λ` on `|t - s|`; 1 in the classical statement.
    pub time_exponent: f64,
}

/// Result of [`gronwall_certificate`]. When the hypothesis fails on some
/// pair, only `hypothesis` is filled and its window is the violating pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub c: f64,
    /// `C = 4^{p'} c^{p'} ln 2`.
    pub big_c: f64,
    pub a0: f64,
    pub p_prime: f64,
    pub greedy_count: usize,
    pub hypothesis: Certificate,
    pub bound: Option<Certificate>,
    pub induction: Option<Certificate>,
    pub sup_norm: Option<Certificate>,
}

impl GronwallReport {
    pub fn ok(&self) -> bool {
        self.certificates().iter().all(|c| c.ok) && self.bound.is_some()
    }

    pub fn certificates(&self) -> Vec<Certificate> {
        let mut v = vec![self.hypothesis.clone()];
        v.extend(self.bound.iter().cloned());
        v.extend(self.induction.iter().cloned());
        v.extend(self.sup_norm.iter().cloned());
        v
    }
}

fn anchors(n: usize, count: usize) -> Vec<usize> {
    if n <= 1 {
        return vec![0];
    }
    let count = count.min(n - 1).max(1);
    let mut v: Vec<usize> = (0..count).map(|k| k * (n - 1) / count).collect();
    v.dedup();
    v
}

/// Cumulative trapezoid `∫ y du` and left-rule `∫ y dω` on the samples of `y`.
fn cumulative_integrals(y: &SampledPath, w: &SampledPath) -> (Vec<f64>, Vec<f64>) {
    let d = y.dim();
    let n = y.len();
    let t = y.times();
    let mut du = vec![0.0; n * d];
    let mut dw = vec![0.0; n * d];
    for k in 0..n - 1 {
        let dt = t[k + 1] - t[k];
        let dom = w.value(k + 1)[0] - w.value(k)[0];
        for i in 0..d {
            du[(k + 1) * d + i] = du[k * d + i] + 0.5 * (y.value(k)[i] + y.value(k + 1)[i]) * dt;
            dw[(k + 1) * d + i] = dw[k * d + i] + y.value(k)[i] * dom;
        }
    }
    (du, dw)
}

fn diff_norm(v: &[f64], i: usize, j: usize, d: usize) -> f64 {
    let s: f64 = (0..d).map(|c| (v[j * d + c] - v[i * d + c]).powi(2)).sum();
    s.sqrt()
}

/// Checks the Gronwall-type conclusion
/// `|||y|||_{q-var,[s,t]} <= (2A_0 + |y_s|) exp(C(|t-s|^{λp'} + |||ω|||^{p'}_{p-var,[s,t]}))`
/// with `C = 4^{p'} c^{p'} ln 2` and `p' = max(p, 1/λ)`, after verifying the
/// hypothesis on the same pairs. Also checks the doubling recursion
/// `2A_0 + |y_{τ_{i+1}}| <= 2(2A_0 + |y_{τ_i}|)` along the greedy times with
/// budget `1/(2c)` and the sup-norm bound `(2A_0 + |y_0|) 2^{N+1}`.
///
/// Pairs `(s, t)` range over about two dozen anchors `s` and every sample `t`
/// after them. The driver is resampled on the grid of `y`, which can only
/// lower its variation, so the check is conservative.
pub fn gronwall_certificate(input: &GronwallInput, driver: &SampledPath, p: f64, q: f64) -> Result<GronwallReport> {
    let y = input.y;
    let lambda = input.time_exponent;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Parameter(format!("time exponent must lie in (0, 1], got {lambda}")));
    }
    let win = y.domain();
    let w = driver.resample(y.times())?;
    let c = match input.hypothesis {
        Hypothesis::Increment { a1, a2 } => {
            if driver.dim() != 1 {
                return Err(Error::Shape("increment hypothesis needs a scalar driver".into()));
            }
            let k = YoungConstants::new(p, q)?.k;
            a1.max(a2 * (k + 1.0))
        }
        Hypothesis::Variation { c } => c,
    };
    if !(c >= 0.0) {
        return Err(Error::Parameter(format!("hypothesis constants must be nonnegative, got c = {c}")));
    }
    let p_prime = p.max(1.0 / lambda);
    let big_c = 4f64.powf(p_prime) * c.powf(p_prime) * std::f64::consts::LN_2;
    let t = y.times();
    let n = y.len();
    let d = y.dim();
    let forcing = |s: f64, tt: f64, wvar: f64| match &input.forcing {
        Forcing::Control(a) => a.eval(s, tt).max(0.0).powf(1.0 / q),
        Forcing::Budget { scale } => scale * ((tt - s).powf(lambda) + wvar),
    };
    let w_full = p_variation_from(&w, p, 0)?;
    let a0 = forcing(t[0], t[n - 1], w_full[n - 1]);
    let integrals = match input.hypothesis {
        Hypothesis::Increment { .. } => Some(cumulative_integrals(y, &w)),
        Hypothesis::Variation { .. } => None,
    };

    let mut worst_hyp = (f64::NEG_INFINITY, 0.0, 0.0, (t[0], t[0]));
    let mut worst_bound = (f64::NEG_INFINITY, 0.0, f64::INFINITY, (t[0], t[0]));
    for i in anchors(n, GRONWALL_ANCHORS) {
        let yv = p_variation_from(y, q, i)?;
        let wv = p_variation_from(&w, p, i)?;
        let ys = norm(y.value(i));
        for k in 1..yv.len() {
            let j = i + k;
            let (s, tt) = (t[i], t[j]);
            let a = forcing(s, tt, wv[k]);
            let (lhs, rhs) = match (input.hypothesis, &integrals) {
                (Hypothesis::Variation { c }, _) => (yv[k], a + c * (ys + yv[k]) * ((tt - s).powf(lambda) + wv[k])),
                (Hypothesis::Increment { a1, a2 }, Some((du, dw))) => (
                    diff_norm(y.flat_values(), i, j, d),
                    a + a1 * diff_norm(du, i, j, d) + a2 * diff_norm(dw, i, j, d),
                ),
                _ => unreachable!("integrals exist for the increment hypothesis"),
            };
            let excess = lhs - rhs - 1e-10 * (1.0 + rhs);
            if excess > worst_hyp.0 {
                worst_hyp = (excess, lhs, rhs, (s, tt));
            }
            let log_rhs = (2.0 * a0 + ys).ln() + big_c * ((tt - s).powf(lambda * p_prime) + wv[k].powf(p_prime));
            let gap = if yv[k] > 0.0 { yv[k].ln() - log_rhs } else { f64::NEG_INFINITY };
            if gap > worst_bound.0 {
                worst_bound = (gap, yv[k], log_rhs, (s, tt));
            }
        }
    }
    let hyp_ok = worst_hyp.0 <= 0.0;
    let hypothesis = Certificate {
        name: "gronwall-hypothesis".into(),
        lhs: worst_hyp.1,
        rhs: worst_hyp.2,
        ok: hyp_ok,
        window: worst_hyp.3,
    };
    if !hyp_ok {
        return Ok(GronwallReport {
            c,
            big_c,
            a0,
            p_prime,
            greedy_count: 0,
            hypothesis,
            bound: None,
            induction: None,
            sup_norm: None,
        });
    }
    let bound = Certificate::check_log("gronwall", worst_bound.1, worst_bound.2, worst_bound.3);

    let mu = if c > 0.0 { 1.0 / (2.0 * c) } else { f64::INFINITY };
    let seq = greedy_sequence(&w, win.lo, win.hi, lambda, mu, p)?;
    let level = |tau: f64| 2.0 * a0 + norm(&y.eval(tau));
    let mut worst_ratio = 0.0_f64;
    let mut ind_window = (win.lo, win.lo);
    for pair in seq.times.windows(2) {
        let (l0, l1) = (level(pair[0]), level(pair[1]));
        let ratio = if l0 > 0.0 {
            l1 / l0
        } else if l1 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            ind_window = (pair[0], pair[1]);
        }
    }
    let induction = Certificate::check("gronwall-induction", worst_ratio, 2.0, 1e-12, ind_window);
    let count = seq.interval_count();
    let sup_log = (2.0 * a0 + norm(y.first_value())).ln() + (count as f64 + 1.0) * std::f64::consts::LN_2;
    let sup_norm = Certificate::check_log("gronwall-sup", y.sup_norm(), sup_log, (win.lo, win.hi));
    Ok(GronwallReport {
        c,
        big_c,
        a0,
        p_prime,
        greedy_count: count,
        hypothesis,
        bound: Some(bound),
        induction: Some(induction),
        sup_norm: Some(sup_norm),
    })
}

/// Gronwall certificate of a solution, with the variation hypothesis
/// supplied by the bound on `F`: `c = M(K+2)`, `λ = α` and
/// `A^{1/q}_{s,t} = c((t-s)^α + |||ω|||_{p-var,[s,t]})`.
pub fn solution_gronwall(report: &SolveReport, driver: &SampledPath) -> Result<GronwallReport> {
    let c = report.derived.m * (report.derived.k + 2.0);
    let input = GronwallInput {
        y: &report.solution,
        forcing: Forcing::Budget { scale: c },
        hypothesis: Hypothesis::Variation { c },
        time_exponent: report.exponents.alpha,
    };
    gronwall_certificate(&input, driver, report.exponents.p, report.exponents.q)
}

/// Natural log of the growth bound
/// `C_1 [1 + (T-t0)^α] (1 + |x0|) (1 + W) exp(C_2 W^{p'})`, `W = |||ω|||_{p-var,[t0,T]}`.
///
/// With `c = M(K+2)` the bound on `F` gives the variation hypothesis with
/// `A^{1/q}_{s,t} = c((t-s)^α + |||ω|||)`, so `A_0 = c((T-t0)^α + W)` and
///
/// `|||x||| <= (2A_0 + |x0|) exp(C_2((T-t0)^{αp'} + W^{p'}))`, `C_2 = 4^{p'} c^{p'} ln 2`.
///
/// Since `2A_0 + |x0| <= max(2c, 1) [1 + (T-t0)^α] (1 + |x0|) (1 + W)` and
/// `|x0|` obeys the same bound, `||x|| = |x0| + |||x|||` stays below the
/// product above with `C_1 = 2 max(2c, 1) exp(C_2 (T-t0)^{αp'})`.
pub fn growth_log_bound(exps: &ExponentSet, derived: &DerivedConstants, span: f64, x0_norm: f64, w: f64) -> f64 {
    let c = derived.m * (derived.k + 2.0);
    let pp = exps.p_prime;
    let c2 = 4f64.powf(pp) * c.powf(pp) * std::f64::consts::LN_2;
    let log_c1 = std::f64::consts::LN_2 + (2.0 * c).max(1.0).ln() + c2 * span.powf(exps.alpha * pp);
    log_c1 + (1.0 + span.powf(exps.alpha)).ln() + (1.0 + x0_norm).ln() + (1.0 + w).ln() + c2 * w.powf(pp)
}

/// Certifies `||x||_{q-var,[t0,T]}` against [`growth_log_bound`].
pub fn growth_certificate(report: &SolveReport, driver: &SampledPath) -> Result<Certificate> {
    let x = &report.solution;
    let win = x.domain();
    let x0 = norm(x.first_value());
    let lhs = x0 + p_variation(x, report.exponents.q, win)?;
    let w = p_variation(driver, report.exponents.p, win)?;
    let log_rhs = growth_log_bound(&report.exponents, &report.derived, win.width(), x0, w);
    Ok(Certificate::check_log("growth", lhs, log_rhs, (win.lo, win.hi)))
}

/// Young–Loève check of `g(., x.)` against `ω` on every solved interval,
/// folded into one certificate that reports the worst interval.
pub fn young_loeve_solution(report: &SolveReport, field: &CoefficientField, driver: &SampledPath) -> Result<Certificate> {
    let constants = YoungConstants::new(report.exponents.p, report.exponents.q0)?;
    let gx = crate::coefficients::compose_g(field, &report.solution)?;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, (0.0, 0.0));
    let mut ok = true;
    for iv in &report.intervals {
        let cert = young_loeve_check(&gx, driver, Interval::new(iv.lo, iv.hi)?, &constants)?;
        ok &= cert.ok && cert.variation_ok;
        let excess = (cert.defect - cert.bound).max(cert.variation_lhs - cert.variation_rhs);
        if excess > worst.0 {
            worst = (excess, cert.defect, cert.bound, cert.window);
        }
    }
    Ok(Certificate {
        name: "young-loeve".into(),
        lhs: worst.1,
        rhs: worst.2,
        ok,
        window: worst.3,
    })
}

fn solve_certificates(report: &SolveReport, field: &CoefficientField, driver: &SampledPath) -> Result<Vec<Certificate>> {
    let mut out = solution_gronwall(report, driver)?.certificates();
    out.push(growth_certificate(report, driver)?);
    out.push(young_loeve_solution(report, field, driver)?);
    let win = report.solution.domain();
    out.push(Certificate::check(
        "picard-ball",
        if report.ball_ok() { 0.0 } else { 1.0 },
        0.0,
        0.0,
        (win.lo, win.hi),
    ));
    Ok(out)
}

/// Lipschitz-type constant of the solution map on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityConstant {
    /// Hypothesis constant `c' = M'_R (K+1)(1 + 2R^δ)`.
    pub c: f64,
    /// Greedy intervals for `λ = 1` and budget `1/(2c')`.
    pub greedy_count: usize,
    /// `2^{N+1}`.
    pub factor: f64,
}

/// For two solutions with norms at most `radius`, the difference `z`
/// satisfies the variation hypothesis with `c'`, so
/// `||z||_∞ <= (2A_0 + |z_0|) 2^{N+1}`.
pub fn continuity_constant(
    field: &CoefficientField,
    driver: &SampledPath,
    window: Interval,
    radius: f64,
    exps: &ExponentSet,
    derived: &DerivedConstants,
) -> Result<ContinuityConstant> {
    let c = field.m_prime(radius, derived) * (derived.k + 1.0) * (1.0 + 2.0 * radius.powf(exps.delta));
    let w = driver.check_window(window)?;
    let count = if w.is_degenerate() {
        0
    } else {
        let mu = if c > 0.0 { 1.0 / (2.0 * c) } else { f64::INFINITY };
        greedy_sequence(driver, w.lo, w.hi, 1.0, mu, exps.p)?.interval_count()
    };
    Ok(ContinuityConstant {
        c,
        greedy_count: count,
        factor: 2f64.powi(count as i32 + 1),
    })
}

/// Response of the solution to a perturbation of the initial value or driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub perturbation: f64,
    pub response: f64,
    pub constant: f64,
    pub certificate: Certificate,
}

fn q_norm(x: &SampledPath, q: f64) -> Result<f64> {
    Ok(norm(x.first_value()) + p_variation(x, q, x.domain())?)
}

/// Certifies `sup_t |x_t - x'_t| <= 2^{N+1} |x0 - x0'|`.
#[allow(clippy::too_many_arguments)]
pub fn continuity_in_initial_value(
    field: &CoefficientField,
    driver: &SampledPath,
    t0: f64,
    x0: &[f64],
    x0_prime: &[f64],
    t_end: f64,
    opts: &SolveOptions,
) -> Result<ContinuityReport> {
    let quiet = SolveOptions {
        certify: false,
        ..opts.clone()
    };
    let a = solve_forward(field, driver, t0, x0, t_end, &quiet)?;
    let b = solve_forward(field, driver, t0, x0_prime, t_end, &quiet)?;
    let q = a.exponents.q;
    let radius = q_norm(&a.solution, q)?.max(q_norm(&b.solution, q)?);
    let win = a.solution.domain();
    let cc = continuity_constant(field, driver, win, radius, &a.exponents, &a.derived)?;
    let perturbation = x0.iter().zip(x0_prime).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let response = a.solution.difference(&b.solution)?.sup_norm();
    let rhs = cc.factor * perturbation;
    Ok(ContinuityReport {
        perturbation,
        response,
        constant: cc.factor,
        certificate: Certificate::check("continuity-initial", response, rhs, 1e-9, (win.lo, win.hi)),
    })
}

/// Certifies `sup_t |x_t - x'_t| <= 4 M (K+1)(1 + ||x'||) 2^{N} ||ω - ω'||_{p-var}`.
///
/// The difference solves an equation with the extra forcing
/// `∫ g(x') d(ω - ω')`, whose variation the Young–Loève estimate bounds by
/// `A_0 = M(K+1)(1 + ||x'||_{q-var}) ||ω - ω'||_{p-var}`.
pub fn continuity_in_driver(
    field: &CoefficientField,
    driver: &SampledPath,
    driver_prime: &SampledPath,
    t0: f64,
    x0: &[f64],
    t_end: f64,
    opts: &SolveOptions,
) -> Result<ContinuityReport> {
    let quiet = SolveOptions {
        certify: false,
        ..opts.clone()
    };
    let a = solve_forward(field, driver, t0, x0, t_end, &quiet)?;
    let b = solve_forward(field, driver_prime, t0, x0, t_end, &quiet)?;
    let q = a.exponents.q;
    let (na, nb) = (q_norm(&a.solution, q)?, q_norm(&b.solution, q)?);
    let win = a.solution.domain();
    let cc = continuity_constant(field, driver, win, na.max(nb), &a.exponents, &a.derived)?;
    let delta = driver.difference(driver_prime)?;
    let perturbation = norm(&delta.eval(win.lo)) + p_variation(&delta, a.exponents.p, win)?;
    let a0 = a.derived.m * (a.derived.k + 1.0) * (1.0 + nb) * perturbation;
    let response = a.solution.difference(&b.solution)?.sup_norm();
    let rhs = 2.0 * a0 * cc.factor;
    Ok(ContinuityReport {
        perturbation,
        response,
        constant: if perturbation > 0.0 { rhs / perturbation } else { 0.0 },
        certificate: Certificate::check("continuity-driver", response, rhs, 1e-9, (win.lo, win.hi)),
    })
}
