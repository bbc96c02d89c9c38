//! Driver paths: fractional Brownian motion and closed-form test drivers.
//!
//! fBm is sampled exactly on a uniform grid. The increments form a stationary
//! Gaussian sequence whose Toeplitz covariance is factored by the
//! Durbin–Levinson recursion, which is the Cholesky factorization of that
//! matrix written as an innovations filter. The path is the cumulative sum of
//! the increments, so its covariance is exactly
//! `R(s,t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2` up to rounding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::paths::SampledPath;
use crate::{Error, Result};

/// Diagonal jitter added once when the factorization loses positivity.
pub const JITTER: f64 = 1e-12;

/// `n + 1` equally spaced times on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let mut t: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    t[n] = hi;
    t
}

/// Fractional Brownian motion on `n` uniform steps of `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbmSpec {
    pub hurst: f64,
    pub horizon: f64,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl FbmSpec {
    fn validate(&self) -> Result<()> {
        // H = 1/2 is admitted as the Brownian reference case.
        if !(self.hurst >= 0.5 && self.hurst < 1.0) {
            return Err(Error::Parameter(format!("hurst must lie in [1/2, 1), got {}", self.hurst)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Parameter(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.samples < 2 {
            return Err(Error::Parameter(format!("need at least 2 samples, got {}", self.samples)));
        }
        Ok(())
    }
}

/// Autocovariance of unit-step fractional Gaussian noise.
fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Durbin–Levinson on the Toeplitz sequence `gamma`. Calls `emit(k, phi_k, v_k)`
/// for each step so that callers need not keep every row.
fn durbin(gamma: &[f64], mut emit: impl FnMut(usize, &[f64], f64)) -> Result<()> {
    let n = gamma.len();
    let mut v = gamma[0];
    if !(v > 0.0) {
        return Err(Error::Factorization(format!("non-positive variance {v}")));
    }
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut prev: Vec<f64> = Vec::with_capacity(n);
    emit(0, &phi, v);
    for k in 1..n {
        let mut acc = gamma[k];
        for j in 1..k {
            acc -= prev[j - 1] * gamma[k - j];
        }
        let r = acc / v;
        phi.clear();
        for j in 1..k {
            phi.push(prev[j - 1] - r * prev[k - j - 1]);
        }
        phi.push(r);
        v *= 1.0 - r * r;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Factorization(format!("innovation variance {v} at step {k}")));
        }
        emit(k, &phi, v);
        std::mem::swap(&mut phi, &mut prev);
    }
    Ok(())
}

fn increment_gamma(spec: &FbmSpec, jitter: f64) -> Vec<f64> {
    let step = spec.horizon / spec.samples as f64;
    let scale = step.powf(2.0 * spec.hurst);
    let mut g: Vec<f64> = (0..spec.samples).map(|k| scale * fgn_autocov(spec.hurst, k)).collect();
    g[0] += jitter;
    g
}

/// Runs the factorization, retrying once with jitter.
fn with_jitter<T>(spec: &FbmSpec, mut run: impl FnMut(&[f64]) -> Result<T>) -> Result<T> {
    match run(&increment_gamma(spec, 0.0)) {
        Ok(v) => Ok(v),
        Err(_) => run(&increment_gamma(spec, JITTER)),
    }
}

/// Increments from standard normals `z` through the innovations filter.
fn filter_increments(gamma: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let n = gamma.len();
    let mut x = vec![0.0; n];
    durbin(gamma, |k, phi, v| {
        let mut s = v.sqrt() * z[k];
        for (j, c) in phi.iter().enumerate() {
            s += c * x[k - 1 - j];
        }
        x[k] = s;
    })?;
    Ok(x)
}

fn path_from_increments(spec: &FbmSpec, inc: &[f64]) -> Result<SampledPath> {
    let times = uniform_grid(0.0, spec.horizon, spec.samples);
    let mut values = Vec::with_capacity(inc.len() + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for d in inc {
        acc += d;
        values.push(acc);
    }
    SampledPath::from_scalar(times, values)
}

/// One scalar fBm path with `samples + 1` points, starting at 0.
pub fn fbm_sample(spec: &FbmSpec) -> Result<SampledPath> {
    fbm_sample_dim(spec, 1)
}

/// `dim` independent fBm components drawn from one seeded stream.
pub fn fbm_sample_dim(spec: &FbmSpec, dim: usize) -> Result<SampledPath> {
    spec.validate()?;
    if dim == 0 {
        return Err(Error::Parameter("driver dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.samples;
    let comps = (0..dim)
        .map(|_| {
            let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let inc = with_jitter(spec, |g| filter_increments(g, &z))?;
            path_from_increments(spec, &inc)
        })
        .collect::<Result<Vec<_>>>()?;
    if dim == 1 {
        return Ok(comps.into_iter().next().expect("one component"));
    }
    let times = comps[0].times().to_vec();
    let mut flat = Vec::with_capacity((n + 1) * dim);
    for i in 0..=n {
        for c in &comps {
            flat.push(c.value(i)[0]);
        }
    }
    SampledPath::from_flat(times, flat, dim)
}

/// `R(s, t)` of fBm with Hurst index `h`.
pub fn fbm_covariance(h: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (s.abs().powf(e) + t.abs().powf(e) - (t - s).abs().powf(e))
}

/// Largest entry of `|S L (S L)^T - R|` over the grid points `t_1..t_n`, where
/// `L` is the factor used by [`fbm_sample`] and `S` the cumulative sum.
/// Dense, so limited to `n <= 2048`.
pub fn fbm_covariance_error(spec: &FbmSpec) -> Result<f64> {
    spec.validate()?;
    let n = spec.samples;
    if n > 2048 {
        return Err(Error::Size(format!("covariance check limited to n <= 2048, got {n}")));
    }
    let factor = with_jitter(spec, |g| {
        let mut l = vec![vec![0.0; n]; n];
        durbin(g, |k, phi, v| {
            let mut row = vec![0.0; n];
            row[k] = v.sqrt();
            for (j, c) in phi.iter().enumerate() {
                for (r, prev) in row.iter_mut().zip(&l[k - 1 - j]).take(k) {
                    *r += c * prev;
                }
            }
            l[k] = row;
        })?;
        Ok(l)
    })?;
    // Rows of S L are prefix sums of rows of L.
    let mut m = factor;
    for k in 1..n {
        let (head, tail) = m.split_at_mut(k);
        for (a, b) in tail[0].iter_mut().zip(&head[k - 1]) {
            *a += b;
        }
    }
    let step = spec.horizon / n as f64;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = m[i].iter().zip(&m[j]).take(j + 1).map(|(a, b)| a * b).sum();
            let r = fbm_covariance(spec.hurst, (i + 1) as f64 * step, (j + 1) as f64 * step);
            worst = worst.max((dot - r).abs());
        }
    }
    Ok(worst)
}

/// Closed-form and seeded test drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverKind {
    /// `ω_t = slope * t`.
    Linear { slope: f64 },
    /// `ω_t = sin(a t)`.
    Sine { a: f64 },
    /// `ω_t = t^k`.
    Power { k: f64 },
    /// Scaled Gaussian random walk with independent increments.
    BrownianLike { seed: u64, scale: f64 },
}

impl DriverKind {
    /// Builds a kind from a name and positional parameters.
    pub fn from_name(name: &str, params: &[f64]) -> Result<DriverKind> {
        let get = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        match name {
            "linear" => Ok(DriverKind::Linear { slope: get(0, 1.0) }),
            "sine" => Ok(DriverKind::Sine { a: get(0, 1.0) }),
            "power" => Ok(DriverKind::Power { k: get(0, 2.0) }),
            "brownian_like" | "brownian-like" => Ok(DriverKind::BrownianLike {
                seed: get(0, 0.0) as u64,
                scale: get(1, 1.0),
            }),
            other => Err(Error::Parameter(format!(
                "unknown driver kind `{other}`; expected linear, sine, power or brownian_like"
            ))),
        }
    }
}

/// Samples an analytic driver on `grid`.
pub fn analytic_driver(kind: DriverKind, grid: &[f64]) -> Result<SampledPath> {
    analytic_driver_dim(kind, grid, 1)
}

/// Samples an analytic driver with every component equal, except the random
/// walk whose components are independent.
pub fn analytic_driver_dim(kind: DriverKind, grid: &[f64], dim: usize) -> Result<SampledPath> {
    if dim == 0 {
        return Err(Error::Parameter("driver dimension must be positive".into()));
    }
    let times = grid.to_vec();
    match kind {
        DriverKind::Linear { slope } => SampledPath::from_fn(times, dim, |t| vec![slope * t; dim]),
        DriverKind::Sine { a } => SampledPath::from_fn(times, dim, |t| vec![(a * t).sin(); dim]),
        DriverKind::Power { k } => {
            if grid.first().is_some_and(|&t| t < 0.0) && k.fract() != 0.0 {
                return Err(Error::Parameter("non-integer power needs nonnegative times".into()));
            }
            SampledPath::from_fn(times, dim, |t| vec![t.powf(k); dim])
        }
        DriverKind::BrownianLike { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut flat = vec![0.0; grid.len() * dim];
            for i in 1..grid.len() {
                let dt = (grid[i] - grid[i - 1]).max(0.0);
                for c in 0..dim {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    flat[i * dim + c] = flat[(i - 1) * dim + c] + scale * dt.sqrt() * z;
                }
            }
            SampledPath::from_flat(times, flat, dim)
        }
    }
}
