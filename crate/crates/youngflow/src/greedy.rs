//! Greedy time partitions of a driver.
//!
//! Starting from `τ_0`, each next time solves
//! `(τ_{i+1} - τ_i)^λ + |||ω|||_{p-var, [τ_i, τ_{i+1}]} = μ`, so that every
//! interval carries the same budget `μ`. The left side, `κ(t)`, is continuous
//! and strictly increasing in `t`, and is evaluated on the interpolated path
//! with the moving endpoint inserted as an extra sample.

use serde::{Deserialize, Serialize};

use crate::paths::{p_variation, Interval, SampledPath};
use crate::{Error, Result};

/// Bisection stops once the bracket is this narrow.
pub const TIME_TOL: f64 = 1e-12;
/// Hard cap on bisection steps.
pub const MAX_BISECTION: usize = 200;
/// Residual tolerance for non-clamped steps.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Greedy times `τ_0 < τ_1 < ...` with the residual of the defining equation
/// on each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedySequence {
    pub lambda: f64,
    pub mu: f64,
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl GreedySequence {
    /// Number of intervals in the sequence.
    pub fn interval_count(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    /// True when step `i` ended because the window ran out before the budget.
    pub fn is_clamped(&self, i: usize) -> bool {
        self.residuals[i] < -RESIDUAL_TOL
    }
}

/// Interval count of a greedy sequence against its a priori bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountBound {
    pub actual: usize,
    pub bound: f64,
    pub p_prime: f64,
}

impl CountBound {
    /// A window of positive length always needs one interval, so the bound
    /// is read as at least one.
    pub fn holds(&self) -> bool {
        self.actual as f64 <= self.bound.ceil().max(1.0)
    }
}

fn check_params(lambda: f64, mu: f64, p: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(mu > 0.0) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

#[inline]
fn dist_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    s.sqrt().powf(p)
}

/// `κ(t) = (t - from)^λ + |||ω|||_{p-var, [from, t]}`, computed directly.
pub fn kappa(driver: &SampledPath, from: f64, t: f64, lambda: f64, p: f64) -> Result<f64> {
    let w = Interval::new(from, t)?;
    Ok((t - from).powf(lambda) + p_variation(driver, p, w)?)
}

/// Outcome of a single greedy step.
struct Step {
    time: f64,
    residual: f64,
}

/// Finds the next greedy time after `from`, not beyond `end`.
///
/// The p-variation profile from `from` is grown one sample at a time until
/// `κ` at a sample reaches `μ`; the crossing is then bisected inside that
/// segment, where only the moving endpoint changes.
fn step(driver: &SampledPath, from: f64, end: f64, lambda: f64, mu: f64, p: f64) -> Result<Step> {
    let dim = driver.dim();
    let mut times = vec![from];
    let mut vals = driver.eval(from);
    let first = driver.times().partition_point(|&t| t <= from);
    for i in first..driver.len() {
        let t = driver.times()[i];
        if t >= end {
            break;
        }
        times.push(t);
        vals.extend_from_slice(driver.value(i));
    }
    times.push(end);
    vals.extend(driver.eval(end));

    let n = times.len();
    let value = |k: usize| &vals[k * dim..(k + 1) * dim];
    let mut acc = vec![0.0; n];
    let kappa_at = |t: f64, acc_p: f64| (t - from).powf(lambda) + acc_p.powf(1.0 / p);
    let mut bracket = None;
    for j in 1..n {
        let best = acc[..j]
            .iter()
            .enumerate()
            .map(|(i, a)| a + dist_pow(value(i), value(j), p))
            .fold(0.0_f64, f64::max);
        acc[j] = best;
        let k = kappa_at(times[j], best);
        if k >= mu {
            bracket = Some(j);
            break;
        }
    }
    let Some(j) = bracket else {
        let k_end = kappa_at(end, acc[n - 1]);
        return Ok(Step {
            time: end,
            residual: k_end - mu,
        });
    };

    // κ on (times[j-1], times[j]]: samples 0..j-1 plus the interpolated endpoint.
    let mut point = vec![0.0; dim];
    let (ta, tb) = (times[j - 1], times[j]);
    let mut kappa_inner = |t: f64| {
        let w = if tb > ta { (t - ta) / (tb - ta) } else { 1.0 };
        let (va, vb) = (value(j - 1), value(j));
        for c in 0..dim {
            point[c] = va[c] + w * (vb[c] - va[c]);
        }
        let best = acc[..j]
            .iter()
            .enumerate()
            .map(|(i, a)| a + dist_pow(value(i), &point, p))
            .fold(0.0_f64, f64::max);
        kappa_at(t, best)
    };
    let (mut lo, mut hi) = (ta, tb);
    let (mut k_lo, mut k_hi) = (kappa_inner(lo), kappa_inner(hi));
    for _ in 0..MAX_BISECTION {
        if hi - lo <= TIME_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let k = kappa_inner(mid);
        if k < mu {
            lo = mid;
            k_lo = k;
        } else {
            hi = mid;
            k_hi = k;
        }
    }
    let (time, k) = if (k_lo - mu).abs() < (k_hi - mu).abs() && lo > from {
        (lo, k_lo)
    } else {
        (hi, k_hi)
    };
    Ok(Step { time, residual: k - mu })
}

/// The unique `t*` with `κ(t*) = μ`, or the end of the driver's domain when
/// `κ(end) < μ`.
pub fn next_greedy_time(driver: &SampledPath, from: f64, lambda: f64, mu: f64, p: f64) -> Result<f64> {
    check_params(lambda, mu, p)?;
    let end = driver.end_time();
    if from >= end {
        return Err(Error::Exhausted(from));
    }
    driver.check_window(Interval::new(from, end)?)?;
    Ok(step(driver, from, end, lambda, mu, p)?.time)
}

/// Greedy times on `[start, end]`; the last time is clamped to `end`.
pub fn greedy_sequence(
    driver: &SampledPath,
    start: f64,
    end: f64,
    lambda: f64,
    mu: f64,
    p: f64,
) -> Result<GreedySequence> {
    check_params(lambda, mu, p)?;
    if !(start < end) {
        return Err(Error::Parameter(format!("greedy window needs start < end, got [{start}, {end}]")));
    }
    let w = driver.check_window(Interval::new(start, end)?)?;
    let (start, end) = (w.lo, w.hi);
    // Steps landing this close to the end are snapped onto it.
    let snap = 1e-9 * end.abs().max(1.0);
    let mut times = vec![start];
    let mut residuals = Vec::new();
    let mut from = start;
    while from < end {
        let s = step(driver, from, end, lambda, mu, p)?;
        let mut t = s.time;
        let mut residual = s.residual;
        if end - t <= snap && t < end {
            t = end;
            residual = kappa(driver, from, end, lambda, p)? - mu;
        }
        if t <= from {
            return Err(Error::Data(format!("greedy step from {from} made no progress")));
        }
        times.push(t);
        residuals.push(residual);
        from = t;
    }
    Ok(GreedySequence {
        lambda,
        mu,
        times,
        residuals,
    })
}

/// Interval count on `window` against
/// `2^{p'-1} μ^{-p'} ((b-a)^{p'λ} + |||ω|||^{p'}_{p-var,[a,b]})`.
///
pub fn count_bound(
    driver: &SampledPath,
    window: Interval,
    lambda: f64,
    mu: f64,
    p: f64,
    p_prime: f64,
) -> Result<CountBound> {
    check_params(lambda, mu, p)?;
    let floor = p.max(1.0 / lambda);
    if !(p_prime >= floor * (1.0 - 1e-12)) {
        return Err(Error::Parameter(format!("p' = {p_prime} must be at least max(p, 1/lambda) = {floor}")));
    }
    let w = driver.check_window(window)?;
    let var = p_variation(driver, p, w)?;
    let bound = 2f64.powf(p_prime - 1.0) / mu.powf(p_prime)
        * (w.width().powf(p_prime * lambda) + var.powf(p_prime));
    let actual = if w.is_degenerate() {
        0
    } else {
        greedy_sequence(driver, w.lo, w.hi, lambda, mu, p)?.interval_count()
    };
    Ok(CountBound { actual, bound, p_prime })
}
