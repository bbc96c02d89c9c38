//! Sampled paths, exact discrete p-variation, Hölder norms, control
//! functions, concatenation and the whole-line metric.
//!
//! A [`SampledPath`] stands for the piecewise-linear interpolant of its
//! samples. Variation norms are suprema over partitions drawn from the
//! sample times of a window; window endpoints that fall between samples are
//! inserted by linear interpolation first.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute slack used when a time is compared against a path's domain.
fn time_slack(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

/// A closed time interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!("interval bounds must be finite, got [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(Error::Parameter(format!("interval lower bound {lo} exceeds upper bound {hi}")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }
}

/// Strictly increasing sample times with values in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl SampledPath {
    /// Builds a path from one vector per sample.
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = values.first().map(|v| v.len()).unwrap_or(0);
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::Data("all samples must have the same dimension".into()));
        }
        let flat = values.into_iter().flatten().collect();
        Self::from_flat(times, flat, dim)
    }

    /// Builds a path from row-major values (`times.len() * dim` entries).
    pub fn from_flat(times: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Data("path dimension must be positive".into()));
        }
        if times.len() < 2 {
            return Err(Error::Data(format!("a path needs at least 2 samples, got {}", times.len())));
        }
        if values.len() != times.len() * dim {
            return Err(Error::Data(format!(
                "expected {} values for {} samples of dimension {dim}, got {}",
                times.len() * dim,
                times.len(),
                values.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::Data(format!("non-finite sample time {t}")));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!(
                "sample times must be strictly increasing (t[{}] = {} >= t[{}] = {})",
                i,
                times[i],
                i + 1,
                times[i + 1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite sample value {v}")));
        }
        Ok(SampledPath { times, values, dim })
    }

    /// Builds a one-dimensional path.
    pub fn from_scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_flat(times, values, 1)
    }

    /// Samples `f` at the given times.
    pub fn from_fn(times: Vec<f64>, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(times.len() * dim);
        for &t in &times {
            let v = f(t);
            if v.len() != dim {
                return Err(Error::Data(format!("sampler returned {} components, expected {dim}", v.len())));
            }
            values.extend(v);
        }
        Self::from_flat(times, values, dim)
    }

    /// A path that stays at `value` on the given times.
    pub fn constant(times: Vec<f64>, value: &[f64]) -> Result<Self> {
        let values = times.iter().flat_map(|_| value.iter().copied()).collect();
        Self::from_flat(times, values, value.len())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn flat_values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn first_value(&self) -> &[f64] {
        self.value(0)
    }

    pub fn last_value(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    pub fn domain(&self) -> Interval {
        Interval {
            lo: self.start_time(),
            hi: self.end_time(),
        }
    }

    /// Checks that `window` lies in the domain, up to a rounding slack, and
    /// returns it clamped to the domain.
    pub fn check_window(&self, window: Interval) -> Result<Interval> {
        let (a, b) = (self.start_time(), self.end_time());
        if window.lo < a - time_slack(a) || window.hi > b + time_slack(b) {
            return Err(Error::Domain(format!(
                "window [{}, {}] is outside the path domain [{a}, {b}]",
                window.lo, window.hi
            )));
        }
        let lo = window.lo.max(a);
        let hi = window.hi.min(b);
        Ok(Interval { lo, hi: hi.max(lo) })
    }

    /// Index `i` with `times[i] <= t < times[i + 1]`, clamped to the last segment.
    fn segment(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Writes the interpolated value at `t` into `out`; `t` is clamped to the domain.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let d = self.dim;
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        if t <= t0 {
            out.copy_from_slice(self.value(i));
            return;
        }
        if t >= t1 {
            out.copy_from_slice(self.value(i + 1));
            return;
        }
        let w = (t - t0) / (t1 - t0);
        let v0 = &self.values[i * d..(i + 1) * d];
        let v1 = &self.values[(i + 1) * d..(i + 2) * d];
        for k in 0..d {
            out[k] = v0[k] + w * (v1[k] - v0[k]);
        }
    }

    /// Interpolated value at `t`; `t` is clamped to the domain.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// The path on `window`: samples strictly inside plus interpolated endpoints.
    pub fn restrict(&self, window: Interval) -> Result<SampledPath> {
        let w = self.check_window(window)?;
        if w.is_degenerate() {
            return Err(Error::Domain(format!("window [{}, {}] has zero width", w.lo, w.hi)));
        }
        let mut times = vec![w.lo];
        let mut values = self.eval(w.lo);
        let first = self.times.partition_point(|&t| t <= w.lo);
        for i in first..self.len() {
            let t = self.times[i];
            if t >= w.hi {
                break;
            }
            times.push(t);
            values.extend_from_slice(self.value(i));
        }
        times.push(w.hi);
        values.extend(self.eval(w.hi));
        SampledPath::from_flat(times, values, self.dim)
    }

    /// Values at arbitrary times by linear interpolation.
    pub fn resample(&self, times: &[f64]) -> Result<SampledPath> {
        let mut values = vec![0.0; times.len() * self.dim];
        for (k, &t) in times.iter().enumerate() {
            self.check_window(Interval { lo: t, hi: t })?;
            self.eval_into(t, &mut values[k * self.dim..(k + 1) * self.dim]);
        }
        SampledPath::from_flat(times.to_vec(), values, self.dim)
    }

    /// Largest Euclidean norm over the samples.
    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).map(|i| norm(self.value(i))).fold(0.0, f64::max)
    }

    /// `a * self + b * other` on the union of both sample grids over the common domain.
    pub fn combine(&self, a: f64, other: &SampledPath, b: f64) -> Result<SampledPath> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("dimensions differ: {} vs {}", self.dim, other.dim)));
        }
        let lo = self.start_time().max(other.start_time());
        let hi = self.end_time().min(other.end_time());
        if hi <= lo {
            return Err(Error::Domain("paths have no common time interval".into()));
        }
        let times = merge_times(self.times(), other.times(), lo, hi);
        let d = self.dim;
        let mut values = vec![0.0; times.len() * d];
        let mut u = vec![0.0; d];
        let mut v = vec![0.0; d];
        for (k, &t) in times.iter().enumerate() {
            self.eval_into(t, &mut u);
            other.eval_into(t, &mut v);
            for c in 0..d {
                values[k * d + c] = a * u[c] + b * v[c];
            }
        }
        SampledPath::from_flat(times, values, d)
    }

    /// `self - other` on the union grid over the common domain.
    pub fn difference(&self, other: &SampledPath) -> Result<SampledPath> {
        self.combine(1.0, other, -1.0)
    }

    /// Applies `f` to every sample value, producing a path of dimension `dim`.
    pub fn map(&self, dim: usize, f: impl Fn(f64, &[f64]) -> Vec<f64>) -> Result<SampledPath> {
        let times = self.times.clone();
        let mut values = Vec::with_capacity(self.len() * dim);
        for (i, &t) in self.times.iter().enumerate() {
            let v = f(t, self.value(i));
            if v.len() != dim {
                return Err(Error::Data(format!("map returned {} components, expected {dim}", v.len())));
            }
            values.extend(v);
        }
        SampledPath::from_flat(times, values, dim)
    }

    /// Reads a path from CSV with header `t,x1,...,xd`.
    pub fn read_csv<R: Read>(reader: R) -> Result<SampledPath> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Data(format!("csv header: {e}")))?.clone();
        if headers.len() < 2 || headers.get(0).map(str::trim) != Some("t") {
            return Err(Error::Data("csv header must be `t,x1,...,xd`".into()));
        }
        let dim = headers.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(format!("csv row {}: {e}", line + 2)))?;
            if rec.len() != dim + 1 {
                return Err(Error::Data(format!("csv row {}: expected {} fields", line + 2, dim + 1)));
            }
            for (k, field) in rec.iter().enumerate() {
                let x: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Data(format!("csv row {}: cannot parse `{field}`", line + 2)))?;
                if k == 0 {
                    times.push(x);
                } else {
                    values.push(x);
                }
            }
        }
        SampledPath::from_flat(times, values, dim)
    }

    /// Writes the path as CSV with header `t,x1,...,xd`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|k| format!("x{k}")));
        let io = |e: csv::Error| Error::Data(format!("csv write: {e}"));
        w.write_record(&header).map_err(io)?;
        for i in 0..self.len() {
            let mut row = vec![format!("{:?}", self.times[i])];
            row.extend(self.value(i).iter().map(|v| format!("{v:?}")));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Data(format!("csv write: {e}")))?;
        Ok(())
    }
}

/// Euclidean norm.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `|a - b|^p` for the Euclidean norm.
#[inline]
fn dist_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs().powf(p);
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    if p == 2.0 {
        s
    } else {
        s.powf(0.5 * p)
    }
}

/// Sorted union of the times of `a` and `b` inside `(lo, hi)`, plus `lo` and `hi`.
pub(crate) fn merge_times(a: &[f64], b: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out: Vec<f64> = std::iter::once(lo)
        .chain(a.iter().chain(b).copied().filter(|&t| t > lo && t < hi))
        .chain(std::iter::once(hi))
        .collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup();
    out
}

/// Entry `j` is the p-th power of the p-variation of samples `0..=j`.
///
/// Scalar sequences are processed on their running sequence of turning
/// points: a sample strictly inside a monotone run never improves a partition
/// when `p >= 1`, so dropping it from the candidate set keeps the result
/// exact while the scan stays linear in the number of turning points.
pub(crate) fn pvar_profile(values: &[f64], dim: usize, p: f64) -> Vec<f64> {
    let n = values.len() / dim;
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if dim == 1 {
        let mut kept: Vec<(f64, f64)> = vec![(values[0], 0.0)];
        for j in 1..n {
            let x = values[j];
            let mut best = 0.0_f64;
            for &(v, acc) in &kept {
                let c = acc + (x - v).abs().powf(p);
                if c > best {
                    best = c;
                }
            }
            out[j] = best;
            let last = kept.len() - 1;
            let (lv, lacc) = kept[last];
            if x == lv {
                kept[last].1 = lacc.max(best);
            } else if last >= 1 && (lv - kept[last - 1].0) * (x - lv) > 0.0 {
                kept[last] = (x, best);
            } else {
                kept.push((x, best));
            }
        }
        return out;
    }
    for j in 1..n {
        let xj = &values[j * dim..(j + 1) * dim];
        let mut best = 0.0_f64;
        for i in 0..j {
            let c = out[i] + dist_pow(&values[i * dim..(i + 1) * dim], xj, p);
            if c > best {
                best = c;
            }
        }
        out[j] = best;
    }
    out
}

/// p-th power of the p-variation over all samples of `values` (plain DP, no reduction).
#[cfg(test)]
pub(crate) fn pvar_pow_plain(values: &[f64], dim: usize, p: f64) -> f64 {
    let n = values.len() / dim;
    let mut acc = vec![0.0; n];
    for j in 1..n {
        let xj = &values[j * dim..(j + 1) * dim];
        let mut best = 0.0_f64;
        for i in 0..j {
            let c = acc[i] + dist_pow(&values[i * dim..(i + 1) * dim], xj, p);
            if c > best {
                best = c;
            }
        }
        acc[j] = best;
    }
    acc[n - 1]
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::Parameter(format!("exponent p must be >= 1, got {p}")));
    }
    Ok(())
}

/// Exact discrete p-variation seminorm `|||x|||_{p-var, window}`.
pub fn p_variation(path: &SampledPath, p: f64, window: Interval) -> Result<f64> {
    check_p(p)?;
    let w = path.check_window(window)?;
    if w.is_degenerate() {
        return Ok(0.0);
    }
    let r = path.restrict(w)?;
    let prof = pvar_profile(r.flat_values(), r.dim(), p);
    Ok(prof[prof.len() - 1].powf(1.0 / p))
}

/// p-variation over the whole domain of the path.
pub fn p_variation_full(path: &SampledPath, p: f64) -> Result<f64> {
    p_variation(path, p, path.domain())
}

/// `|x_lo| + |||x|||_{p-var, window}`, the inhomogeneous p-variation norm.
pub fn p_variation_norm(path: &SampledPath, p: f64, window: Interval) -> Result<f64> {
    let w = path.check_window(window)?;
    Ok(norm(&path.eval(w.lo)) + p_variation(path, p, w)?)
}

/// p-variation on `[times[start], times[j]]` for every `j >= start`, over
/// the path's own samples. Entry `k` corresponds to `j = start + k`.
pub fn p_variation_from(path: &SampledPath, p: f64, start: usize) -> Result<Vec<f64>> {
    check_p(p)?;
    if start >= path.len() {
        return Err(Error::Domain(format!("start index {start} beyond {} samples", path.len())));
    }
    let d = path.dim();
    let prof = pvar_profile(&path.flat_values()[start * d..], d, p);
    Ok(prof.into_iter().map(|v| v.powf(1.0 / p)).collect())
}

/// Maximum number of samples accepted by [`p_variation_bruteforce`].
pub const BRUTEFORCE_MAX_POINTS: usize = 20;

/// Exhaustive maximum over all sub-partitions of the window's samples.
pub fn p_variation_bruteforce(path: &SampledPath, p: f64, window: Interval) -> Result<f64> {
    check_p(p)?;
    let w = path.check_window(window)?;
    if w.is_degenerate() {
        return Ok(0.0);
    }
    let r = path.restrict(w)?;
    let n = r.len();
    if n > BRUTEFORCE_MAX_POINTS {
        return Err(Error::Size(format!(
            "brute force is limited to {BRUTEFORCE_MAX_POINTS} points, window has {n}"
        )));
    }
    let interior = n - 2;
    let mut best = 0.0_f64;
    let mut idx = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << interior) {
        idx.clear();
        idx.push(0);
        idx.extend((0..interior).filter(|k| mask & (1 << k) != 0).map(|k| k + 1));
        idx.push(n - 1);
        let s: f64 = idx.windows(2).map(|w| dist_pow(r.value(w[0]), r.value(w[1]), p)).sum();
        if s > best {
            best = s;
        }
    }
    Ok(best.powf(1.0 / p))
}

/// Discrete α-Hölder seminorm: max over sample pairs of `|x_t - x_s| / (t - s)^α`.
pub fn holder_norm(path: &SampledPath, alpha: f64, window: Interval) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    let w = path.check_window(window)?;
    if w.is_degenerate() {
        return Ok(0.0);
    }
    let r = path.restrict(w)?;
    let t = r.times();
    let mut best = 0.0_f64;
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let inc = dist_pow(r.value(i), r.value(j), 1.0);
            let h = inc / (t[j] - t[i]).powf(alpha);
            if h > best {
                best = h;
            }
        }
    }
    Ok(best)
}

/// Joins two paths whose end and start agree in time and value (to 1e-12).
pub fn concatenate(first: &SampledPath, second: &SampledPath) -> Result<SampledPath> {
    if first.dim() != second.dim() {
        return Err(Error::Join(format!("dimensions differ: {} vs {}", first.dim(), second.dim())));
    }
    let (a, b) = (first.end_time(), second.start_time());
    if (a - b).abs() > time_slack(a) {
        return Err(Error::Join(format!("first path ends at {a} but second starts at {b}")));
    }
    let gap = dist_pow(first.last_value(), second.first_value(), 1.0);
    if gap > 1e-12 {
        return Err(Error::Join(format!("values at the junction differ by {gap}")));
    }
    let mut times = first.times().to_vec();
    times.extend_from_slice(&second.times()[1..]);
    let mut values = first.flat_values().to_vec();
    values.extend_from_slice(&second.flat_values()[second.dim()..]);
    SampledPath::from_flat(times, values, first.dim())
}

/// Truncated whole-line metric
/// `sum_{n=1}^{cap} 2^{-n} D_n / (1 + D_n)` with
/// `D_n = ||w1 - w2||_{p-var, [-n, n]}`, windows clamped to the common domain.
///
/// The neglected tail is at most `2^{-cap}`.
pub fn metric_d(w1: &SampledPath, w2: &SampledPath, p: f64, radius_cap: u32) -> Result<f64> {
    check_p(p)?;
    if radius_cap < 1 {
        return Err(Error::Parameter("radius cap must be at least 1".into()));
    }
    let diff = w1.difference(w2)?;
    let dom = diff.domain();
    let mut total = 0.0;
    for n in 1..=radius_cap {
        let r = f64::from(n);
        let lo = (-r).max(dom.lo);
        let hi = r.min(dom.hi);
        let dn = if hi > lo {
            p_variation_norm(&diff, p, Interval { lo, hi })?
        } else if hi == lo {
            norm(&diff.eval(lo))
        } else {
            0.0
        };
        total += 0.5_f64.powi(n as i32) * dn / (1.0 + dn);
    }
    Ok(total)
}

/// A nonnegative function on the time simplex, zero on the diagonal and superadditive.
pub trait ControlFunction: Send + Sync {
    fn eval(&self, s: f64, t: f64) -> f64;
}

impl<F> ControlFunction for F
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn eval(&self, s: f64, t: f64) -> f64 {
        self(s, t)
    }
}

/// `(s, t) -> |||x|||^p_{p-var, [s, t]}`.
pub struct VariationControl<'a> {
    pub path: &'a SampledPath,
    pub p: f64,
}

impl ControlFunction for VariationControl<'_> {
    fn eval(&self, s: f64, t: f64) -> f64 {
        p_variation(self.path, self.p, Interval { lo: s, hi: t })
            .map(|v| v.powf(self.p))
            .unwrap_or(f64::NAN)
    }
}

/// Outcome of checking the control-function axioms on a set of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlCheck {
    pub ok: bool,
    /// Largest `c(s,t) + c(t,u) - c(s,u)` found (or diagonal value).
    pub worst_excess: f64,
    /// Triple `(s, t, u)` attaining the worst excess.
    pub worst_triple: Option<(f64, f64, f64)>,
}

/// Checks nonnegativity, vanishing on the diagonal and superadditivity on all
/// triples `s <= t <= u` drawn from `times`.
pub fn check_control(control: &dyn ControlFunction, times: &[f64], tol: f64) -> ControlCheck {
    let n = times.len();
    let mut table = vec![0.0; n * n];
    let mut worst = f64::NEG_INFINITY;
    let mut triple = None;
    for i in 0..n {
        for j in i..n {
            let v = control.eval(times[i], times[j]);
            table[i * n + j] = v;
            let bad = if i == j { v.abs() } else { -v };
            if bad > worst {
                worst = bad;
                triple = Some((times[i], times[j], times[j]));
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let excess = table[i * n + j] + table[j * n + k] - table[i * n + k];
                if excess > worst || excess.is_nan() {
                    worst = if excess.is_nan() { f64::INFINITY } else { excess };
                    triple = Some((times[i], times[j], times[k]));
                }
            }
        }
    }
    ControlCheck {
        ok: worst <= tol,
        worst_excess: worst,
        worst_triple: triple,
    }
}

/// Right-hand side `sum_j C_j c_j(s, t)^{1/p}`.
fn dominating_sum(controls: &[(f64, &dyn ControlFunction)], p: f64, s: f64, t: f64) -> f64 {
    controls.iter().map(|(c, f)| c * f.eval(s, t).max(0.0).powf(1.0 / p)).sum()
}

/// Checks the pointwise hypothesis `|x_t - x_s| <= sum_j C_j c_j(s,t)^{1/p}`
/// on all sample pairs of the window.
pub fn pointwise_domination(
    path: &SampledPath,
    p: f64,
    controls: &[(f64, &dyn ControlFunction)],
    window: Interval,
) -> Result<bool> {
    check_p(p)?;
    let w = path.check_window(window)?;
    if w.is_degenerate() {
        return Ok(true);
    }
    let r = path.restrict(w)?;
    let t = r.times();
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let lhs = dist_pow(r.value(i), r.value(j), 1.0);
            let rhs = dominating_sum(controls, p, t[i], t[j]);
            if lhs > rhs + 1e-10 * (1.0 + rhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks `|||x|||_{p-var,[s,t]} <= sum_j C_j c_j(s,t)^{1/p}` on every window
/// spanned by two samples of `window`. Cost is quadratic in the number of
/// samples times the cost of one control evaluation.
pub fn dominated_variation_bound(
    path: &SampledPath,
    p: f64,
    controls: &[(f64, &dyn ControlFunction)],
    window: Interval,
) -> Result<bool> {
    check_p(p)?;
    let w = path.check_window(window)?;
    if w.is_degenerate() {
        return Ok(true);
    }
    let r = path.restrict(w)?;
    let t = r.times();
    for i in 0..r.len() - 1 {
        let var = p_variation_from(&r, p, i)?;
        for (k, v) in var.iter().enumerate().skip(1) {
            let rhs = dominating_sum(controls, p, t[i], t[i + k]);
            if *v > rhs + 1e-10 * (1.0 + rhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
