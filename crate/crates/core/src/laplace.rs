//! Inversion of the Laplace transform along the imaginary axis.
//!
//! For `t > 0` the homogeneous solution is
//! `u1(x,t) = (1/π) ∫₀^∞ Re[G(s) e^{ist}] ds` with
//! `G(s) = ∫₀¹ g(√(is), x, y) f(y) dy`, the half-line form of the symmetric
//! principal-value integral (`G(-s)` is the conjugate of `G(s)`).
//!
//! The s-integral uses Gauss panels whose width follows the period `2π/t`,
//! evaluated up to dyadic checkpoints. At each checkpoint the remaining
//! tail `∫_S^∞` is approximated by three integration-by-parts terms and the
//! change between checkpoints serves as the error estimate.
//!
//! With tail subtraction, `f(x)/(λ + is)` (`λ = π²`) is removed from `G` and
//! reinstated exactly as `f(x) e^{-λt}`; the remainder decays like `1/s²`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::duhamel;
use crate::error::{finite, Error, Result};
use crate::kernel::{modulus_closed, Frequency, KernelSlice, SpatialPair};
use crate::quad::GaussLegendre;
use crate::series::{self, Forcing, Profile, SeriesConfig};

/// Shift of the subtracted pole; keeps it off the integration axis.
const SHIFT: f64 = PI * PI;
/// Widest s-panel. Singularities of the integrand sit at distance `π²` from
/// the real axis, so 5-point panels of this width stay spectrally accurate.
const MAX_S_PANEL: f64 = 2.0;
const S_NODES: usize = 5;
const FIRST_CHECKPOINT: usize = 16;
const Y_NODES: usize = 10;
const MAX_Y_PANEL: f64 = 0.125;
const GRADING: f64 = 1.5;
/// `e^{-Re(m) d}` below `e^{-40}` is dropped from the y-integral.
const DECAY_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub s_max: f64,
    pub panels_per_period: usize,
    pub tolerance: f64,
    pub tail_subtraction: bool,
    /// Propagation times below this are handed to the series propagator.
    pub crossover: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            s_max: 1e4,
            panels_per_period: 8,
            tolerance: 1e-7,
            tail_subtraction: true,
            crossover: 0.05,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_max > 0.0) || !self.s_max.is_finite() {
            return Err(Error::domain("inversion: s_max must be positive and finite"));
        }
        if self.panels_per_period < 4 {
            return Err(Error::domain("inversion: panels_per_period must be at least 4"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("inversion: tolerance must be positive"));
        }
        if !(self.crossover >= 0.0) {
            return Err(Error::domain("inversion: crossover must be non-negative"));
        }
        Ok(())
    }

    fn panel_width(&self, t: f64) -> f64 {
        (2.0 * PI / (self.panels_per_period as f64 * t)).min(MAX_S_PANEL)
    }
}

/// Which parts of a result came from the series propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    None,
    /// Short propagation times of a Duhamel integral.
    Endpoint,
    /// The whole value.
    Full,
}

impl Fallback {
    pub fn as_str(self) -> &'static str {
        match self {
            Fallback::None => "none",
            Fallback::Endpoint => "endpoint",
            Fallback::Full => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    pub error: f64,
    /// Frequency cutoff at which the estimate passed.
    pub s_used: f64,
    pub fallback: Fallback,
}

impl Inversion {
    fn exact_zero() -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            s_used: 0.0,
            fallback: Fallback::None,
        }
    }
}

/// `∫₀¹ g(√(is), x, y) f(y) dy` by `quad_order`-point Gauss-Legendre on
/// each side of `y = x`.
pub fn transform_at(f: Profile, x: f64, s: Frequency, quad_order: usize) -> Result<Complex64> {
    SpatialPair::new(x, x)?;
    if quad_order == 0 {
        return Err(Error::domain("quadrature order must be positive"));
    }
    let slice = KernelSlice::new(s.value(), x);
    let rule = GaussLegendre::cached(quad_order);
    let mut sum = Complex64::new(0.0, 0.0);
    for (a, b) in [(0.0, x), (x, 1.0)] {
        if a == b {
            continue;
        }
        for (y, w) in rule.mapped(a, b) {
            sum += slice.eval(y) * (w * finite(f(y)?, "initial data", y)?);
        }
    }
    Ok(sum)
}

/// Breakpoints graded geometrically away from `from` towards `to`
/// (exclusive of `from`, inclusive of `to`).
fn graded(from: f64, to: f64, h0: f64, out: &mut Vec<f64>) {
    let len = (to - from).abs();
    let dir = (to - from).signum();
    let mut pos = 0.0;
    let mut h = h0.min(MAX_Y_PANEL);
    while pos < len {
        let next = pos + h;
        if next >= len || len - next < 0.5 * h {
            out.push(to);
            break;
        }
        out.push(from + dir * next);
        pos = next;
        h = (h * GRADING).min(MAX_Y_PANEL);
    }
}

/// Gauss nodes and weights between the kink at `kink` and `end`, refined
/// towards the kink. Within `reach` of the kink the whole side is covered
/// and refined towards `end` as well; otherwise it stops at `reach`.
fn side_mesh(kink: f64, end: f64, reach: f64, h0: f64, ys: &mut Vec<f64>, ws: &mut Vec<f64>) {
    let len = (end - kink).abs();
    if len == 0.0 {
        return;
    }
    let mut cuts = vec![kink];
    if reach >= len {
        let mid = 0.5 * (kink + end);
        graded(kink, mid, h0, &mut cuts);
        let mut back = Vec::new();
        graded(end, mid, h0, &mut back);
        back.pop();
        back.reverse();
        cuts.extend(back);
        cuts.push(end);
    } else {
        let stop = kink + (end - kink).signum() * reach;
        graded(kink, stop, h0, &mut cuts);
    }
    let rule = GaussLegendre::cached(Y_NODES);
    for pair in cuts.windows(2) {
        let (a, b) = if pair[0] < pair[1] {
            (pair[0], pair[1])
        } else {
            (pair[1], pair[0])
        };
        for (y, w) in rule.mapped(a, b) {
            ys.push(y);
            ws.push(w);
        }
    }
}

/// y-nodes shared by all frequencies whose `|m|` falls in one octave.
struct Band {
    ys: Vec<f64>,
    /// Per column: quadrature weight times column value.
    wf: Vec<Vec<f64>>,
}

fn band_key(m_abs: f64) -> i32 {
    if m_abs < 1.0 {
        i32::MIN
    } else {
        m_abs.log2().floor() as i32
    }
}

fn band_mesh(x: f64, key: i32) -> (Vec<f64>, Vec<f64>) {
    let (h0, reach) = if key == i32::MIN {
        (MAX_Y_PANEL, f64::INFINITY)
    } else {
        let lo = 2f64.powi(key);
        let hi = 2.0 * lo;
        (1.0 / hi, DECAY_CUTOFF * std::f64::consts::SQRT_2 / lo)
    };
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    side_mesh(x, 0.0, reach, h0, &mut ys, &mut ws);
    side_mesh(x, 1.0, reach, h0, &mut ys, &mut ws);
    (ys, ws)
}

/// `G_j(s)` for several profiles at one `x`.
struct Transform<'a> {
    x: f64,
    columns: Vec<Box<dyn Fn(f64) -> Result<f64> + 'a>>,
    at_x: Vec<f64>,
    bands: HashMap<i32, Arc<Band>>,
    kernel: Vec<Complex64>,
}

impl<'a> Transform<'a> {
    fn new(x: f64, columns: Vec<Box<dyn Fn(f64) -> Result<f64> + 'a>>) -> Result<Self> {
        let at_x = columns
            .iter()
            .map(|c| finite(c(x)?, "initial data", x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x,
            columns,
            at_x,
            bands: HashMap::new(),
            kernel: Vec::new(),
        })
    }

    fn band(&mut self, key: i32) -> Result<Arc<Band>> {
        if let Some(b) = self.bands.get(&key) {
            return Ok(b.clone());
        }
        let (ys, ws) = band_mesh(self.x, key);
        let mut wf = Vec::with_capacity(self.columns.len());
        for c in &self.columns {
            let col = ys
                .iter()
                .zip(&ws)
                .map(|(&y, &w)| Ok(w * finite(c(y)?, "initial data", y)?))
                .collect::<Result<Vec<_>>>()?;
            wf.push(col);
        }
        let band = Arc::new(Band { ys, wf });
        self.bands.insert(key, band.clone());
        Ok(band)
    }

    /// Writes `G_j(s)` into `out[j]` for every `j` with `active[j]`.
    fn values(&mut self, s: f64, active: &[bool], out: &mut [Complex64]) -> Result<()> {
        let slice = KernelSlice::new(s, self.x);
        let band = self.band(band_key(slice.modulus_of_m()))?;
        self.kernel.clear();
        self.kernel.extend(band.ys.iter().map(|&y| slice.eval(y)));
        for (j, col) in band.wf.iter().enumerate() {
            if !active[j] {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, w) in self.kernel.iter().zip(col) {
                acc += k * w;
            }
            out[j] = acc;
        }
        Ok(())
    }
}

/// One requested inversion: column `column` propagated over `tau`.
#[derive(Debug, Clone, Copy)]
struct Job {
    column: usize,
    tau: f64,
}

struct JobState {
    acc: f64,
    prev: Option<f64>,
    result: Option<Result<Inversion>>,
}

fn subtracted(fx: f64, s: f64, on: bool) -> Complex64 {
    if on {
        Complex64::new(fx, 0.0) / Complex64::new(SHIFT, s)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Runs the jobs sharing one panel width; results land in `states`.
fn run_group(
    tr: &mut Transform,
    jobs: &[Job],
    members: &[usize],
    width: f64,
    cfg: &InversionConfig,
    states: &mut [JobState],
) -> Result<()> {
    let ncol = tr.columns.len();
    let rule = GaussLegendre::cached(S_NODES);
    let mut g = vec![Complex64::new(0.0, 0.0); ncol];
    let mut done_panels = 0usize;
    let mut checkpoint = FIRST_CHECKPOINT;
    let mut g3 = [vec![Complex64::new(0.0, 0.0); ncol], vec![Complex64::new(0.0, 0.0); ncol], vec![Complex64::new(0.0, 0.0); ncol]];
    loop {
        let mut active = vec![false; ncol];
        for &i in members {
            if states[i].result.is_none() {
                active[jobs[i].column] = true;
            }
        }
        if !active.iter().any(|&a| a) {
            return Ok(());
        }
        for p in done_panels..checkpoint {
            let a = p as f64 * width;
            for (s, w) in rule.mapped(a, a + width) {
                tr.values(s, &active, &mut g)?;
                for &i in members {
                    if states[i].result.is_some() {
                        continue;
                    }
                    let job = jobs[i];
                    let r = g[job.column] - subtracted(tr.at_x[job.column], s, cfg.tail_subtraction);
                    states[i].acc += w * (r * Complex64::cis(s * job.tau)).re;
                }
            }
        }
        let big_s = checkpoint as f64 * width;
        let delta = big_s / 64.0;
        for (k, off) in [-delta, 0.0, delta].into_iter().enumerate() {
            tr.values(big_s + off, &active, &mut g3[k])?;
        }
        let next_s = 2.0 * big_s;
        for &i in members {
            if states[i].result.is_some() {
                continue;
            }
            let job = jobs[i];
            let fx = tr.at_x[job.column];
            let r: Vec<Complex64> = (0..3)
                .map(|k| {
                    let s = big_s + (k as f64 - 1.0) * delta;
                    g3[k][job.column] - subtracted(fx, s, cfg.tail_subtraction)
                })
                .collect();
            let r0 = r[1];
            let r1 = (r[2] - r[0]) / (2.0 * delta);
            let r2 = (r[2] - 2.0 * r[1] + r[0]) / (delta * delta);
            let it = Complex64::new(0.0, job.tau);
            let tail = Complex64::cis(big_s * job.tau) * (-r0 / it + r1 / (it * it) - r2 / (it * it * it));
            let mut value = (states[i].acc + tail.re) / PI;
            if cfg.tail_subtraction {
                value += fx * (-SHIFT * job.tau).exp();
            }
            if !value.is_finite() {
                states[i].result = Some(Err(Error::NonFinite {
                    what: "inversion integral",
                    at: job.tau,
                }));
                continue;
            }
            if let Some(prev) = states[i].prev {
                let change = (value - prev).abs();
                if change < cfg.tolerance {
                    states[i].result = Some(Ok(Inversion {
                        value,
                        error: change,
                        s_used: big_s,
                        fallback: Fallback::None,
                    }));
                    continue;
                }
                if next_s > cfg.s_max {
                    states[i].result = Some(Err(Error::ToleranceUnreachable {
                        what: format!("inversion integral at t = {} (s_max = {})", job.tau, cfg.s_max),
                        estimate: change,
                        tolerance: cfg.tolerance,
                    }));
                    continue;
                }
            } else if next_s > cfg.s_max {
                states[i].result = Some(Err(Error::ToleranceUnreachable {
                    what: format!("inversion integral at t = {} (s_max = {})", job.tau, cfg.s_max),
                    estimate: f64::INFINITY,
                    tolerance: cfg.tolerance,
                }));
                continue;
            }
            states[i].prev = Some(value);
        }
        done_panels = checkpoint;
        checkpoint *= 2;
    }
}

/// Inverts every job; jobs are grouped by panel width (an octave of
/// `2π / (ppp·τ)`) so each group shares its kernel rows.
fn invert(tr: &mut Transform, jobs: &[Job], cfg: &InversionConfig) -> Result<Vec<Result<Inversion>>> {
    let mut states: Vec<JobState> = jobs
        .iter()
        .map(|_| JobState {
            acc: 0.0,
            prev: None,
            result: None,
        })
        .collect();
    let mut groups: Vec<(i32, Vec<usize>)> = Vec::new();
    for (i, job) in jobs.iter().enumerate() {
        let w = cfg.panel_width(job.tau);
        let level = w.log2().floor() as i32;
        match groups.iter_mut().find(|(l, _)| *l == level) {
            Some((_, members)) => members.push(i),
            None => groups.push((level, vec![i])),
        }
    }
    groups.sort_by_key(|(l, _)| *l);
    for (level, members) in &groups {
        let width = 2f64.powi(*level).min(MAX_S_PANEL);
        run_group(tr, jobs, members, width, cfg, &mut states)?;
    }
    Ok(states
        .into_iter()
        .map(|s| s.result.expect("every job finishes"))
        .collect())
}

fn check_x(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("inversion needs finite t > 0, got {t}")));
    }
    Ok(())
}

/// `u1(x, t)` by inversion of the transform.
pub fn u1_laplace(f: Profile, x: f64, t: f64, cfg: &InversionConfig) -> Result<Inversion> {
    u1_laplace_times(f, x, &[t], cfg)?.pop().expect("one time")
}

/// `u1(x, t)` for several times at one `x`, sharing transform evaluations.
pub fn u1_laplace_times(
    f: Profile,
    x: f64,
    times: &[f64],
    cfg: &InversionConfig,
) -> Result<Vec<Result<Inversion>>> {
    cfg.validate()?;
    check_x(x)?;
    for &t in times {
        check_t(t)?;
    }
    if x == 0.0 || x == 1.0 {
        return Ok(times.iter().map(|_| Ok(Inversion::exact_zero())).collect());
    }
    let mut tr = Transform::new(x, vec![Box::new(f)])?;
    let jobs: Vec<Job> = times.iter().map(|&tau| Job { column: 0, tau }).collect();
    invert(&mut tr, &jobs, cfg)
}

/// Forced solution `u2(x, t)` by Duhamel composition of the inversion
/// propagator. Propagation times below `cfg.crossover` use the series.
pub fn u2_laplace(
    forcing: Forcing,
    x: f64,
    t: f64,
    singular_at_t0: bool,
    cfg: &InversionConfig,
    series_cfg: &SeriesConfig,
) -> Result<Inversion> {
    cfg.validate()?;
    check_x(x)?;
    check_t(t)?;
    if x == 0.0 || x == 1.0 {
        return Ok(Inversion::exact_zero());
    }
    let time_tolerance = 10.0 * cfg.tolerance;
    if t < cfg.crossover {
        let e = series::u2_series_estimate(forcing, x, t, singular_at_t0, series_cfg, time_tolerance)?;
        return Ok(Inversion {
            value: e.value,
            error: e.error,
            s_used: 0.0,
            fallback: Fallback::Full,
        });
    }
    let mut s_used = 0.0f64;
    let mut used_series = false;
    let integral = duhamel::integrate(t, singular_at_t0, time_tolerance, |sigmas| {
        let mut out = vec![0.0; sigmas.len()];
        let mut columns: Vec<Box<dyn Fn(f64) -> Result<f64> + '_>> = Vec::new();
        let mut jobs = Vec::new();
        let mut slots = Vec::new();
        for (k, &sigma) in sigmas.iter().enumerate() {
            let tau = t - sigma;
            if tau < cfg.crossover {
                used_series = true;
                let column = move |y: f64| forcing(y, sigma);
                out[k] = series::propagate(&column, x, tau, series_cfg)?.value;
            } else {
                jobs.push(Job {
                    column: columns.len(),
                    tau,
                });
                columns.push(Box::new(move |y: f64| forcing(y, sigma)));
                slots.push(k);
            }
        }
        if !jobs.is_empty() {
            let mut tr = Transform::new(x, columns)?;
            for (slot, r) in slots.into_iter().zip(invert(&mut tr, &jobs, cfg)?) {
                let inv = r?;
                s_used = s_used.max(inv.s_used);
                out[slot] = inv.value;
            }
        }
        Ok(out)
    })?;
    Ok(Inversion {
        value: integral.value,
        error: integral.error,
        s_used,
        fallback: if used_series {
            Fallback::Endpoint
        } else {
            Fallback::None
        },
    })
}

/// Frequency cutoff needed by plain truncation: the smallest `S` on a grid
/// of ratio `2^{1/8}` beyond which the amplitude `|R(s)| / (πt)` of the
/// neglected tail stays below `cfg.tolerance`, where `R` is the integrand
/// with or without tail subtraction per `cfg`. The scan stops at `1e12`;
/// `f64::INFINITY` means the tolerance was not reached by then.
pub fn required_cutoff(f: Profile, x: f64, t: f64, cfg: &InversionConfig) -> Result<f64> {
    cfg.validate()?;
    check_x(x)?;
    check_t(t)?;
    let mut tr = Transform::new(x, vec![Box::new(f)])?;
    let fx = tr.at_x[0];
    let mut g = [Complex64::new(0.0, 0.0)];
    let mut required = f64::INFINITY;
    let mut last_ok = false;
    for k in 0..=8 * 40 {
        let s = 2f64.powf(k as f64 / 8.0);
        if s > 1e12 {
            break;
        }
        tr.values(s, &[true], &mut g)?;
        let r = g[0] - subtracted(fx, s, cfg.tail_subtraction);
        let ok = r.norm() / (PI * t) < cfg.tolerance;
        if ok && !last_ok {
            required = s;
        }
        if !ok {
            required = f64::INFINITY;
        }
        last_ok = ok;
    }
    if last_ok && required == 1.0 {
        // already below tolerance on the whole grid
        required = 0.0;
    }
    Ok(required)
}

/// Truncated inversion integrals over `[0, s_cut]` (half-line real form,
/// returned first) and over `[-s_cut, s_cut]` (full-line complex form),
/// without tail subtraction or tail correction.
pub fn truncated_forms(
    f: Profile,
    x: f64,
    t: f64,
    s_cut: f64,
    cfg: &InversionConfig,
) -> Result<(f64, Complex64)> {
    cfg.validate()?;
    check_x(x)?;
    check_t(t)?;
    let mut tr = Transform::new(x, vec![Box::new(f)])?;
    let width = cfg.panel_width(t);
    let panels = (s_cut / width).ceil().max(1.0) as usize;
    let width = s_cut / panels as f64;
    let rule = GaussLegendre::cached(S_NODES);
    let active = [true];
    let mut g = [Complex64::new(0.0, 0.0)];
    let mut half = 0.0;
    let mut full = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let a = p as f64 * width;
        for (s, w) in rule.mapped(a, a + width) {
            tr.values(s, &active, &mut g)?;
            let pos = g[0] * Complex64::cis(s * t);
            half += w * pos.re;
            tr.values(-s, &active, &mut g)?;
            let neg = g[0] * Complex64::cis(-s * t);
            full += w * (pos + neg);
        }
    }
    Ok((half / PI, full / (2.0 * PI)))
}

/// `(s, √|s| · |g(√(is), x, x)|)` along `s_values`.
pub fn limit_study(x: f64, s_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!(
            "limit study needs x strictly inside (0, 1), got {x}"
        )));
    }
    let p = SpatialPair::new(x, x)?;
    s_values
        .iter()
        .map(|&s| {
            let freq = Frequency::new(s)?;
            Ok((s, s.abs().sqrt() * modulus_closed(freq, p)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_pi(y: f64) -> Result<f64> {
        Ok((PI * y).sin())
    }

    fn combo(y: f64) -> Result<f64> {
        Ok((PI * y).sin() + 0.3 * (3.0 * PI * y).sin())
    }

    #[test]
    fn graded_mesh_covers_interval() {
        for &x in &[0.0, 0.03, 0.5, 0.97, 1.0] {
            for key in [i32::MIN, 0, 3, 8, 14] {
                let (ys, ws) = band_mesh(x, key);
                assert!(ys.iter().all(|y| (0.0..=1.0).contains(y)));
                let total: f64 = ws.iter().sum();
                assert!(total <= 1.0 + 1e-12);
                if key == i32::MIN || key <= 3 {
                    assert!((total - 1.0).abs() < 1e-12, "x={x} key={key} total={total}");
                }
            }
        }
    }

    #[test]
    fn transform_of_eigenfunction() {
        for &s in &[0.0, 0.7, 5.0, -3.0, 40.0] {
            for &x in &[0.2, 0.5, 0.9] {
                let got = transform_at(&sin_pi, x, Frequency::new(s).unwrap(), 40).unwrap();
                let want = Complex64::new((PI * x).sin(), 0.0) / Complex64::new(PI * PI, s);
                assert!((got - want).norm() < 1e-12, "s={s} x={x}: {got} vs {want}");
            }
        }
        let z = transform_at(&combo, 0.0, Frequency::new(3.0).unwrap(), 20).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn banded_transform_matches_eigenfunction_at_large_s() {
        let mut tr = Transform::new(0.37, vec![Box::new(sin_pi)]).unwrap();
        let mut g = [Complex64::new(0.0, 0.0)];
        for &s in &[0.3, 12.0, 700.0, 3.0e4, 2.0e6] {
            tr.values(s, &[true], &mut g).unwrap();
            let want = Complex64::new((PI * 0.37).sin(), 0.0) / Complex64::new(PI * PI, s);
            assert!((g[0] - want).norm() < 1e-13 * want.norm(), "s={s}");
        }
    }

    #[test]
    fn conjugate_symmetry_of_transform() {
        let mut tr = Transform::new(0.61, vec![Box::new(combo)]).unwrap();
        let (mut a, mut b) = ([Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0)]);
        for &s in &[0.5, 9.0, 250.0] {
            tr.values(s, &[true], &mut a).unwrap();
            tr.values(-s, &[true], &mut b).unwrap();
            assert!((a[0] - b[0].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn u1_single_mode() {
        let cfg = InversionConfig::default();
        let r = u1_laplace(&sin_pi, 0.5, 0.1, &cfg).unwrap();
        assert!((r.value - (-PI * PI * 0.1).exp()).abs() < 1e-7, "{r:?}");
        let z = u1_laplace(&combo, 0.0, 0.3, &cfg).unwrap();
        assert_eq!(z.value, 0.0);
        let z = u1_laplace(&combo, 1.0, 0.3, &cfg).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(u1_laplace(&combo, 0.5, 0.0, &cfg).is_err());
    }

    #[test]
    fn u1_combo_matches_modes_with_and_without_subtraction() {
        for sub in [true, false] {
            let cfg = InversionConfig {
                tail_subtraction: sub,
                ..Default::default()
            };
            let times = [0.05, 0.2, 1.0];
            for &x in &[0.15, 0.5, 0.85] {
                let got = u1_laplace_times(&combo, x, &times, &cfg).unwrap();
                for (r, &t) in got.iter().zip(&times) {
                    let r = r.as_ref().unwrap();
                    let exact = (-PI * PI * t).exp() * (PI * x).sin()
                        + 0.3 * (-9.0 * PI * PI * t).exp() * (3.0 * PI * x).sin();
                    assert!((r.value - exact).abs() < 1e-6, "sub={sub} x={x} t={t}: {r:?} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn half_line_equals_full_line() {
        let cfg = InversionConfig::default();
        for &(x, t) in &[(0.3, 0.2), (0.7, 0.5)] {
            let (half, full) = truncated_forms(&combo, x, t, 60.0, &cfg).unwrap();
            assert!((half - full.re).abs() < 1e-10);
            assert!(full.im.abs() < 1e-10);
        }
    }

    #[test]
    fn unreachable_cutoff_is_reported() {
        let cfg = InversionConfig {
            s_max: 50.0,
            tail_subtraction: false,
            ..Default::default()
        };
        let parabola = |y: f64| Ok(y * (1.0 - y));
        let err = u1_laplace(&parabola, 0.05, 0.05, &cfg).unwrap_err();
        assert!(matches!(err, Error::ToleranceUnreachable { .. }), "{err:?}");
    }

    #[test]
    fn u2_constant_modal_forcing() {
        let cfg = InversionConfig::default();
        let scfg = SeriesConfig::default();
        let forcing = |x: f64, _t: f64| Ok((2.0 * PI * x).sin());
        let x = 0.3;
        let t = 0.3;
        let r = u2_laplace(&forcing, x, t, false, &cfg, &scfg).unwrap();
        let exact = (1.0 - (-4.0 * PI * PI * t).exp()) / (4.0 * PI * PI) * (2.0 * PI * x).sin();
        assert!((r.value - exact).abs() < 1e-6, "{r:?} vs {exact}");
        assert_eq!(r.fallback, Fallback::Endpoint);
        let early = u2_laplace(&forcing, x, 0.01, false, &cfg, &scfg).unwrap();
        assert_eq!(early.fallback, Fallback::Full);
    }

    #[test]
    fn limit_study_examples() {
        let v = limit_study(0.5, &[0.0, 1e6]).unwrap();
        assert_eq!(v[0], (0.0, 0.0));
        assert!((v[1].1 - 0.5).abs() < 2e-3);
        assert!(limit_study(0.0, &[1.0]).is_err());
        assert!(limit_study(1.0, &[1.0]).is_err());
        let sweep: Vec<f64> = (2..=10).map(|k| 10f64.powi(k)).collect();
        let v = limit_study(0.1, &sweep).unwrap();
        assert!((v.last().unwrap().1 - 0.5).abs() < 1e-4);
    }
}
