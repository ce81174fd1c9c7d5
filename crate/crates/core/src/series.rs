//! Fourier sine-series solutions of the Dirichlet heat problem.
//!
//! With `b_n = ∫ f(y) sin(nπy) dy` the homogeneous solution is
//! `u1(x,t) = 2 Σ b_n e^{-n²π²t} sin(nπx)`. The forced solution is obtained
//! by Duhamel composition of the same propagator.

use std::f64::consts::PI;

use crate::duhamel;
use crate::error::{finite, Error, Result};
use crate::quad::{self, GaussLegendre, Tolerance};
use crate::Estimate;

/// A function of the space variable on [0, 1].
pub type Profile<'a> = &'a (dyn Fn(f64) -> Result<f64> + Sync);

/// A function of `(x, t)`.
pub type Forcing<'a> = &'a (dyn Fn(f64, f64) -> Result<f64> + Sync);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub max_terms: usize,
    pub coeff_quadrature_order: usize,
    pub tail_tolerance: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            max_terms: 1000,
            coeff_quadrature_order: 64,
            tail_tolerance: 1e-12,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms == 0 || self.coeff_quadrature_order == 0 {
            return Err(Error::domain("series: max_terms and quadrature order must be positive"));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::domain("series: tail_tolerance must be positive"));
        }
        Ok(())
    }

    fn order_for(&self, terms: usize) -> usize {
        self.coeff_quadrature_order.max(2 * terms + 16)
    }
}

/// Sine coefficients `b[n-1] = ∫ f(y) sin(nπy) dy`, `n = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineCoefficients {
    pub b: Vec<f64>,
}

/// Bound on `Σ_{n>N} 2 B e^{-n²π²t}` for coefficients bounded by `B`.
pub fn tail_bound(b_max: f64, n: usize, t: f64) -> f64 {
    if b_max == 0.0 {
        return 0.0;
    }
    let k = (n + 1) as f64;
    let lead = (-k * k * PI * PI * t).exp();
    let ratio = (-(2.0 * k + 1.0) * PI * PI * t).exp();
    2.0 * b_max * lead / (1.0 - ratio)
}

fn sampled(f: Profile, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = GaussLegendre::cached(order);
    let mut ys = Vec::with_capacity(order);
    let mut wf = Vec::with_capacity(order);
    for (y, w) in rule.mapped(0.0, 1.0) {
        ys.push(y);
        wf.push(w * finite(f(y)?, "initial data", y)?);
    }
    Ok((ys, wf))
}

fn coefficients_from(ys: &[f64], wf: &[f64], terms: usize) -> Vec<f64> {
    let mut b = vec![0.0; terms];
    for (&y, &w) in ys.iter().zip(wf) {
        let (s1, c1) = (PI * y).sin_cos();
        let two_c = 2.0 * c1;
        let (mut prev, mut cur) = (0.0, s1);
        for bn in b.iter_mut() {
            *bn += w * cur;
            let next = two_c * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    b
}

/// `∫ |f|`, which bounds every sine coefficient.
fn l1_norm(wf: &[f64]) -> f64 {
    wf.iter().map(|v| v.abs()).sum()
}

/// Computes the first `cfg.max_terms` sine coefficients, checking each one
/// against a second rule of higher order.
pub fn sine_coefficients(f: Profile, cfg: &SeriesConfig) -> Result<SineCoefficients> {
    cfg.validate()?;
    let n = cfg.max_terms;
    let order = cfg.order_for(n);
    let (ys, wf) = sampled(f, order)?;
    let b = coefficients_from(&ys, &wf, n);
    let (ys2, wf2) = sampled(f, order + order / 2)?;
    let check = coefficients_from(&ys2, &wf2, n);
    let limit = cfg.tail_tolerance / n as f64;
    let worst = b
        .iter()
        .zip(&check)
        .map(|(a, c)| (a - c).abs())
        .fold(0.0, f64::max);
    if worst > limit.max(64.0 * f64::EPSILON) {
        return Err(Error::ToleranceUnreachable {
            what: "sine coefficient quadrature".into(),
            estimate: worst,
            tolerance: limit,
        });
    }
    Ok(SineCoefficients { b: check })
}

/// Truncated sine series of one profile, reusable across `(x, t)`.
#[derive(Debug, Clone)]
pub struct SineSeries {
    b: Vec<f64>,
    bound: f64,
}

impl SineSeries {
    /// Coefficients up to `terms` with a rule resolving `sin(terms·πy)`.
    pub fn new(f: Profile, terms: usize, cfg: &SeriesConfig) -> Result<Self> {
        cfg.validate()?;
        let order = cfg.order_for(terms);
        let (ys, wf) = sampled(f, order)?;
        let bound = l1_norm(&wf);
        Ok(Self {
            b: coefficients_from(&ys, &wf, terms),
            bound,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.b
    }

    /// Bound on every coefficient, `∫|f|`.
    pub fn coefficient_bound(&self) -> f64 {
        self.bound
    }

    /// Smallest truncation whose tail bound at `t` passes `tol`.
    pub fn terms_needed(bound: f64, t: f64, tol: f64, max_terms: usize) -> Result<usize> {
        if t <= 0.0 {
            return Err(Error::domain("series truncation needs t > 0"));
        }
        // solve e^{-(N+1)²π²t} ≈ tol / 2B for a starting guess, then walk
        let ratio = (2.0 * bound / tol).max(1.0);
        let guess = ((ratio.ln() / (PI * PI * t)).sqrt() - 1.0).max(1.0);
        let mut n = (guess.floor() as usize).clamp(1, max_terms);
        while n > 1 && tail_bound(bound, n - 1, t) < tol {
            n -= 1;
        }
        while tail_bound(bound, n, t) >= tol {
            if n >= max_terms {
                return Err(Error::ToleranceUnreachable {
                    what: format!("series truncation at t = {t}"),
                    estimate: tail_bound(bound, max_terms, t),
                    tolerance: tol,
                });
            }
            n += 1;
        }
        Ok(n)
    }

    /// `2 Σ_{n ≤ terms} b_n e^{-n²π²t} sin(nπx)` and its tail bound.
    pub fn eval(&self, x: f64, t: f64, terms: usize) -> Estimate {
        let terms = terms.min(self.b.len());
        let (s1, c1) = (PI * x).sin_cos();
        let two_c = 2.0 * c1;
        let (mut prev, mut cur) = (0.0, s1);
        let mut sum = 0.0;
        for (i, bn) in self.b[..terms].iter().enumerate() {
            let k = (i + 1) as f64;
            sum += bn * (-k * k * PI * PI * t).exp() * cur;
            let next = two_c * cur - prev;
            prev = cur;
            cur = next;
        }
        Estimate {
            value: 2.0 * sum,
            error: tail_bound(self.bound, terms, t),
        }
    }
}

fn check_point(x: f64, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x = {x} outside [0, 1]")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t = {t} must be finite and non-negative")));
    }
    Ok(())
}

/// `u1(x, t)` from the sine series with its truncation bound.
pub fn u1_series_estimate(f: Profile, x: f64, t: f64, cfg: &SeriesConfig) -> Result<Estimate> {
    check_point(x, t)?;
    cfg.validate()?;
    if x == 0.0 || x == 1.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    if t == 0.0 {
        return Ok(Estimate {
            value: finite(f(x)?, "initial data", x)?,
            error: 0.0,
        });
    }
    let probe = SineSeries::new(f, 1, cfg)?;
    let n = SineSeries::terms_needed(probe.bound, t, cfg.tail_tolerance, cfg.max_terms)?;
    let series = if n == 1 {
        probe
    } else {
        SineSeries::new(f, n, cfg)?
    };
    Ok(series.eval(x, t, n))
}

pub fn u1_series(f: Profile, x: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    u1_series_estimate(f, x, t, cfg).map(|e| e.value)
}

/// Propagates the profile `f` by `tau`; below the Duhamel floor the `tau → 0`
/// limit `f(x)` is used.
pub(crate) fn propagate(f: Profile, x: f64, tau: f64, cfg: &SeriesConfig) -> Result<Estimate> {
    if tau < duhamel::TAU_FLOOR {
        if x == 0.0 || x == 1.0 {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        return Ok(Estimate {
            value: finite(f(x)?, "forcing", x)?,
            error: 0.0,
        });
    }
    u1_series_estimate(f, x, tau, cfg)
}

/// Forced solution `u2(x, t)` with the time-quadrature error estimate.
pub fn u2_series_estimate(
    forcing: Forcing,
    x: f64,
    t: f64,
    singular_at_t0: bool,
    cfg: &SeriesConfig,
    time_tolerance: f64,
) -> Result<Estimate> {
    check_point(x, t)?;
    cfg.validate()?;
    if t == 0.0 || x == 0.0 || x == 1.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let integral = duhamel::integrate(t, singular_at_t0, time_tolerance, |sigmas| {
        sigmas
            .iter()
            .map(|&sigma| {
                let column = move |y: f64| forcing(y, sigma);
                propagate(&column, x, t - sigma, cfg).map(|e| e.value)
            })
            .collect()
    })?;
    Ok(Estimate {
        value: integral.value,
        error: integral.error,
    })
}

pub fn u2_series(
    forcing: Forcing,
    x: f64,
    t: f64,
    singular_at_t0: bool,
    cfg: &SeriesConfig,
) -> Result<f64> {
    u2_series_estimate(forcing, x, t, singular_at_t0, cfg, duhamel::DEFAULT_TIME_TOLERANCE)
        .map(|e| e.value)
}

/// Result of [`l1_bound_check`]: `lhs = max_x ∫₀^T |u1| dt`, `rhs = ‖f‖∞ / 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Bound {
    pub lhs: f64,
    pub rhs: f64,
    pub horizon: f64,
    pub worst_x: f64,
}

/// Integrates `|u1(x, ·)|` over `[0, T]` on an x-grid, with `T` chosen so the
/// neglected tail `∫_T^∞ |u1|` is below `tol`.
pub fn l1_bound_check(f: Profile, cfg: &SeriesConfig, tol: f64) -> Result<L1Bound> {
    cfg.validate()?;
    const GRID: usize = 40;
    let mut sup = 0.0f64;
    for i in 0..=1000 {
        let y = i as f64 / 1000.0;
        sup = sup.max(finite(f(y)?, "initial data", y)?.abs());
    }
    let series = SineSeries::new(f, cfg.max_terms, cfg)?;
    let bound = series.coefficient_bound();
    if bound == 0.0 {
        return Ok(L1Bound {
            lhs: 0.0,
            rhs: sup / 3.0,
            horizon: 0.0,
            worst_x: 0.5,
        });
    }
    // ∫_T^∞ |u1| ≤ Σ 2B e^{-n²π²T}/(n²π²) ≤ 2B e^{-π²T} / (π² (1 - e^{-3π²T}))
    let tail = |h: f64| {
        2.0 * bound * (-PI * PI * h).exp() / (PI * PI * (1.0 - (-3.0 * PI * PI * h).exp()))
    };
    let mut horizon = 0.25;
    while tail(horizon) >= tol {
        horizon *= 1.25;
    }
    // below t_min the truncation would exceed max_terms; use the t → 0 limit
    let t_min = {
        let k = cfg.max_terms as f64;
        (2.0 * bound / cfg.tail_tolerance).ln().max(1.0) / (PI * PI * k * k)
    };
    let mut lhs = 0.0f64;
    let mut worst_x = 0.5;
    for i in 1..GRID {
        let x = i as f64 / GRID as f64;
        let fx = finite(f(x)?, "initial data", x)?;
        let abs_u = |t: f64| -> Result<f64> {
            if t < t_min {
                return Ok(fx.abs());
            }
            let n = SineSeries::terms_needed(bound, t, cfg.tail_tolerance, cfg.max_terms)?;
            Ok(series.eval(x, t, n).value.abs())
        };
        let tolerance = Tolerance {
            abs: 0.1 * tol,
            rel: 0.0,
            max_intervals: 400,
        };
        let head = quad::adaptive(abs_u, 0.0, 0.05_f64.min(horizon), tolerance)?;
        let body = quad::adaptive(abs_u, 0.05_f64.min(horizon), horizon, tolerance)?;
        let v = head.value + body.value;
        if v > lhs {
            lhs = v;
            worst_x = x;
        }
    }
    Ok(L1Bound {
        lhs,
        rhs: sup / 3.0,
        horizon,
        worst_x,
    })
}
