//! Pointwise solutions of a [`HeatProblem`] by either representation.

use crate::duhamel::DEFAULT_TIME_TOLERANCE;
use crate::error::{Error, Result};
use crate::laplace::{self, Fallback, InversionConfig};
use crate::problems::HeatProblem;
use crate::series::{self, SeriesConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Laplace,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Laplace => "laplace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverConfig {
    pub series: SeriesConfig,
    pub inversion: InversionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolution {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub est_error: f64,
    pub method: Method,
    pub fallback: Fallback,
}

#[derive(Debug, Clone, Copy)]
struct Part {
    value: f64,
    error: f64,
    fallback: Fallback,
}

fn combine(parts: &[Part]) -> (f64, f64, Fallback) {
    let value = parts.iter().map(|p| p.value).sum();
    let error = parts.iter().map(|p| p.error).sum();
    let fallback = if !parts.is_empty() && parts.iter().all(|p| p.fallback == Fallback::Full) {
        Fallback::Full
    } else if parts.iter().any(|p| p.fallback != Fallback::None) {
        Fallback::Endpoint
    } else {
        Fallback::None
    };
    (value, error, fallback)
}

/// Solves at one `x` for several times. The inversion method needs
/// every `t > 0`; times below the crossover are delegated to the series.
pub fn solve_column(
    problem: &HeatProblem,
    x: f64,
    times: &[f64],
    method: Method,
    cfg: &SolverConfig,
) -> Result<Vec<PointSolution>> {
    if method == Method::Laplace {
        if let Some(&t) = times.iter().find(|&&t| !(t > 0.0)) {
            return Err(Error::domain(format!(
                "the inversion method needs t > 0, got t = {t}"
            )));
        }
    }
    let mut parts: Vec<Vec<Part>> = vec![Vec::new(); times.len()];
    if let Some(f) = problem.initial_fn() {
        match method {
            Method::Series => {
                for (k, &t) in times.iter().enumerate() {
                    let e = series::u1_series_estimate(&f, x, t, &cfg.series)?;
                    parts[k].push(Part {
                        value: e.value,
                        error: e.error,
                        fallback: Fallback::None,
                    });
                }
            }
            Method::Laplace => {
                let crossover = cfg.inversion.crossover;
                let late: Vec<f64> = times.iter().copied().filter(|&t| t >= crossover).collect();
                let mut inverted = laplace::u1_laplace_times(&f, x, &late, &cfg.inversion)?.into_iter();
                for (k, &t) in times.iter().enumerate() {
                    let part = if t >= crossover {
                        let r = inverted.next().expect("one result per late time")?;
                        Part {
                            value: r.value,
                            error: r.error,
                            fallback: Fallback::None,
                        }
                    } else {
                        let e = series::u1_series_estimate(&f, x, t, &cfg.series)?;
                        Part {
                            value: e.value,
                            error: e.error,
                            fallback: Fallback::Full,
                        }
                    };
                    parts[k].push(part);
                }
            }
        }
    }
    if let Some(forcing) = problem.forcing_fn() {
        let singular = problem.singular_at_t0;
        for (k, &t) in times.iter().enumerate() {
            let part = match method {
                Method::Series => {
                    let e = series::u2_series_estimate(
                        &forcing,
                        x,
                        t,
                        singular,
                        &cfg.series,
                        DEFAULT_TIME_TOLERANCE,
                    )?;
                    Part {
                        value: e.value,
                        error: e.error,
                        fallback: Fallback::None,
                    }
                }
                Method::Laplace => {
                    let r = laplace::u2_laplace(&forcing, x, t, singular, &cfg.inversion, &cfg.series)?;
                    Part {
                        value: r.value,
                        error: r.error,
                        fallback: r.fallback,
                    }
                }
            };
            parts[k].push(part);
        }
    }
    Ok(times
        .iter()
        .zip(parts)
        .map(|(&t, p)| {
            let (u, est_error, fallback) = combine(&p);
            PointSolution {
                x,
                t,
                u,
                est_error,
                method,
                fallback,
            }
        })
        .collect())
}

pub fn solve_point(
    problem: &HeatProblem,
    x: f64,
    t: f64,
    method: Method,
    cfg: &SolverConfig,
) -> Result<PointSolution> {
    Ok(solve_column(problem, x, &[t], method, cfg)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::by_name;
    use std::f64::consts::PI;

    #[test]
    fn methods_agree_on_eigenmode() {
        let p = by_name("eigen1").unwrap().problem;
        let cfg = SolverConfig::default();
        let a = solve_point(&p, 0.4, 0.1, Method::Series, &cfg).unwrap();
        let b = solve_point(&p, 0.4, 0.1, Method::Laplace, &cfg).unwrap();
        assert!((a.u - b.u).abs() < 1e-6);
        assert_eq!(b.fallback, Fallback::None);
        let exact = (-PI * PI * 0.1).exp() * (PI * 0.4).sin();
        assert!((a.u - exact).abs() < 1e-12);
    }

    #[test]
    fn laplace_rejects_zero_time_and_falls_back_early() {
        let p = by_name("combo").unwrap().problem;
        let cfg = SolverConfig::default();
        assert!(solve_column(&p, 0.5, &[0.0, 0.1], Method::Laplace, &cfg).is_err());
        let s = solve_column(&p, 0.5, &[0.0, 0.1], Method::Series, &cfg).unwrap();
        assert_eq!(s[0].u, 1.0 - 0.3);
        let early = solve_point(&p, 0.5, 0.01, Method::Laplace, &cfg).unwrap();
        assert_eq!(early.fallback, Fallback::Full);
    }

    #[test]
    fn combined_initial_data_and_forcing() {
        let p = HeatProblem::from_text("both", Some("sin(pi*x)"), Some("sin(2*pi*x)"), false).unwrap();
        let cfg = SolverConfig::default();
        let (x, t) = (0.3, 0.2);
        let exact = (-PI * PI * t).exp() * (PI * x).sin()
            + (1.0 - (-4.0 * PI * PI * t).exp()) * (2.0 * PI * x).sin() / (4.0 * PI * PI);
        for m in [Method::Series, Method::Laplace] {
            let r = solve_point(&p, x, t, m, &cfg).unwrap();
            assert!((r.u - exact).abs() < 1e-6, "{m:?}: {r:?}");
        }
    }
}
