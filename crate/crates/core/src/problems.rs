//! Named heat problems, admissibility checks and exact solutions.

use crate::error::{Error, Result};
use crate::expr::{parse, Bindings, Expr};

#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    pub name: String,
    /// Initial data `f(x)`.
    pub initial: Option<Expr>,
    /// Forcing `F(x, t)`.
    pub forcing: Option<Expr>,
    /// The forcing is unbounded or discontinuous as `t → 0`.
    pub singular_at_t0: bool,
}

impl HeatProblem {
    pub fn new(
        name: impl Into<String>,
        initial: Option<Expr>,
        forcing: Option<Expr>,
        singular_at_t0: bool,
    ) -> Result<Self> {
        if initial.is_none() && forcing.is_none() {
            return Err(Error::domain("a problem needs initial data or a forcing"));
        }
        Ok(Self {
            name: name.into(),
            initial,
            forcing,
            singular_at_t0,
        })
    }

    /// Builds a problem from expression text.
    pub fn from_text(
        name: impl Into<String>,
        initial: Option<&str>,
        forcing: Option<&str>,
        singular_at_t0: bool,
    ) -> std::result::Result<Self, ProblemError> {
        let initial = initial.map(parse).transpose()?;
        let forcing = forcing.map(parse).transpose()?;
        Ok(Self::new(name, initial, forcing, singular_at_t0)?)
    }

    /// `f` as a function of `x`; `t` is unbound.
    pub fn initial_fn(&self) -> Option<impl Fn(f64) -> Result<f64> + Sync + '_> {
        self.initial.as_ref().map(|e| {
            move |x: f64| {
                e.eval_with(Bindings {
                    x: Some(x),
                    t: None,
                })
                .map_err(Error::from)
            }
        })
    }

    pub fn forcing_fn(&self) -> Option<impl Fn(f64, f64) -> Result<f64> + Sync + '_> {
        self.forcing
            .as_ref()
            .map(|e| move |x: f64, t: f64| e.eval(x, t).map_err(Error::from))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),
    #[error(transparent)]
    Invalid(#[from] Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub u: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub problem: HeatProblem,
    pub exact: Option<ExactSolution>,
    /// Whether the entry is expected to pass [`check_admissible`].
    pub admissible: bool,
}

fn entry(name: &str, f: Option<&str>, forcing: Option<&str>, singular: bool, exact: Option<&str>, admissible: bool) -> CatalogEntry {
    let problem = HeatProblem::from_text(name, f, forcing, singular).expect("catalog expressions parse");
    CatalogEntry {
        problem,
        exact: exact.map(|u| ExactSolution {
            u: parse(u).expect("catalog expressions parse"),
        }),
        admissible,
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        entry("eigen1", Some("sin(pi*x)"), None, false, Some("exp(-pi^2*t)*sin(pi*x)"), true),
        entry("eigen2", Some("sin(2*pi*x)"), None, false, Some("exp(-4*pi^2*t)*sin(2*pi*x)"), true),
        entry("eigen3", Some("sin(3*pi*x)"), None, false, Some("exp(-9*pi^2*t)*sin(3*pi*x)"), true),
        entry(
            "combo",
            Some("sin(pi*x) + 0.3*sin(3*pi*x)"),
            None,
            false,
            Some("exp(-pi^2*t)*sin(pi*x) + 0.3*exp(-9*pi^2*t)*sin(3*pi*x)"),
            true,
        ),
        entry(
            "forced-modal",
            None,
            Some("sin(2*pi*x)"),
            false,
            Some("(1 - exp(-4*pi^2*t))*sin(2*pi*x)/(4*pi^2)"),
            true,
        ),
        entry(
            "singular",
            None,
            Some("(8*pi^2*t+1)*sin(2*pi*x)/(2*sqrt(t))"),
            true,
            Some("sqrt(t)*sin(2*pi*x)"),
            false,
        ),
        entry("parabola", Some("x*(1-x)"), None, false, None, false),
    ]
}

pub fn by_name(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.problem.name == name)
}

/// One admissibility condition with its worst sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    /// Largest violation found (absolute value of the sampled quantity).
    pub worst: f64,
    pub at_x: f64,
    pub at_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub conditions: Vec<Condition>,
}

impl AdmissibilityReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn verdicts(&self) -> Vec<(String, bool)> {
        self.conditions.iter().map(|c| (c.name.clone(), c.passed)).collect()
    }
}

const VALUE_TOL: f64 = 1e-9;
const CURVATURE_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-4;

/// One-sided second derivative at an endpoint, second order in `h`;
/// `dir` is +1 at x = 0 and -1 at x = 1.
fn endpoint_curvature(g: &dyn Fn(f64) -> Result<f64>, x0: f64, dir: f64) -> Result<f64> {
    let h = FD_STEP;
    let v: Vec<f64> = (0..4)
        .map(|k| g(x0 + dir * k as f64 * h))
        .collect::<Result<_>>()?;
    Ok((2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h))
}

fn condition(name: &str, tol: f64, samples: impl IntoIterator<Item = (f64, f64, Option<f64>)>) -> Condition {
    let mut worst = 0.0f64;
    let (mut at_x, mut at_t) = (0.0, None);
    for (v, x, t) in samples {
        if v.abs() > worst || v.is_nan() {
            worst = v.abs();
            at_x = x;
            at_t = t;
        }
    }
    Condition {
        name: name.to_string(),
        passed: worst <= tol,
        worst,
        at_x,
        at_t,
    }
}

/// Checks the boundary and compatibility hypotheses on `f` and on `F` at
/// `samples` times in `(0, 1]`. Failures are reported, not raised; only
/// evaluation errors are returned as errors.
pub fn check_admissible(p: &HeatProblem, samples: usize) -> Result<AdmissibilityReport> {
    let samples = samples.max(1);
    let mut conditions = Vec::new();
    if let Some(f) = p.initial_fn() {
        for (x0, dir, side) in [(0.0, 1.0, "0"), (1.0, -1.0, "1")] {
            let v = f(x0)?;
            conditions.push(condition(&format!("f({side}) = 0"), VALUE_TOL, [(v, x0, None)]));
            let c = endpoint_curvature(&f, x0, dir)?;
            let scale = v.abs().max(f(x0 + dir * 0.5)?.abs()).max(1.0);
            conditions.push(condition(
                &format!("f''({side}) = 0"),
                CURVATURE_TOL * scale,
                [(c, x0, None)],
            ));
        }
    }
    if let Some(forcing) = p.forcing_fn() {
        let times: Vec<f64> = (1..=samples).map(|j| j as f64 / samples as f64).collect();
        for (x0, dir, side) in [(0.0, 1.0, "0"), (1.0, -1.0, "1")] {
            let mut values = Vec::new();
            let mut curv = Vec::new();
            let mut scale = 1.0f64;
            for &t in &times {
                let column = |x: f64| forcing(x, t);
                values.push((column(x0)?, x0, Some(t)));
                curv.push((endpoint_curvature(&column, x0, dir)?, x0, Some(t)));
                scale = scale.max(column(0.5)?.abs()).max(column(0.25)?.abs());
            }
            conditions.push(condition(&format!("F({side}, t) = 0"), VALUE_TOL * scale, values));
            conditions.push(condition(&format!("F_xx({side}, t) = 0"), CURVATURE_TOL * scale, curv));
        }
        conditions.push(Condition {
            name: "F continuous at t = 0".into(),
            passed: !p.singular_at_t0,
            worst: if p.singular_at_t0 { f64::INFINITY } else { 0.0 },
            at_x: 0.5,
            at_t: Some(0.0),
        });
    }
    Ok(AdmissibilityReport { conditions })
}
