use std::path::PathBuf;
use std::time::Instant;

use heatkernel::expr::Var;
use heatkernel::kernel::{
    g1_closed, g2_closed, green_complex, green_zero, modulus_closed, Frequency, SpatialPair,
};
use heatkernel::laplace::{self, InversionConfig};
use heatkernel::problems::{by_name, catalog, HeatProblem, ProblemError};
use heatkernel::selftest::{self, SelftestOptions};
use heatkernel::series::SeriesConfig;
use heatkernel::solver::{solve_column, Method, PointSolution, SolverConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{pick, ConfigFile};
use crate::output::{emit, Cell, Format, Table};
use crate::{
    CompareArgs, Failure, GridArgs, KernelArgs, LimitArgs, MethodArg, NumericsArgs, OutputArgs,
    ProblemArgs, SelftestArgs, SolveArgs,
};

struct Sink {
    format: Format,
    out: Option<PathBuf>,
    timings: bool,
}

impl Sink {
    fn new(args: &OutputArgs, file: &ConfigFile) -> Self {
        Self {
            format: pick(args.format, file.format, Format::Csv),
            out: args.out.clone().or_else(|| file.out.clone()),
            timings: args.timings,
        }
    }

    fn write(&self, table: &Table, mut metadata: Value, started: Instant) -> Result<(), Failure> {
        let elapsed = started.elapsed().as_secs_f64();
        if self.timings {
            match self.format {
                Format::Json => metadata["timings"] = json!({ "elapsed_seconds": elapsed }),
                Format::Csv => eprintln!("timing: {elapsed:.3} s"),
            }
        }
        emit(table, metadata, self.format, self.out.as_deref())
            .map_err(|e| Failure::usage(format!("cannot write output: {e}")))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn axis(name: &str, n: usize, lo: f64, hi: f64, bounds: (f64, f64)) -> Result<Vec<f64>, Failure> {
    if n < 2 {
        return Err(Failure::usage(format!("n{name} must be at least 2, got {n}")));
    }
    if !(lo >= bounds.0 && hi <= bounds.1 && lo < hi) {
        return Err(Failure::usage(format!(
            "{name} range [{lo}, {hi}] must satisfy {} <= {name}-min < {name}-max <= {}",
            bounds.0, bounds.1
        )));
    }
    Ok(linspace(lo, hi, n))
}

struct Grid {
    xs: Vec<f64>,
    ts: Vec<f64>,
}

fn grid(args: &GridArgs, file: &ConfigFile) -> Result<Grid, Failure> {
    let xs = axis(
        "x",
        pick(args.nx, file.nx, 11),
        pick(args.x_min, file.x_min, 0.0),
        pick(args.x_max, file.x_max, 1.0),
        (0.0, 1.0),
    )?;
    let ts = axis(
        "t",
        pick(args.nt, file.nt, 5),
        pick(args.t_min, file.t_min, 0.1),
        pick(args.t_max, file.t_max, 1.0),
        (0.0, f64::MAX),
    )?;
    Ok(Grid { xs, ts })
}

fn grid_metadata(g: &Grid) -> Value {
    json!({
        "nx": g.xs.len(),
        "x_min": g.xs[0],
        "x_max": g.xs[g.xs.len() - 1],
        "nt": g.ts.len(),
        "t_min": g.ts[0],
        "t_max": g.ts[g.ts.len() - 1],
    })
}

fn solver_config(args: &NumericsArgs, file: &ConfigFile) -> Result<SolverConfig, Failure> {
    let d = SolverConfig::default();
    let tail_subtraction = if args.no_tail_subtraction {
        false
    } else {
        file.tail_subtraction.unwrap_or(d.inversion.tail_subtraction)
    };
    let cfg = SolverConfig {
        series: SeriesConfig {
            max_terms: pick(args.terms, file.terms, d.series.max_terms),
            ..d.series
        },
        inversion: InversionConfig {
            s_max: pick(args.s_max, file.s_max, d.inversion.s_max),
            panels_per_period: pick(args.panels_per_period, file.panels_per_period, d.inversion.panels_per_period),
            tolerance: pick(args.tol, file.tol, d.inversion.tolerance),
            tail_subtraction,
            crossover: pick(args.crossover, file.crossover, d.inversion.crossover),
        },
    };
    cfg.series.validate().map_err(|e| Failure::usage(e.to_string()))?;
    cfg.inversion.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn config_metadata(cfg: &SolverConfig) -> Value {
    let (s, i) = (&cfg.series, &cfg.inversion);
    json!({
        "series": {
            "max_terms": s.max_terms,
            "coeff_quadrature_order": s.coeff_quadrature_order,
            "tail_tolerance": s.tail_tolerance,
        },
        "inversion": {
            "s_max": i.s_max,
            "panels_per_period": i.panels_per_period,
            "tolerance": i.tolerance,
            "tail_subtraction": i.tail_subtraction,
            "crossover": i.crossover,
        },
    })
}

fn versions() -> Value {
    json!({ "cli": env!("CARGO_PKG_VERSION"), "library": heatkernel::VERSION })
}

/// Problem from the command line if any problem flag is given there,
/// otherwise from the config file.
fn problem(args: &ProblemArgs, file: &ConfigFile) -> Result<HeatProblem, Failure> {
    let from_flags = args.problem.is_some() || args.f.is_some() || args.forcing.is_some();
    let (name, f, forcing) = if from_flags {
        (args.problem.as_deref(), args.f.as_deref(), args.forcing.as_deref())
    } else {
        (file.problem.as_deref(), file.f.as_deref(), file.forcing.as_deref())
    };
    let singular = args.singular || file.singular.unwrap_or(false);
    match (name, f, forcing) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            Err(Failure::usage("--problem cannot be combined with --f or --F"))
        }
        (Some(name), None, None) => by_name(name).map(|e| e.problem).ok_or_else(|| {
            let names: Vec<String> = catalog().into_iter().map(|e| e.problem.name).collect();
            Failure::usage(format!("unknown problem {name:?}; known: {}", names.join(", ")))
        }),
        (None, None, None) => Err(Failure::usage("give --problem NAME or --f EXPR and/or --F EXPR")),
        (None, f, forcing) => {
            let p = HeatProblem::from_text("inline", f, forcing, singular).map_err(|e| match e {
                ProblemError::Parse(e) => Failure::usage(format!("cannot parse expression: {e}")),
                ProblemError::Invalid(e) => Failure::usage(e.to_string()),
            })?;
            if p.initial.as_ref().is_some_and(|e| e.free_vars().contains(&Var::T)) {
                return Err(Failure::usage("--f must not depend on t"));
            }
            Ok(p)
        }
    }
}

fn problem_metadata(p: &HeatProblem) -> Value {
    json!({
        "name": p.name,
        "f": p.initial.as_ref().map(|e| e.to_string()),
        "F": p.forcing.as_ref().map(|e| e.to_string()),
        "singular": p.singular_at_t0,
    })
}

fn method_of(m: MethodArg) -> Method {
    match m {
        MethodArg::Series => Method::Series,
        MethodArg::Laplace => Method::Laplace,
    }
}

fn parse_method(args: Option<MethodArg>, file: &ConfigFile) -> Result<Method, Failure> {
    if let Some(m) = args {
        return Ok(method_of(m));
    }
    match file.method.as_deref() {
        None | Some("laplace") => Ok(Method::Laplace),
        Some("series") => Ok(Method::Series),
        Some(other) => Err(Failure::usage(format!("unknown method {other:?}"))),
    }
}

/// Solves every x column in parallel. Results keep grid order regardless of
/// scheduling; the first failure in x order is reported.
fn solve_grid(
    p: &HeatProblem,
    g: &Grid,
    method: Method,
    cfg: &SolverConfig,
) -> Result<Vec<Vec<PointSolution>>, Failure> {
    if method == Method::Laplace && g.ts[0] <= 0.0 {
        return Err(Failure::usage(
            "the laplace method needs t > 0; use --t-min > 0 or --method series",
        ));
    }
    let columns: Vec<_> = g
        .xs
        .par_iter()
        .map(|&x| solve_column(p, x, &g.ts, method, cfg))
        .collect();
    columns.into_iter().map(|c| c.map_err(Failure::from)).collect()
}

pub fn solve(a: SolveArgs) -> Result<(), Failure> {
    let file = ConfigFile::load(a.output.config.as_deref())?;
    let sink = Sink::new(&a.output, &file);
    let p = problem(&a.problem, &file)?;
    let g = grid(&a.grid, &file)?;
    let cfg = solver_config(&a.numerics, &file)?;
    let method = parse_method(a.method, &file)?;
    let started = Instant::now();
    let columns = solve_grid(&p, &g, method, &cfg)?;
    let mut table = Table::new(&["x", "t", "u", "est_error", "method", "fallback"]);
    for k in 0..g.ts.len() {
        for col in &columns {
            let r = &col[k];
            table.push(vec![
                Cell::Num(r.x),
                Cell::Num(r.t),
                Cell::Num(r.u),
                Cell::Num(r.est_error),
                Cell::Text(r.method.as_str()),
                Cell::Text(r.fallback.as_str()),
            ]);
        }
    }
    let mut meta = json!({
        "command": "solve",
        "versions": versions(),
        "method": method.as_str(),
        "problem": problem_metadata(&p),
        "grid": grid_metadata(&g),
    });
    meta["config"] = config_metadata(&cfg);
    sink.write(&table, meta, started)
}

pub fn compare(a: CompareArgs) -> Result<(), Failure> {
    let file = ConfigFile::load(a.output.config.as_deref())?;
    let sink = Sink::new(&a.output, &file);
    let p = problem(&a.problem, &file)?;
    let g = grid(&a.grid, &file)?;
    let mut cfg = solver_config(&a.numerics, &file)?;
    // --tol bounds the difference; the inversion itself runs ten times tighter.
    let threshold = a.numerics.tol.or(file.tol);
    if let Some(tol) = threshold {
        cfg.inversion.tolerance = tol / 10.0;
    }
    let started = Instant::now();
    let series = solve_grid(&p, &g, Method::Series, &cfg)?;
    let inverted = solve_grid(&p, &g, Method::Laplace, &cfg)?;
    let mut table = Table::new(&[
        "x",
        "t",
        "u_series",
        "u_laplace",
        "diff",
        "est_error_series",
        "est_error_laplace",
        "fallback",
    ]);
    let (mut max, mut sum) = (0.0f64, 0.0f64);
    for k in 0..g.ts.len() {
        for (cs, cl) in series.iter().zip(&inverted) {
            let (s, l) = (&cs[k], &cl[k]);
            let diff = (s.u - l.u).abs();
            max = max.max(diff);
            sum += diff;
            table.push(vec![
                Cell::Num(s.x),
                Cell::Num(s.t),
                Cell::Num(s.u),
                Cell::Num(l.u),
                Cell::Num(diff),
                Cell::Num(s.est_error),
                Cell::Num(l.est_error),
                Cell::Text(l.fallback.as_str()),
            ]);
        }
    }
    let points = table.rows.len();
    let mean = sum / points as f64;
    let mut meta = json!({
        "command": "compare",
        "versions": versions(),
        "problem": problem_metadata(&p),
        "grid": grid_metadata(&g),
        "summary": { "points": points, "max_diff": max, "mean_diff": mean, "tol": threshold },
    });
    meta["config"] = config_metadata(&cfg);
    sink.write(&table, meta, started)?;
    eprintln!("summary: points={points} max_diff={max:e} mean_diff={mean:e}");
    match threshold {
        Some(tol) if !(max <= tol) => Err(Failure {
            code: Failure::COMPARE,
            message: format!("max difference {max:e} exceeds tolerance {tol:e}"),
        }),
        _ => Ok(()),
    }
}

fn closed_forms(s: Frequency, p: SpatialPair) -> Result<(f64, f64, f64), heatkernel::Error> {
    let m = modulus_closed(s, p);
    if s.value() == 0.0 {
        return Ok((green_zero(p), 0.0, m));
    }
    Ok((g1_closed(s, p)?, g2_closed(s, p)?, m))
}

pub fn kernel(a: KernelArgs) -> Result<(), Failure> {
    let file = ConfigFile::load(a.output.config.as_deref())?;
    let sink = Sink::new(&a.output, &file);
    let xs = axis(
        "x",
        pick(a.grid.nx, file.nx, 11),
        pick(a.grid.x_min, file.x_min, 0.0),
        pick(a.grid.x_max, file.x_max, 1.0),
        (0.0, 1.0),
    )?;
    let ys = axis(
        "y",
        pick(a.ny, file.ny, 11),
        pick(a.y_min, file.y_min, 0.0),
        pick(a.y_max, file.y_max, 1.0),
        (0.0, 1.0),
    )?;
    let s_values = if a.s.is_empty() {
        file.s.clone().unwrap_or_else(|| vec![10.0])
    } else {
        a.s.clone()
    };
    let freqs = s_values
        .iter()
        .map(|&s| Frequency::new(s).map_err(|e| Failure::usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if freqs.is_empty() {
        return Err(Failure::usage("--s needs at least one frequency"));
    }
    let started = Instant::now();
    let jobs: Vec<(Frequency, f64)> = freqs
        .iter()
        .flat_map(|&s| xs.iter().map(move |&x| (s, x)))
        .collect();
    let blocks: Vec<Result<Vec<Vec<Cell>>, Failure>> = jobs
        .par_iter()
        .map(|&(s, x)| {
            ys.iter()
                .map(|&y| {
                    let p = SpatialPair::new(x, y)?;
                    let g = green_complex(s, p);
                    let (c1, c2, cm) = closed_forms(s, p)?;
                    Ok(vec![
                        Cell::Num(s.value()),
                        Cell::Num(x),
                        Cell::Num(y),
                        Cell::Num(g.re),
                        Cell::Num(g.im),
                        Cell::Num(g.modulus),
                        Cell::Num(c1),
                        Cell::Num(c2),
                        Cell::Num(cm),
                        Cell::Num((g.re - c1).abs()),
                        Cell::Num((g.im - c2).abs()),
                        Cell::Num((g.modulus - cm).abs()),
                    ])
                })
                .collect::<Result<Vec<_>, heatkernel::Error>>()
                .map_err(Failure::from)
        })
        .collect();
    let mut table = Table::new(&[
        "s",
        "x",
        "y",
        "g1",
        "g2",
        "modulus",
        "g1_closed",
        "g2_closed",
        "modulus_closed",
        "d_g1",
        "d_g2",
        "d_modulus",
    ]);
    for block in blocks {
        for row in block? {
            table.push(row);
        }
    }
    let meta = json!({
        "command": "kernel",
        "versions": versions(),
        "s": s_values,
        "grid": {
            "nx": xs.len(), "x_min": xs[0], "x_max": xs[xs.len() - 1],
            "ny": ys.len(), "y_min": ys[0], "y_max": ys[ys.len() - 1],
        },
    });
    sink.write(&table, meta, started)
}

pub fn limit(a: LimitArgs) -> Result<(), Failure> {
    let file = ConfigFile::load(a.output.config.as_deref())?;
    let sink = Sink::new(&a.output, &file);
    let x = a
        .x
        .or(file.x)
        .ok_or_else(|| Failure::usage("--x is required"))?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Failure::usage(format!("--x must lie strictly inside (0, 1), got {x}")));
    }
    let lo = pick(a.s_lo, file.s_lo, 1e2);
    let hi = pick(a.s_hi, file.s_hi, 1e10);
    let n = pick(a.ns, file.ns, 17);
    if !(lo > 0.0 && lo < hi && hi.is_finite()) || n < 2 {
        return Err(Failure::usage(
            "the sweep needs 0 < s-lo < s-hi < inf and ns >= 2",
        ));
    }
    let s: Vec<f64> = linspace(lo.log10(), hi.log10(), n)
        .into_iter()
        .enumerate()
        .map(|(i, l)| match i {
            0 => lo,
            _ if i + 1 == n => hi,
            _ => 10f64.powf(l),
        })
        .collect();
    let started = Instant::now();
    let rows = laplace::limit_study(x, &s)?;
    let mut table = Table::new(&["s", "scaled"]);
    for (s, v) in rows {
        table.push(vec![Cell::Num(s), Cell::Num(v)]);
    }
    let meta = json!({
        "command": "limit",
        "versions": versions(),
        "x": x,
        "s_lo": lo,
        "s_hi": hi,
        "ns": n,
    });
    sink.write(&table, meta, started)
}

pub fn selftest(a: SelftestArgs) -> Result<(), Failure> {
    let opts = SelftestOptions {
        mutate_g1_term: a.mutate_g1_term.map(usize::from),
    };
    let checks = selftest::run(&opts)?;
    let mut failed = 0;
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {}: worst {:e} (limit {:e})", c.name, c.worst, c.limit);
        failed += usize::from(!c.passed);
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::numerical(format!("{failed} of {} checks failed", checks.len())))
    }
}
