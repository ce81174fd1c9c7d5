//! Reduced-resolution run of the structural checks, one line per invariant.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::parse;
use crate::kernel::{
    g1_closed_with_signs, g2_closed, green_complex, green_real, modulus_closed, Frequency,
    SpatialPair, G1_SIGNS,
};
use crate::laplace::{self, InversionConfig};
use crate::problems::{catalog, check_admissible};
use crate::quad::GaussLegendre;
use crate::series::{self, SeriesConfig};

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Flip the sign of this addend (0-based) of the g1 expansion before
    /// the oracle-equivalence check.
    pub mutate_g1_term: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Worst measured deviation.
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, worst: f64, limit: f64) -> Self {
        Self {
            name,
            worst,
            limit,
            passed: worst <= limit,
        }
    }
}

fn pair(x: f64, y: f64) -> SpatialPair {
    SpatialPair::new(x, y).expect("grid points lie in [0, 1]")
}

fn freq(s: f64) -> Frequency {
    Frequency::new(s).expect("finite frequency")
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

fn symmetry(rng: &mut ChaCha8Rng, draws: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let s = 10f64.powf(rng.gen_range(-3.0..6.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (x, y) = (rng.gen::<f64>(), rng.gen::<f64>());
        let a = green_complex(freq(s), pair(x, y));
        let b = green_complex(freq(s), pair(y, x));
        worst = worst.max(rel(a.re, b.re, a.modulus)).max(rel(a.im, b.im, a.modulus));
    }
    Check::new("kernel symmetric in (x, y)", worst, 1e-12)
}

fn parity(rng: &mut ChaCha8Rng, draws: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let s = 10f64.powf(rng.gen_range(-3.0..6.0));
        let p = pair(rng.gen(), rng.gen());
        let a = green_complex(freq(s), p);
        let b = green_complex(freq(-s), p);
        worst = worst.max(rel(a.re, b.re, a.modulus)).max(rel(a.im, -b.im, a.modulus));
    }
    Check::new("g1 even and g2 odd in s", worst, 1e-12)
}

fn boundary() -> Check {
    let mut worst = 0.0f64;
    for &s in &[-1e4, -1.0, 0.0, 0.5, 30.0, 1e8] {
        for i in 0..=10 {
            let v = i as f64 / 10.0;
            for p in [pair(0.0, v), pair(1.0, v), pair(v, 0.0), pair(v, 1.0)] {
                worst = worst.max(green_complex(freq(s), p).modulus);
            }
        }
    }
    Check::new("kernel vanishes on the boundary", worst, 0.0)
}

fn ode_residual() -> Vec<Check> {
    let h = 1e-3;
    let mut residual = 0.0f64;
    let mut jump = 0.0f64;
    for &m in &[0.0, 1.0, 3.0, 10.0] {
        for &y in &[0.25, 0.5, 0.8] {
            let g = |x: f64| green_real(m, pair(x, y)).expect("valid arguments");
            for i in 1..40 {
                let x = i as f64 / 40.0;
                if (x - y).abs() <= 2.0 * h {
                    continue;
                }
                let gxx = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
                residual = residual.max((-gxx + m * m * g(x)).abs());
            }
            let right = (g(y + h) - g(y)) / h;
            let left = (g(y) - g(y - h)) / h;
            jump = jump.max((right - left + 1.0).abs());
        }
    }
    vec![
        Check::new("ODE residual -g'' + m^2 g away from x = y", residual, 1e-3),
        Check::new("derivative jump -1 across x = y", jump, 20.0 * h),
    ]
}

fn diagonal_maximum() -> Check {
    let n = 200;
    let mut worst = 0.0f64;
    for &s in &[0.0, 1.0, 100.0, 1e4] {
        for &x in &[0.2, 0.5, 0.7] {
            let diag = modulus_closed(freq(s), pair(x, x));
            let top = (0..=n)
                .map(|j| modulus_closed(freq(s), pair(x, j as f64 / n as f64)))
                .fold(0.0, f64::max);
            worst = worst.max((top - diag).max(0.0) / diag);
        }
    }
    Check::new("modulus maximal on the diagonal", worst, 1e-12)
}

fn oracle_equivalence(signs: &[f64; 8]) -> Check {
    let mut worst = 0.0f64;
    for k in 0..8 {
        let s = 10f64.powf(-2.0 + 10.0 * k as f64 / 7.0);
        for i in 0..=6 {
            for j in 0..=6 {
                let p = pair(i as f64 / 6.0, j as f64 / 6.0);
                let g = green_complex(freq(s), p);
                let tol = (1e-8 * g.modulus).max(1e-10);
                let g1 = g1_closed_with_signs(freq(s), p, signs).expect("s != 0");
                let g2 = g2_closed(freq(s), p).expect("s != 0");
                let m = modulus_closed(freq(s), p);
                for d in [g1 - g.re, g2 - g.im, m - g.modulus] {
                    worst = worst.max(d.abs() / tol);
                }
            }
        }
    }
    Check::new("closed forms match the complex kernel (ratio to tolerance)", worst, 1.0)
}

fn modulus_consistency() -> Check {
    let mut worst = 0.0f64;
    for &s in &[0.0, 0.3, 10.0, 1e5] {
        for i in 0..=10 {
            for j in 0..=10 {
                let g = green_complex(freq(s), pair(i as f64 / 10.0, j as f64 / 10.0));
                let lhs = g.modulus * g.modulus;
                let rhs = g.re * g.re + g.im * g.im;
                let big = (g.re * g.re).max(g.im * g.im);
                if big > 0.0 {
                    worst = worst.max((lhs - rhs).abs() / (big * f64::EPSILON));
                }
            }
        }
    }
    Check::new("modulus^2 = re^2 + im^2 (ulps)", worst, 8.0)
}

fn bvp_identity() -> Check {
    let rule = GaussLegendre::cached(40);
    let mut worst = 0.0f64;
    for &m in &[0.0, 1.0, 10.0] {
        for i in 1..10 {
            let x = i as f64 / 10.0;
            let mut v = 0.0;
            for (a, b) in [(0.0, x), (x, 1.0)] {
                v += rule.integrate(a, b, |y| {
                    green_real(m, pair(x, y)).expect("valid arguments") * (PI * y).sin()
                });
            }
            worst = worst.max((v - (PI * x).sin() / (PI * PI + m * m)).abs());
        }
    }
    Check::new("eigenfunction identity of the Green's function", worst, 1e-8)
}

fn limit() -> Check {
    let mut worst = 0.0f64;
    for &x in &[0.25, 0.5, 0.75] {
        let v = laplace::limit_study(x, &[1e6]).expect("interior x")[0].1;
        worst = worst.max((v - 0.5).abs());
    }
    Check::new("sqrt(s)|g(s,x,x)| near 1/2 at s = 1e6", worst, 2e-3)
}

fn representations() -> Result<Check> {
    let f = |y: f64| Ok((PI * y).sin() + 0.3 * (3.0 * PI * y).sin());
    let cfg = InversionConfig::default();
    let scfg = SeriesConfig::default();
    let times = [0.1, 0.5];
    let mut worst = 0.0f64;
    for &x in &[0.2, 0.55, 0.9] {
        let inv = laplace::u1_laplace_times(&f, x, &times, &cfg)?;
        for (r, &t) in inv.into_iter().zip(&times) {
            let s = series::u1_series(&f, x, t, &scfg)?;
            worst = worst.max((r?.value - s).abs());
        }
    }
    Ok(Check::new("inversion matches series for u1", worst, 1e-6))
}

fn parser() -> Check {
    let cases = [("2+3*4^2", 50.0), ("-2^2", -4.0), ("2^3^2", 512.0)];
    let mut worst = 0.0f64;
    for (text, want) in cases {
        let got = parse(text).ok().and_then(|e| e.eval(0.0, 0.0).ok());
        worst = worst.max(got.map_or(f64::INFINITY, |g| (g - want).abs()));
    }
    Check::new("expression precedence", worst, 0.0)
}

fn admissibility() -> Result<Check> {
    let mut mismatches = 0.0;
    for e in catalog() {
        if check_admissible(&e.problem, 64)?.all_passed() != e.admissible {
            mismatches += 1.0;
        }
    }
    Ok(Check::new("catalog admissibility verdicts", mismatches, 0.0))
}

fn l1_bound() -> Result<Check> {
    let f = |y: f64| Ok((PI * y).sin());
    let r = series::l1_bound_check(&f, &SeriesConfig::default(), 1e-6)?;
    Ok(Check::new("L1 time integral below sup|f|/3", (r.lhs - r.rhs).max(0.0), 1e-4))
}

/// Runs every check; evaluation failures surface as errors.
pub fn run(opts: &SelftestOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut signs = G1_SIGNS;
    if let Some(k) = opts.mutate_g1_term {
        if let Some(sign) = signs.get_mut(k) {
            *sign = -*sign;
        }
    }
    let mut checks = vec![symmetry(&mut rng, 2000), parity(&mut rng, 2000), boundary()];
    checks.extend(ode_residual());
    checks.push(diagonal_maximum());
    checks.push(oracle_equivalence(&signs));
    checks.push(modulus_consistency());
    checks.push(bvp_identity());
    checks.push(limit());
    checks.push(representations()?);
    checks.push(parser());
    checks.push(admissibility()?);
    checks.push(l1_bound()?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        let checks = run(&SelftestOptions::default()).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn every_g1_mutation_is_caught() {
        for k in 0..8 {
            let checks = run(&SelftestOptions {
                mutate_g1_term: Some(k),
            })
            .unwrap();
            let oracle = checks.iter().find(|c| c.name.starts_with("closed forms")).unwrap();
            assert!(!oracle.passed, "mutation of term {k} went unnoticed");
        }
    }
}
