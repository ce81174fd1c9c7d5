//! Quadrature building blocks.
//!
//! Gauss-Legendre rules of arbitrary order (computed by Newton iteration on the
//! Legendre recurrence and memoized), and an adaptive Gauss-Kronrod 7/15
//! integrator. The adaptive integrator has a batched variant that hands all
//! new abscissae of a refinement round to the integrand at once, which lets
//! expensive integrands share work across nodes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Gauss-Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule. Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, z);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, memoized rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&n) {
            return Arc::clone(rule);
        }
        let rule = Arc::new(GaussLegendre::new(n));
        cache
            .lock()
            .unwrap()
            .entry(n)
            .or_insert_with(|| Arc::clone(&rule))
            .clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Abscissae and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&z, &w)| (mid + half * z, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 1 {
        return (z, 1.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

// Kronrod 15-point abscissae and weights, with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Stopping rule for the adaptive integrators: stop when the summed error
/// estimate is below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self {
            abs,
            rel: 0.0,
            max_intervals: 200,
        }
    }
}

/// The 15 abscissae of the Kronrod rule on [a, b], ordered as
/// `[center, -x0, +x0, -x1, +x1, ...]`.
fn kronrod_points(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut pts = [c; 15];
    for j in 0..7 {
        pts[1 + 2 * j] = c - h * XGK[j];
        pts[2 + 2 * j] = c + h * XGK[j];
    }
    pts
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod_combine(a: f64, b: f64, fv: &[f64]) -> Segment {
    let h = 0.5 * (b - a);
    let fc = fv[0];
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = (fc * WGK[7]).abs();
    for j in 0..7 {
        let f1 = fv[1 + 2 * j];
        let f2 = fv[2 + 2 * j];
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[1 + 2 * j] - mean).abs() + (fv[2 + 2 * j] - mean).abs());
    }
    let resasc = resasc * h.abs();
    let resabs = resabs * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Segment {
        a,
        b,
        value: resk * h,
        error: err,
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b].
pub fn adaptive<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    adaptive_batched(
        |xs: &[f64]| xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>(),
        a,
        b,
        tol,
    )
}

/// Adaptive Gauss-Kronrod integration where each refinement round evaluates
/// all of its new abscissae through a single call of `eval`.
///
/// Every round bisects the intervals whose error estimate is within a factor
/// of four of the worst one.
pub fn adaptive_batched<F>(mut eval: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut evaluations = 0;
    let first = kronrod_points(a, b);
    let fv = eval(&first)?;
    evaluations += 15;
    let mut segments = vec![kronrod_combine(a, b, &fv)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::Quadrature { value, error });
        }
        let worst_error = segments.iter().map(|s| s.error).fold(0.0, f64::max);
        let mut split: Vec<usize> = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.error >= 0.25 * worst_error)
            .map(|(i, _)| i)
            .collect();
        split.truncate(tol.max_intervals - segments.len());
        if split.is_empty() {
            return Err(Error::Quadrature { value, error });
        }

        let mut children = Vec::with_capacity(2 * split.len());
        for &i in &split {
            let s = segments[i];
            let mid = 0.5 * (s.a + s.b);
            if mid <= s.a.min(s.b) || mid >= s.a.max(s.b) {
                return Err(Error::Quadrature { value, error });
            }
            children.push((s.a, mid));
            children.push((mid, s.b));
        }
        let points: Vec<f64> = children
            .iter()
            .flat_map(|&(lo, hi)| kronrod_points(lo, hi))
            .collect();
        let fv = eval(&points)?;
        evaluations += points.len();
        let mut fresh: Vec<Segment> = children
            .iter()
            .zip(fv.chunks(15))
            .map(|(&(lo, hi), vals)| kronrod_combine(lo, hi, vals))
            .collect();
        let mut keep: Vec<Segment> = segments
            .iter()
            .enumerate()
            .filter(|(i, _)| !split.contains(i))
            .map(|(_, s)| *s)
            .collect();
        keep.append(&mut fresh);
        segments = keep;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 12, 33] {
            let rule = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 2.0, |x| x.powi(deg as i32));
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((got - exact).abs() <= 1e-12 * exact, "n={n}: {got} vs {exact}");
        }
    }

    #[test]
    fn high_order_weights_sum_to_interval_length() {
        let rule = GaussLegendre::new(2016);
        let sum: f64 = rule.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-12);
        let v = rule.integrate(0.0, 1.0, |y| (200.0 * PI * y).sin().powi(2));
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let tol = Tolerance {
            abs: 1e-10,
            rel: 0.0,
            max_intervals: 1000,
        };
        let r = adaptive(|x| Ok(1.0 / x.sqrt()), 0.0, 1.0, tol).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn adaptive_propagates_integrand_errors() {
        let r = adaptive(
            |x| {
                if x > 0.5 {
                    Err(Error::domain("boom"))
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            Tolerance::absolute(1e-8),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn batched_and_scalar_agree() {
        let f = |x: f64| (3.0 * x).cos() * (-x).exp();
        let a = adaptive(|x| Ok(f(x)), 0.0, 4.0, Tolerance::absolute(1e-12)).unwrap();
        let b = adaptive_batched(
            |xs: &[f64]| Ok(xs.iter().map(|&x| f(x)).collect()),
            0.0,
            4.0,
            Tolerance::absolute(1e-12),
        )
        .unwrap();
        assert_eq!(a.value, b.value);
    }
}
