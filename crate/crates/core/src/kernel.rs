//! Green's functions of the Dirichlet problem on [0, 1].
//!
//! `green_real` is the kernel of `-v'' + m^2 v = f`, `v(0) = v(1) = 0`, for a
//! real parameter `m >= 0`. `green_complex` evaluates the same kernel at the
//! complex parameter `m = sqrt(i s)`, which is the time-Laplace transform of
//! the heat propagator along the imaginary axis. `g1_closed`, `g2_closed` and
//! `modulus_closed` are the expanded real forms of that complex kernel.
//!
//! Every hyperbolic function is evaluated in scaled form (`cosh w = e^|w| c`,
//! `sinh w = e^|w| s` with `|c|, |s| <= 1`) and the exponents are combined
//! before exponentiation, so nothing overflows for any finite frequency.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point `(x, y)` of the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPair {
    x: f64,
    y: f64,
}

impl SpatialPair {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::domain(format!(
                "spatial pair ({x}, {y}) outside [0,1]^2"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y,
            y: self.x,
        }
    }

    /// `(max(x, y), min(x, y))`.
    fn ordered(&self) -> (f64, f64) {
        if self.y <= self.x {
            (self.x, self.y)
        } else {
            (self.y, self.x)
        }
    }
}

/// A real frequency on the inversion axis.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::domain(format!("frequency {s} is not finite")));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `g(sqrt(i s), x, y) = re + i im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

impl KernelValue {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// The kernel at `m = 0`: `(1 - x) y` for `y <= x`, `x (1 - y)` otherwise.
pub fn green_zero(p: SpatialPair) -> f64 {
    let (hi, lo) = p.ordered();
    (1.0 - hi) * lo
}

/// `g(m, x, y)` for real `m >= 0`.
pub fn green_real(m: f64, p: SpatialPair) -> Result<f64> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("green_real needs finite m >= 0, got {m}")));
    }
    if m == 0.0 {
        return Ok(green_zero(p));
    }
    let (hi, lo) = p.ordered();
    // sinh(m(1-hi)) sinh(m lo) / (m sinh m)
    //   = e^{m(lo-hi)} (1 - e^{-2m(1-hi)}) (1 - e^{-2m lo}) / (2m (1 - e^{-2m}))
    let num = (-2.0 * m * (1.0 - hi)).exp_m1() * (-2.0 * m * lo).exp_m1();
    let den = 2.0 * m * (-2.0 * m).exp_m1();
    Ok(-(m * (lo - hi)).exp() * num / den)
}

/// Principal square root of `i s`: `(1 + i) sqrt(s/2)` for `s >= 0` and
/// `(1 - i) sqrt(|s|/2)` for `s < 0`.
pub fn sqrt_is(s: f64) -> Complex64 {
    let r = (0.5 * s.abs()).sqrt();
    if s >= 0.0 {
        Complex64::new(r, r)
    } else {
        Complex64::new(r, -r)
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
pub(crate) fn expm1c(z: Complex64) -> Complex64 {
    if z.norm_sqr() > 0.25 {
        return z.exp() - 1.0;
    }
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// `g(m, x, y)` for complex `m`. The kernel depends on `m` only through
/// `m^2`, so a parameter with negative real part is replaced by `-m`.
pub fn green_at(m: Complex64, p: SpatialPair) -> Complex64 {
    let m = if m.re < 0.0 { -m } else { m };
    if m == Complex64::new(0.0, 0.0) {
        return Complex64::new(green_zero(p), 0.0);
    }
    let (hi, lo) = p.ordered();
    let num = expm1c(-2.0 * m * (1.0 - hi)) * expm1c(-2.0 * m * lo);
    let den = 2.0 * m * expm1c(-2.0 * m);
    -(m * (lo - hi)).exp() * num / den
}

/// `g(sqrt(i s), x, y)` on the inversion axis.
pub fn green_complex(s: Frequency, p: SpatialPair) -> KernelValue {
    let s = s.value();
    let g = if s == 0.0 {
        Complex64::new(green_zero(p), 0.0)
    } else {
        green_at(sqrt_is(s), p)
    };
    KernelValue {
        re: g.re,
        im: g.im,
        modulus: g.re.hypot(g.im),
    }
}

/// Kernel evaluator for a fixed `(s, x)` and many source points `y`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelSlice {
    m: Complex64,
    x: f64,
    left: Complex64,
    right: Complex64,
}

impl KernelSlice {
    pub(crate) fn new(s: f64, x: f64) -> Self {
        let m = sqrt_is(s);
        if s == 0.0 {
            return Self {
                m,
                x,
                left: Complex64::new(0.0, 0.0),
                right: Complex64::new(0.0, 0.0),
            };
        }
        let den = 2.0 * m * expm1c(-2.0 * m);
        Self {
            m,
            x,
            left: -expm1c(-2.0 * m * (1.0 - x)) / den,
            right: -expm1c(-2.0 * m * x) / den,
        }
    }

    pub(crate) fn modulus_of_m(&self) -> f64 {
        self.m.norm()
    }

    #[inline]
    pub(crate) fn eval(&self, y: f64) -> Complex64 {
        let m = self.m;
        if self.left == Complex64::new(0.0, 0.0) && m.re == 0.0 {
            let (hi, lo) = if y <= self.x { (self.x, y) } else { (y, self.x) };
            return Complex64::new((1.0 - hi) * lo, 0.0);
        }
        if y <= self.x {
            self.left * (m * (y - self.x)).exp() * expm1c(-2.0 * m * y)
        } else {
            self.right * (m * (self.x - y)).exp() * expm1c(-2.0 * m * (1.0 - y))
        }
    }
}

/// Addend signs of the real part, in printed order.
pub const G1_SIGNS: [f64; 8] = [1.0, -1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0];
/// Addend signs of the imaginary part, in printed order.
pub const G2_SIGNS: [f64; 8] = [1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, -1.0];

/// `cos w`, `sin w` and the scaled hyperbolics of one argument.
struct Factors {
    c: f64,
    s: f64,
    ch: f64,
    sh: f64,
}

impl Factors {
    fn new(w: f64) -> Self {
        let e = (-2.0 * w.abs()).exp_m1();
        Self {
            c: w.cos(),
            s: w.sin(),
            ch: 0.5 * (2.0 + e),
            sh: -0.5 * e * w.signum(),
        }
    }
}

/// `cosh z - cos z = mantissa * e^exponent` for `z >= 0`.
fn cosh_minus_cos(z: f64) -> (f64, f64) {
    if z < 1.0 {
        // 2 (z^2/2! + z^6/6! + z^10/10! + ...)
        let z2 = z * z;
        let z4 = z2 * z2;
        let mut term = z2 / 2.0;
        let mut sum = 0.0;
        let mut k = 2.0;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            term *= z4 / ((k + 1.0) * (k + 2.0) * (k + 3.0) * (k + 4.0));
            k += 4.0;
            if term == 0.0 {
                break;
            }
        }
        (2.0 * sum, 0.0)
    } else {
        let e = (-z).exp();
        (0.5 * (1.0 - 2.0 * z.cos() * e + e * e), z)
    }
}

fn ln_cosh_minus_cos(z: f64) -> f64 {
    if z == 0.0 {
        return f64::NEG_INFINITY;
    }
    let (mant, exp) = cosh_minus_cos(z);
    mant.ln() + exp
}

/// The eight-addend expansion for `s > 0` and `y <= x`, with the given addend
/// signs. Returns the real part for [`G1_SIGNS`] and the imaginary part for
/// [`G2_SIGNS`].
fn expansion(s: f64, x: f64, y: f64, signs: &[f64; 8]) -> f64 {
    let root = s.sqrt();
    let a = root / SQRT_2;
    let one = Factors::new(a);
    let xm = Factors::new(a * (x - 1.0));
    let yy = Factors::new(a * y);

    let terms = [
        one.ch * xm.ch * yy.ch * one.s * xm.s * yy.s,
        one.c * xm.ch * yy.ch * xm.s * one.sh * yy.s,
        xm.c * one.ch * yy.ch * one.s * xm.sh * yy.s,
        one.c * xm.c * yy.ch * one.sh * xm.sh * yy.s,
        yy.c * one.ch * xm.ch * one.s * xm.s * yy.sh,
        one.c * yy.c * xm.ch * xm.s * one.sh * yy.sh,
        xm.c * yy.c * one.ch * one.s * xm.sh * yy.sh,
        one.c * xm.c * yy.c * one.sh * xm.sh * yy.sh,
    ];
    let sum: f64 = SQRT_2 * terms.iter().zip(signs).map(|(t, sg)| sg * t).sum::<f64>();
    // Every addend carries one hyperbolic factor of each of a, a(x-1), a y.
    let hyper_exp = a * (1.0 + (1.0 - x) + y);
    // cos(sqrt2 sqrt s) - cosh(sqrt2 sqrt s) = -(cosh - cos)
    let (mant, den_exp) = cosh_minus_cos(SQRT_2 * root);
    -sum / (root * mant) * (hyper_exp - den_exp).exp()
}

fn closed_part(s: Frequency, p: SpatialPair, signs: &[f64; 8], odd: bool) -> Result<f64> {
    let s = s.value();
    if s == 0.0 {
        return Err(Error::domain(
            "closed forms are singular at s = 0; use green_complex",
        ));
    }
    let (hi, lo) = p.ordered();
    let v = expansion(s.abs(), hi, lo, signs);
    Ok(if odd && s < 0.0 { -v } else { v })
}

/// Real part `g1(s, x, y)` from its expanded trigonometric-hyperbolic form.
pub fn g1_closed(s: Frequency, p: SpatialPair) -> Result<f64> {
    closed_part(s, p, &G1_SIGNS, false)
}

/// Imaginary part `g2(s, x, y)` from its expanded trigonometric-hyperbolic form.
pub fn g2_closed(s: Frequency, p: SpatialPair) -> Result<f64> {
    closed_part(s, p, &G2_SIGNS, true)
}

/// `g1` with arbitrary addend signs. Only meant for mutation testing of the
/// validation suite.
#[doc(hidden)]
pub fn g1_closed_with_signs(s: Frequency, p: SpatialPair, signs: &[f64; 8]) -> Result<f64> {
    closed_part(s, p, signs, false)
}

/// `|g(sqrt(i s), x, y)|` from the closed square-root expression
/// `sqrt((cos(c(x-1)) - cosh(c(x-1)))(cos(c y) - cosh(c y)) / (2 s (cosh c - cos c)))`
/// with `c = sqrt(2 |s|)`, evaluated in the log domain.
pub fn modulus_closed(s: Frequency, p: SpatialPair) -> f64 {
    let s = s.value().abs();
    let (hi, lo) = p.ordered();
    if s == 0.0 {
        return lo * (1.0 - hi);
    }
    let c = SQRT_2 * s.sqrt();
    let log_sq = ln_cosh_minus_cos(c * (1.0 - hi)) + ln_cosh_minus_cos(c * lo)
        - ln_cosh_minus_cos(c)
        - (2.0 * s).ln();
    (0.5 * log_sq).exp()
}
