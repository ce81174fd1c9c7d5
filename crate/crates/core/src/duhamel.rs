//! Time quadrature of the Duhamel integral `∫₀ᵗ P(σ) dσ`, where `P(σ)` is
//! the forcing at time `σ` propagated over `t - σ`.

use crate::error::Result;
use crate::quad::{adaptive_batched, Integral, Tolerance};

/// Below this propagation time the propagator is replaced by its `τ → 0`
/// limit; the neglected part is `O(τ²)`.
pub(crate) const TAU_FLOOR: f64 = 1e-5;

pub(crate) const DEFAULT_TIME_TOLERANCE: f64 = 1e-8;

/// Integrates `propagate` over `σ ∈ [0, t]`. With `singular_at_t0` the
/// substitution `σ = u²` absorbs an integrable `σ^{-1/2}` singularity.
pub(crate) fn integrate<P>(t: f64, singular_at_t0: bool, tol: f64, mut propagate: P) -> Result<Integral>
where
    P: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let tolerance = Tolerance {
        abs: tol,
        rel: 0.0,
        max_intervals: 200,
    };
    if singular_at_t0 {
        adaptive_batched(
            |us: &[f64]| {
                let sigmas: Vec<f64> = us.iter().map(|u| u * u).collect();
                let values = propagate(&sigmas)?;
                Ok(values.iter().zip(us).map(|(v, u)| 2.0 * u * v).collect())
            },
            0.0,
            t.sqrt(),
            tolerance,
        )
    } else {
        adaptive_batched(propagate, 0.0, t, tolerance)
    }
}
