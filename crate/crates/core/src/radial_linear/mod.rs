//! Free radial wave equation in three space dimensions with data `(0, g)`:
//!
//! `u(t, r) = ∫_{-1}^{1} H_g(t + rσ) dσ = (1/r) ∫_{t-r}^{t+r} H_g(ρ) dρ`,
//! `H_g(ρ) = ρ g(ρ) / 2`, and the weighted norm of `X_κ`.

pub mod field;
pub mod norm;
pub mod profile;

pub use field::{Axis, FieldOrigin, SpaceTimeField};
pub use norm::{xkappa_norm, xkappa_weight, WeightedNormReport};
pub use profile::{jap, RadialProfile, Shape, Term};

use crate::error::{Error, Result};
use crate::quadrature::{break_points, try_integrate_pieces, QuadConfig};

/// Quadrature settings for the linear solver. The absolute tolerance is taken
/// relative to the data size `epsilon`, so the computed solution is exactly
/// homogeneous of degree one in the data.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinearConfig {
    pub quad: QuadConfig,
}

impl LinearConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            quad: QuadConfig::default().with_abs_tol(tol),
        }
    }

    fn scaled(&self, g: &RadialProfile) -> QuadConfig {
        let scale = if g.epsilon() > 0.0 { g.epsilon() } else { 1.0 };
        QuadConfig {
            abs_tol: self.quad.abs_tol * scale,
            ..self.quad
        }
    }
}

/// `u^lin(t, r)` for data `u(0) = 0`, `u_t(0) = g`.
pub fn linear_solution(g: &RadialProfile, t: f64, r: f64, cfg: &LinearConfig) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("linear solution needs t >= 0, got {t}")));
    }
    if g.is_zero() {
        return Ok(0.0);
    }
    let r = r.abs();
    if r == 0.0 {
        return Ok(t * g.g(t));
    }
    // σ values where t + rσ crosses a kink of H
    let mut breaks = Vec::new();
    for k in g.kinks() {
        breaks.push((k - t) / r);
        breaks.push((-k - t) / r);
    }
    breaks.push(-t / r);
    let points = break_points(-1.0, 1.0, &breaks);
    let res = try_integrate_pieces(|s| Ok(g.h(t + r * s)), &points, &cfg.scaled(g))?;
    Ok(res.value)
}

/// `∂_r(r u^lin)(t, r) = H_g(t + r) + H_g(t - r)`.
pub fn dr_ru_linear(g: &RadialProfile, t: f64, r: f64) -> f64 {
    g.h(t + r) + g.h(t - r)
}

/// `r ∂_t u^lin(t, r) = H_g(t + r) - H_g(t - r)`.
pub fn r_dt_linear(g: &RadialProfile, t: f64, r: f64) -> f64 {
    g.h(t + r) - g.h(t - r)
}

/// Sample `u^lin` and `∂_r(r u^lin)` on a tensor grid; cells are filled
/// independently, so the result does not depend on the thread count.
pub fn solve_linear(g: &RadialProfile, t: &Axis, r: &Axis, cfg: &LinearConfig) -> Result<SpaceTimeField> {
    SpaceTimeField::try_from_fn(t.clone(), r.clone(), FieldOrigin::Linear, |tt, rr| {
        Ok((linear_solution(g, tt, rr, cfg)?, dr_ru_linear(g, tt, rr)))
    })
}
