//! Plane integrals of radial three-dimensional fields:
//! `Ru(t, ρ) = 2π ∫_ρ^∞ u(t, r) r dr`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, LineFit};
use crate::radial_linear::SpaceTimeField;

/// Normalization of the radial Radon transform in three dimensions: the
/// plane `x·ω = ρ` meets the sphere `|x| = r` in a circle of length
/// `2π sqrt(r^2-ρ^2)`, and `dS = r/sqrt(r^2-ρ^2) dr dθ`.
pub const C3: f64 = 2.0 * PI;

/// `Ru(t, ρ)` at a stored time `t`, treating `u(t, ·)` as piecewise linear
/// between the stored radii (each cell is integrated exactly).
pub fn radon_n3(field: &SpaceTimeField, t: f64, rho: f64) -> Result<f64> {
    let rho = rho.abs();
    let scale = field.t_axis().step().unwrap_or(1.0);
    let i = field
        .t_axis()
        .index_of(t, 1e-9 * scale.max(1.0))
        .ok_or_else(|| Error::Domain(format!("t={t} is not a stored time")))?;
    let r = field.r();
    let row = field.u().row(i);
    let mut acc = 0.0;
    for j in 0..r.len() - 1 {
        let (a, b) = (r[j], r[j + 1]);
        if b <= rho {
            continue;
        }
        let lo = a.max(rho);
        let slope = (row[j + 1] - row[j]) / (b - a);
        let u = |x: f64| row[j] + slope * (x - a);
        // Simpson is exact for the quadratic u(r) r
        let mid = 0.5 * (lo + b);
        acc += (b - lo) / 6.0 * (u(lo) * lo + 4.0 * u(mid) * mid + u(b) * b);
    }
    Ok(C3 * acc)
}

/// Slope of `log Ru(t, ρ)` against `log(1 + t - ρ)` at fixed `ρ` over the
/// stored times in `window`.
pub fn radon_growth(field: &SpaceTimeField, rho: f64, window: (f64, f64)) -> Result<LineFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &t in field.t() {
        if t >= window.0 && t <= window.1 && t > rho {
            xs.push(1.0 + t - rho);
            ys.push(radon_n3(field, t, rho)?);
        }
    }
    fit_power_law(&xs, &ys, f64::MIN_POSITIVE, f64::INFINITY)
}
