//! The functionals `F(t) = ∫ u dx` and `F_1(t) = ∫ u φ_1 e^{-t} dx` of a
//! radial field, and the lower bounds they are compared with.

use serde::{Deserialize, Serialize};

use super::phi::{log_phi1, sphere_area};
use crate::error::{Error, Result};
use crate::quadrature::{trapezoid, QuadConfig};
use crate::radial_linear::{RadialProfile, SpaceTimeField};
use crate::transforms::InitialData;

/// `F` and `F_1` at every stored time, by the trapezoid rule over the
/// stored radii (the field is assumed to vanish beyond them).
pub fn glassey_functionals(field: &SpaceTimeField, n: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    let area = sphere_area(n)?;
    let r = field.r();
    let dim = (n - 1) as i32;
    let measure: Vec<f64> = r.iter().map(|x| x.powi(dim)).collect();
    let log_phi: Vec<f64> = r.iter().map(|&x| log_phi1(x, n)).collect::<Result<_>>()?;
    let mut f = Vec::with_capacity(field.t().len());
    let mut f1 = Vec::with_capacity(field.t().len());
    for (i, &t) in field.t().iter().enumerate() {
        let row = field.u().row(i);
        let a: Vec<f64> = row.iter().zip(&measure).map(|(u, m)| u * m).collect();
        // φ_1 e^{-t} formed in log space: φ_1 grows like e^r
        let b: Vec<f64> = a.iter().zip(&log_phi).map(|(v, lp)| v * (lp - t).exp()).collect();
        f.push(area * trapezoid(r, &a));
        f1.push(area * trapezoid(r, &b));
    }
    Ok((f, f1))
}

fn weighted_integral(g: &RadialProfile, n: u32) -> Result<f64> {
    if g.is_zero() {
        return Ok(0.0);
    }
    let area = sphere_area(n)?;
    let end = g.effective_radius(1e-18);
    if !end.is_finite() {
        return Err(Error::Domain("data must decay to integrate against phi1".into()));
    }
    let mut breaks = g.kinks();
    breaks.extend((1..16).map(|k| end * k as f64 / 16.0));
    let cfg = QuadConfig::default().with_abs_tol(0.0).with_rel_tol(1e-12);
    let dim = (n - 1) as i32;
    let res = crate::quadrature::try_integrate_pieces(
        |r| Ok(g.g(r) * r.powi(dim) * log_phi1(r, n)?.exp()),
        &crate::quadrature::break_points(0.0, end, &breaks),
        &cfg,
    )?;
    Ok(area * res.value)
}

/// `(1/2)(1 - e^{-2t}) ∫(f+g)φ_1 + e^{-2t} ∫ f φ_1`, the lower bound on
/// `F_1(t)` for nonnegative forcing. With zero forcing it is attained.
pub fn f1_lower_bound(data: &InitialData, n: u32, t: &[f64]) -> Result<Vec<f64>> {
    let a = weighted_integral(&data.u0, n)?;
    let b = weighted_integral(&data.u1, n)?;
    Ok(t.iter()
        .map(|&t| {
            let e = (-2.0 * t).exp();
            0.5 * (1.0 - e) * (a + b) + e * a
        })
        .collect())
}

/// First stored time after which `F_1 >= (1 - rel_tol) · bound` holds at
/// every later time; `None` if it fails at the last time.
pub fn measured_t0(t: &[f64], f1: &[f64], bound: &[f64], rel_tol: f64) -> Option<f64> {
    let ok = |k: usize| f1[k] >= bound[k] - rel_tol * bound[k].abs();
    let mut start = None;
    for k in (0..t.len()).rev() {
        if ok(k) {
            start = Some(t[k]);
        } else {
            break;
        }
    }
    start
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// Smallest measured `F'' <t>^{(n+1)(p-1)} / |F|^p` over the window.
    pub min_constant: f64,
    pub max_constant: f64,
    pub samples: usize,
}

/// Measure the constant in `F'' >= c <t>^{-(n+1)(p-1)} |F|^p`, with `F''`
/// from second differences of the series on a uniform time grid.
pub fn holder_constant(t: &[f64], f: &[f64], n: u32, p: f64, window: (f64, f64)) -> Result<HolderReport> {
    if t.len() < 3 {
        return Err(Error::Numerical("need at least three samples".into()));
    }
    let dt = t[1] - t[0];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut samples = 0;
    for k in 1..t.len() - 1 {
        if t[k] < window.0 || t[k] > window.1 {
            continue;
        }
        let fdd = (f[k + 1] - 2.0 * f[k] + f[k - 1]) / (dt * dt);
        let c = fdd * (1.0 + t[k]).powf((n + 1) as f64 * (p - 1.0)) / f[k].abs().powf(p);
        lo = lo.min(c);
        hi = hi.max(c);
        samples += 1;
    }
    if samples == 0 {
        return Err(Error::Numerical(format!("no samples in window {window:?}")));
    }
    Ok(HolderReport {
        min_constant: lo,
        max_constant: hi,
        samples,
    })
}
