//! Picard iteration `u_0 = u^lin`, `u_{n+1} = u^lin + L u_n` on a fixed
//! characteristic grid.

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use super::kappa::kappa_range;
use super::nonlinearity::Nonlinearity;
use super::operator::apply_l_characteristic;
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, LineFit};
use crate::radial_linear::norm::xkappa_norm_arrays;
use crate::radial_linear::{dr_ru_linear, linear_solution, Axis, FieldOrigin, LinearConfig, RadialProfile, SpaceTimeField};

/// Grid for the iteration. Times run over `[0, t_max]` with step `h`; the
/// reported field covers `r <= t_max + pad`. Internally `r` extends to
/// `2 t_max + pad` so that every characteristic feeding the report stays on
/// the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardGrid {
    pub h: f64,
    pub t_max: f64,
    pub pad: f64,
}

impl Default for PicardGrid {
    fn default() -> Self {
        Self {
            h: 0.5,
            t_max: 80.0,
            pad: 20.0,
        }
    }
}

impl PicardGrid {
    fn steps(&self) -> Result<(usize, usize, usize)> {
        if !(self.h > 0.0) || !(self.t_max > 0.0) || !(self.pad >= 0.0) {
            return Err(Error::Config(format!("invalid Picard grid {self:?}")));
        }
        let n = (self.t_max / self.h).round() as usize;
        let pad = (self.pad / self.h).round() as usize;
        if ((n as f64) * self.h - self.t_max).abs() > 1e-9 * self.t_max
            || ((pad as f64) * self.h - self.pad).abs() > 1e-9 * self.pad.max(1.0)
        {
            return Err(Error::Config(format!(
                "t_max={} and pad={} must be multiples of h={}",
                self.t_max, self.pad, self.h
            )));
        }
        // report columns 0..=n+pad, full columns 0..=2n+pad
        Ok((n, n + pad, 2 * n + pad))
    }
}

/// Outcome of [`picard_solve`]. `iterates[k]` is `‖u_k‖_{X_κ}`, and
/// `differences[k]` is `‖u_{k+1} - u_k‖_{X_κ}`, both on the report region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationReport {
    pub p: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub grid: PicardGrid,
    pub iterates: Vec<f64>,
    pub differences: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest ratio of consecutive differences above the rounding floor.
    pub contraction_ratio: f64,
    /// `log|u(t, 0)|` against `log<t>`; `None` when the window is too short.
    pub decay_fit: Option<LineFit>,
    #[serde(skip)]
    pub field: Option<SpaceTimeField>,
}

/// Window of `t` used for the decay fit on the ray `r = 0`.
pub const DECAY_WINDOW: (f64, f64) = (10.0, 80.0);

/// Number of consecutive growing differences treated as divergence.
pub const DIVERGENCE_RUN: usize = 3;

/// Iterate until `‖u_{n+1} - u_n‖_{X_κ} < tol · max(‖u^lin‖_{X_κ}, tiny)`
/// or `max_iter` differences have been computed.
pub fn picard_solve(
    g: &RadialProfile,
    p: f64,
    kappa: f64,
    grid: PicardGrid,
    tol: f64,
    max_iter: usize,
) -> Result<IterationReport> {
    let range = kappa_range(p)?;
    if !range.contains(kappa) {
        return Err(Error::Domain(format!(
            "kappa={kappa} is outside the admissible range for p={p} ({}{}, {}])",
            if range.lower_open { "(" } else { "[" },
            range.lower,
            range.upper
        )));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Config("Picard needs tol > 0 and max_iter >= 1".into()));
    }
    let f = Nonlinearity::abs_power(p)?;
    let (n, report_cols, full_cols) = grid.steps()?;
    let h = grid.h;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let r_full: Vec<f64> = (0..=full_cols).map(|j| j as f64 * h).collect();

    let lin_cfg = LinearConfig::default();
    let mut u_lin = Array2::<f64>::zeros((n + 1, full_cols + 1));
    let mut d_lin = Array2::<f64>::zeros((n + 1, full_cols + 1));
    {
        use rayon::prelude::*;
        let rows: Vec<Result<(Vec<f64>, Vec<f64>)>> = t
            .par_iter()
            .enumerate()
            .map(|(i, &tt)| {
                // cells with i + j > full_cols never influence the report
                let cols = full_cols + 1 - i;
                let mut a = vec![0.0; full_cols + 1];
                let mut b = vec![0.0; full_cols + 1];
                for j in 0..cols {
                    a[j] = linear_solution(g, tt, r_full[j], &lin_cfg)?;
                    b[j] = dr_ru_linear(g, tt, r_full[j]);
                }
                Ok((a, b))
            })
            .collect();
        for (i, row) in rows.into_iter().enumerate() {
            let (a, b) = row?;
            u_lin.row_mut(i).assign(&ndarray::Array1::from(a));
            d_lin.row_mut(i).assign(&ndarray::Array1::from(b));
        }
    }

    let r_report = &r_full[..=report_cols];
    let norm = |u: &Array2<f64>, d: &Array2<f64>| -> Result<f64> {
        Ok(xkappa_norm_arrays(
            &t,
            r_report,
            u.slice(s![.., ..=report_cols]),
            d.slice(s![.., ..=report_cols]),
            kappa,
        )?
        .total)
    };

    let lin_norm = norm(&u_lin, &d_lin)?;
    let threshold = tol * lin_norm.max(f64::MIN_POSITIVE);
    let floor = 1e3 * f64::EPSILON * lin_norm;

    let mut u = u_lin.clone();
    let mut d = d_lin.clone();
    let mut iterates = vec![lin_norm];
    let mut differences = Vec::new();
    let mut converged = false;
    let mut growing = 0usize;
    for _ in 0..max_iter {
        let l = apply_l_characteristic(&u, &d, h, &f)?;
        let u_next = &u_lin + &l.lu;
        let d_next = &d_lin + &l.dr_rlu;
        let diff = norm(&(&u_next - &u), &(&d_next - &d))?;
        let next_norm = norm(&u_next, &d_next)?;
        if !diff.is_finite() || !next_norm.is_finite() {
            differences.push(diff);
            return Err(Error::Divergence { history: differences });
        }
        if let Some(&prev) = differences.last() {
            growing = if diff > prev { growing + 1 } else { 0 };
        }
        differences.push(diff);
        iterates.push(next_norm);
        u = u_next;
        d = d_next;
        if diff <= threshold {
            converged = true;
            break;
        }
        if growing >= DIVERGENCE_RUN {
            return Err(Error::Divergence { history: differences });
        }
    }

    let contraction_ratio = differences
        .windows(2)
        .filter(|w| w[1] > floor && w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);

    let report_field = SpaceTimeField::new(
        Axis::from_points(t.clone())?,
        Axis::from_points(r_report.to_vec())?,
        u.slice(s![.., ..=report_cols]).to_owned(),
        d.slice(s![.., ..=report_cols]).to_owned(),
        FieldOrigin::Picard,
    )?;
    let decay_fit = decay_fit(&report_field, DECAY_WINDOW.0, DECAY_WINDOW.1.min(grid.t_max)).ok();

    Ok(IterationReport {
        p,
        kappa,
        epsilon: g.epsilon(),
        grid,
        iterations: differences.len(),
        iterates,
        differences,
        converged,
        contraction_ratio,
        decay_fit,
        field: Some(report_field),
    })
}

/// Least-squares slope of `log|u(t, 0)|` against `log<t>` for `t ∈ [lo, hi]`.
pub fn decay_fit(field: &SpaceTimeField, lo: f64, hi: f64) -> Result<LineFit> {
    if !(hi > lo) {
        return Err(Error::Numerical(format!("empty decay window [{lo}, {hi}]")));
    }
    let jt: Vec<f64> = field.t().iter().map(|t| 1.0 + t).collect();
    let u0: Vec<f64> = field.u().column(0).to_vec();
    fit_power_law(&jt, &u0, 1.0 + lo, 1.0 + hi)
}
