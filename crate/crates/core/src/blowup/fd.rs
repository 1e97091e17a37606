//! Leapfrog finite differences for radial solutions of
//! `u_tt - u_rr - (n-1)/r u_r + μ/<t> u_t + mass/<t>^2 u = c <t>^w |u|^p`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::diagnostics::{BlowupDiagnostics, Verdict};
use super::functionals::glassey_functionals;
use crate::error::{Error, Result};
use crate::radial_linear::{Axis, FieldOrigin, SpaceTimeField};
use crate::transforms::ProblemSpec;

/// Largest `|u|` tolerated before the run is stopped as a blow-up candidate.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Relative size below which a non-compact profile counts as zero when
/// sizing the domain.
const TAIL_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    /// Radial step.
    pub h: f64,
    /// Requested `dt / h`; must not exceed `1/sqrt(n)`.
    pub cfl: f64,
    /// Spacing of the stored time rows; `dt` is shrunk so that it divides it.
    pub save_dt: f64,
    /// Largest stored radius; defaults to the light cone `R_data + horizon`.
    #[serde(default)]
    pub r_out: Option<f64>,
}

impl Default for FdGrid {
    fn default() -> Self {
        Self {
            h: 0.05,
            cfl: 0.5,
            save_dt: 0.5,
            r_out: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FdOutcome {
    pub field: SpaceTimeField,
    pub dt: f64,
    pub steps: usize,
    /// Time at which `|u|` passed [`OVERFLOW_GUARD`]; the field stops at
    /// the last stored row before it.
    pub overflow_time: Option<f64>,
}

/// Radius outside which the data vanish (or fall below `TAIL_TOL` relative
/// to their size).
pub fn data_radius(spec: &ProblemSpec) -> Result<f64> {
    let data = spec
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("finite differences need initial data".into()))?;
    let r = data.u0.effective_radius(TAIL_TOL).max(data.u1.effective_radius(TAIL_TOL));
    if !r.is_finite() {
        return Err(Error::Config("initial data do not decay to zero".into()));
    }
    Ok(r)
}

pub fn radial_fd_solve(spec: &ProblemSpec, grid: &FdGrid, horizon: f64) -> Result<FdOutcome> {
    spec.validate()?;
    spec.require_solvable()?;
    let n = spec.n;
    if n > 3 {
        return Err(Error::Config(format!("finite differences support n <= 3, got {n}")));
    }
    if !(grid.h > 0.0) || !(grid.save_dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::Config("h, save_dt and horizon must be positive".into()));
    }
    let cfl_max = 1.0 / (n as f64).sqrt();
    if !(grid.cfl > 0.0) || grid.cfl > cfl_max + 1e-12 {
        return Err(Error::Config(format!(
            "CFL number {} outside (0, {cfl_max:.4}] for n = {n}",
            grid.cfl
        )));
    }
    let r_data = data_radius(spec)?;
    let data = spec.data.as_ref().expect("checked by data_radius");
    let h = grid.h;
    let sub = (grid.save_dt / (grid.cfl * h)).ceil() as usize;
    let dt = grid.save_dt / sub as f64;
    let saves = (horizon / grid.save_dt).round() as usize;
    if ((saves as f64) * grid.save_dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::Config(format!(
            "horizon {horizon} is not a multiple of save_dt {}",
            grid.save_dt
        )));
    }
    let r_out = grid.r_out.unwrap_or(r_data + horizon);
    let j_out = (r_out / h).ceil() as usize;
    let total_steps = saves * sub;
    // cells beyond R_data + t + 2h stay at zero: the update is restricted to
    // the light cone, which also keeps the outer boundary out of reach
    let cone = |t: f64| ((r_data + t) / h + 2.0 + 1e-9).floor() as usize + 1;
    let nr = (cone(horizon) + 2).max(j_out + 2);
    let r: Vec<f64> = (0..nr).map(|j| j as f64 * h).collect();

    let coef = spec.equation_coefficients();
    let nf = n as f64;
    let accel = |t: f64, u: &[f64], ut: Option<&[f64]>, j: usize, lap: f64| -> f64 {
        let jt = 1.0 + t;
        let forcing = coef.nonlinearity_constant * jt.powf(coef.weight_exponent) * u[j].abs().powf(spec.p);
        let damping = ut.map(|v| coef.damping / jt * v[j]).unwrap_or(0.0);
        lap - damping - coef.mass / (jt * jt) * u[j] + forcing
    };
    let laplacian = |u: &[f64], j: usize| -> f64 {
        if j == 0 {
            2.0 * nf * (u[1] - u[0]) / (h * h)
        } else {
            (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h) + (nf - 1.0) / r[j] * (u[j + 1] - u[j - 1]) / (2.0 * h)
        }
    };

    let u0: Vec<f64> = r.iter().map(|&x| data.u0.g(x)).collect();
    let u1: Vec<f64> = r.iter().map(|&x| data.u1.g(x)).collect();
    let mut prev = u0.clone();
    let mut cur = vec![0.0; nr];
    for j in 0..cone(dt).min(nr - 1) {
        let a = accel(0.0, &u0, Some(&u1), j, laplacian(&u0, j));
        cur[j] = u0[j] + dt * u1[j] + 0.5 * dt * dt * a;
    }
    let mut next = vec![0.0; nr];

    let mut rows: Vec<Vec<f64>> = vec![u0[..=j_out].to_vec()];
    let mut times = vec![0.0];
    let mut overflow_time = None;
    let mut steps = 1;
    if sub == 1 {
        rows.push(cur[..=j_out].to_vec());
        times.push(dt);
    }
    while steps < total_steps {
        let t = steps as f64 * dt;
        let jt = 1.0 + t;
        let half_damp = 0.5 * dt * coef.damping / jt;
        let active = cone(t + dt).min(nr - 1);
        for j in 0..active {
            let a = accel(t, &cur, None, j, laplacian(&cur, j));
            next[j] = (2.0 * cur[j] - (1.0 - half_damp) * prev[j] + dt * dt * a) / (1.0 + half_damp);
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        steps += 1;
        let peak = cur[..active].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(peak <= OVERFLOW_GUARD) {
            overflow_time = Some(steps as f64 * dt);
            break;
        }
        if steps % sub == 0 {
            rows.push(cur[..=j_out].to_vec());
            times.push(steps as f64 * dt);
        }
    }

    let ncols = j_out + 1;
    let mut u = Array2::<f64>::zeros((rows.len(), ncols));
    let mut dru = Array2::<f64>::zeros((rows.len(), ncols));
    for (i, row) in rows.iter().enumerate() {
        for j in 0..ncols {
            u[[i, j]] = row[j];
            let ur = if j == 0 {
                0.0
            } else if j + 1 < ncols {
                (row[j + 1] - row[j - 1]) / (2.0 * h)
            } else {
                (row[j] - row[j - 1]) / h
            };
            dru[[i, j]] = row[j] + r[j] * ur;
        }
    }
    let field = SpaceTimeField::new(
        Axis::from_points(times)?,
        Axis::from_points(r[..ncols].to_vec())?,
        u,
        dru,
        FieldOrigin::FiniteDifference,
    )?;
    Ok(FdOutcome {
        field,
        dt,
        steps,
        overflow_time,
    })
}

/// Solve at `h` and `h/2` and read off `F`, `F_1` from the finer run. A
/// blow-up candidate needs the overflow guard to fire at both resolutions.
pub fn fd_blowup_diagnostics(
    spec: &ProblemSpec,
    grid: &FdGrid,
    horizon: f64,
    window: Option<(f64, f64)>,
) -> Result<(BlowupDiagnostics, FdOutcome)> {
    let coarse = radial_fd_solve(spec, grid, horizon)?;
    let fine_grid = FdGrid { h: 0.5 * grid.h, ..*grid };
    let fine = radial_fd_solve(spec, &fine_grid, horizon)?;
    let verdict = match (coarse.overflow_time, fine.overflow_time) {
        (Some(a), Some(b)) => Verdict::BlewUp {
            t_star: b,
            step_halving_change: (a - b).abs() / b,
        },
        (None, None) => Verdict::BoundedThroughHorizon { horizon },
        _ => Verdict::Inconclusive {
            reason: "overflow guard fired at one resolution only".into(),
        },
    };
    let (f, f1) = glassey_functionals(&fine.field, spec.n)?;
    let mut diag = BlowupDiagnostics::new(fine.field.t().to_vec(), f, f1, verdict);
    if let Some(w) = window {
        diag.fit_growth(w)?;
    }
    Ok((diag, fine))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_linear::RadialProfile;
    use crate::transforms::Form;

    fn wave(n: u32, c: f64, u1: RadialProfile) -> ProblemSpec {
        let mut spec = ProblemSpec::damped(n, 0.0, 0.0, 2.0).unwrap();
        spec.form = Form::WeightedWave;
        spec.nonlinearity_constant = c;
        spec.with_data(RadialProfile::zero(1.5).unwrap(), u1)
    }

    #[test]
    fn zero_data_stay_zero() {
        let spec = wave(3, 1.0, RadialProfile::zero(1.5).unwrap());
        let out = radial_fd_solve(&spec, &FdGrid::default(), 5.0).unwrap();
        assert!(out.field.u().iter().all(|v| *v == 0.0));
        assert!(out.overflow_time.is_none());
    }

    #[test]
    fn rejects_unstable_cfl() {
        let spec = wave(3, 1.0, RadialProfile::bump(1.0, 1.0, 3.0, 1.5).unwrap());
        let grid = FdGrid { cfl: 0.7, ..FdGrid::default() };
        assert!(matches!(radial_fd_solve(&spec, &grid, 1.0), Err(Error::Config(_))));
    }

    /// `u = (F(t+r) - F(t-r)) / r` with `F' = ` odd extension of `r g / 2`
    /// is the free solution in three dimensions with data `(0, g)`.
    #[test]
    fn free_wave_matches_dalembert_in_3d() {
        let g = RadialProfile::bump(1.0, 2.0, 4.0, 1.5).unwrap();
        let spec = wave(3, 0.0, g.clone());
        let errs: Vec<f64> = [0.04, 0.02]
            .iter()
            .map(|&h| {
                let out = radial_fd_solve(&spec, &FdGrid { h, ..FdGrid::default() }, 3.0).unwrap();
                let f = &out.field;
                let i = f.t().len() - 1;
                let t = f.t()[i];
                let cfg = crate::radial_linear::LinearConfig::with_tol(1e-13);
                f.r()
                    .iter()
                    .enumerate()
                    .map(|(j, &r)| {
                        (f.u()[[i, j]] - crate::radial_linear::linear_solution(&g, t, r, &cfg).unwrap()).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[1] < 2e-3, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!((3.0..5.0).contains(&ratio), "{errs:?}");
    }

    #[test]
    fn free_energy_is_conserved() {
        let g = RadialProfile::bump(1.0, 2.0, 4.0, 1.5).unwrap();
        let spec = wave(3, 0.0, g);
        let grid = FdGrid { h: 0.02, cfl: 0.5, save_dt: 0.02, r_out: None };
        let out = radial_fd_solve(&spec, &grid, 4.0).unwrap();
        let f = &out.field;
        let h = grid.h;
        let energy = |i: usize| -> f64 {
            let (a, b) = (f.u().row(i - 1), f.u().row(i + 1));
            let row = f.u().row(i);
            (1..f.r().len() - 1)
                .map(|j| {
                    let ut = (b[j] - a[j]) / (2.0 * grid.save_dt);
                    let ur = (row[j + 1] - row[j - 1]) / (2.0 * h);
                    (ut * ut + ur * ur) * f.r()[j] * f.r()[j] * h
                })
                .sum()
        };
        let e0 = energy(1);
        let e1 = energy(f.t().len() - 2);
        assert!(((e1 - e0) / e0).abs() < 1e-3, "{e0} -> {e1}");
    }

    #[test]
    fn finite_speed_of_propagation() {
        let g = RadialProfile::bump(1.0, 2.0, 4.0, 1.5).unwrap();
        let spec = wave(3, 1.0, g);
        let grid = FdGrid::default();
        let out = radial_fd_solve(&spec, &grid, 6.0).unwrap();
        let f = &out.field;
        for (i, &t) in f.t().iter().enumerate() {
            for (j, &r) in f.r().iter().enumerate() {
                if r > 2.0 + t + 2.0 * grid.h + 1e-9 {
                    assert!(f.u()[[i, j]].abs() < 1e-12, "u({t},{r}) = {}", f.u()[[i, j]]);
                }
            }
        }
    }
}
