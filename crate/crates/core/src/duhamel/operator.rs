//! The Duhamel operator
//!
//! `Lu(t, r) = ∫_0^t <s>^{-(p-1)} ∫_{-1}^{1} H_u[s](t - s + rσ) dσ ds`,
//! `H_u[s](ρ) = ρ f(u(s, ρ)) / 2`,
//!
//! evaluated two ways: pointwise by nested adaptive quadrature over an
//! interpolated field, and on a whole characteristic grid (`Δt = Δr`) where
//! every characteristic `t - s ± r` lands on a node.

use ndarray::Array2;
use rayon::prelude::*;

use super::nonlinearity::Nonlinearity;
use crate::error::{Error, Result};
use crate::quadrature::{break_points, try_integrate_pieces, QuadConfig};
use crate::radial_linear::field::SpaceTimeField;

#[inline]
fn time_weight(p: f64, s: f64) -> f64 {
    (1.0 + s).powf(-(p - 1.0))
}

fn h_of(u: &SpaceTimeField, f: &Nonlinearity, s: f64, rho: f64) -> Result<f64> {
    Ok(0.5 * rho * f.eval(u.u_at(s, rho)?))
}

fn check_time(u: &SpaceTimeField, t: f64) -> Result<()> {
    if !(t >= 0.0) || t < u.t_axis().first() || t > u.t_axis().last() * (1.0 + 1e-14) {
        return Err(Error::Domain(format!(
            "t={t} outside the field's time range [{}, {}]",
            u.t_axis().first(),
            u.t_axis().last()
        )));
    }
    Ok(())
}

/// `±r_j` nodes strictly inside `(a, b)`, and the origin.
fn rho_breaks(u: &SpaceTimeField, a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    for &x in u.r() {
        if x > a && x < b {
            out.push(x);
        }
        if -x > a && -x < b {
            out.push(-x);
        }
    }
    out
}

/// Times `s` in `(0, t)` where the field or a characteristic `t - s ± r`
/// crosses a grid line.
fn s_breaks(u: &SpaceTimeField, t: f64, r: f64) -> Vec<f64> {
    let mut out: Vec<f64> = u.t().iter().copied().filter(|s| *s > 0.0 && *s < t).collect();
    for &x in u.r() {
        for s in [t + r - x, t - r - x, t - r + x] {
            if s > 0.0 && s < t {
                out.push(s);
            }
        }
    }
    out
}

/// `Lu(t, r)` by nested adaptive quadrature, with `u` interpolated bilinearly.
/// For `t <= r` the inner integral runs over `[r - (t - s), r + (t - s)]`
/// only, since `H_u[s]` is odd.
pub fn apply_l(u: &SpaceTimeField, f: &Nonlinearity, t: f64, r: f64, cfg: &QuadConfig) -> Result<f64> {
    check_time(u, t)?;
    let r = r.abs();
    if t == 0.0 {
        return Ok(0.0);
    }
    let p = f.p;
    let outer_points = break_points(0.0, t, &s_breaks(u, t, r));
    if r == 0.0 {
        let res = try_integrate_pieces(
            |s| Ok(time_weight(p, s) * 2.0 * h_of(u, f, s, t - s)?),
            &outer_points,
            cfg,
        )?;
        return Ok(res.value);
    }
    let inner_cfg = QuadConfig {
        abs_tol: cfg.abs_tol * r / (4.0 * t.max(1.0)),
        ..*cfg
    };
    let inner = |s: f64| -> Result<f64> {
        let (a, b) = if t <= r {
            (r - (t - s), r + (t - s))
        } else {
            (t - s - r, t - s + r)
        };
        if b <= a {
            return Ok(0.0);
        }
        let points = break_points(a, b, &rho_breaks(u, a, b));
        let res = try_integrate_pieces(|rho| h_of(u, f, s, rho), &points, &inner_cfg)?;
        Ok(time_weight(p, s) * res.value)
    };
    let res = try_integrate_pieces(inner, &outer_points, cfg)?;
    Ok(res.value / r)
}

/// `∂_r(r Lu)(t, r) = ∫_0^t <s>^{-(p-1)} (H_u[s](t-s+r) + H_u[s](t-s-r)) ds`.
pub fn dr_rlu(u: &SpaceTimeField, f: &Nonlinearity, t: f64, r: f64, cfg: &QuadConfig) -> Result<f64> {
    check_time(u, t)?;
    let r = r.abs();
    if t == 0.0 {
        return Ok(0.0);
    }
    let p = f.p;
    let points = break_points(0.0, t, &s_breaks(u, t, r));
    let res = try_integrate_pieces(
        |s| Ok(time_weight(p, s) * (h_of(u, f, s, t - s + r)? + h_of(u, f, s, t - s - r)?)),
        &points,
        cfg,
    )?;
    Ok(res.value)
}

/// Composite Simpson weights for `k + 1` equally spaced nodes with unit
/// spacing; an odd interval count ends with a 3/8 panel.
fn simpson_weights(k: usize) -> Vec<f64> {
    let mut w = vec![0.0; k + 1];
    match k {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        _ => {
            let (even, tail) = if k.is_multiple_of(2) { (k, 0) } else { (k - 3, 3) };
            let mut i = 0;
            while i < even {
                w[i] += 1.0 / 3.0;
                w[i + 1] += 4.0 / 3.0;
                w[i + 2] += 1.0 / 3.0;
                i += 2;
            }
            if tail == 3 {
                w[i] += 3.0 / 8.0;
                w[i + 1] += 9.0 / 8.0;
                w[i + 2] += 9.0 / 8.0;
                w[i + 3] += 3.0 / 8.0;
            }
        }
    }
    w
}

/// `Lu` and `∂_r(rLu)` on the characteristic grid `t_i = i h`, `r_j = j h`.
///
/// Inputs are `u` and `∂_r(ru)` with shape `(N+1, M+1)`, `M >= N`. A cell is
/// computable when `i + j <= M`; the returned `valid[i]` is the number of
/// computable columns in row `i`, the rest are zero.
pub struct CharacteristicL {
    pub lu: Array2<f64>,
    pub dr_rlu: Array2<f64>,
    pub valid: Vec<usize>,
}

pub fn apply_l_characteristic(
    u: &Array2<f64>,
    dr_ru: &Array2<f64>,
    h: f64,
    f: &Nonlinearity,
) -> Result<CharacteristicL> {
    let (nt, nr) = u.dim();
    if dr_ru.dim() != (nt, nr) {
        return Err(Error::Domain("u and dr_ru shapes differ".into()));
    }
    if nr < nt {
        return Err(Error::Domain(format!(
            "characteristic grid needs at least as many r nodes as t nodes ({nr} < {nt})"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Domain("grid step must be positive".into()));
    }
    let p = f.p;
    let m = nr - 1;

    // H and H' at the nodes; ρ u_ρ = ∂_ρ(ρu) - u
    let mut hh = Array2::<f64>::zeros((nt, nr));
    let mut hp = Array2::<f64>::zeros((nt, nr));
    for k in 0..nt {
        for j in 0..nr {
            let rho = j as f64 * h;
            let uu = u[[k, j]];
            let fu = f.eval(uu);
            hh[[k, j]] = 0.5 * rho * fu;
            hp[[k, j]] = 0.5 * (fu + f.derivative(uu) * (dr_ru[[k, j]] - uu));
        }
    }
    // G(s, ρ) = ∫_0^ρ H(s, x) dx by the Hermite-corrected trapezoid rule
    let mut gg = Array2::<f64>::zeros((nt, nr));
    for k in 0..nt {
        for j in 0..m {
            gg[[k, j + 1]] = gg[[k, j]]
                + 0.5 * h * (hh[[k, j]] + hh[[k, j + 1]])
                + h * h / 12.0 * (hp[[k, j]] - hp[[k, j + 1]]);
        }
    }
    let weights: Vec<f64> = (0..nt).map(|k| time_weight(p, k as f64 * h)).collect();
    let simpson: Vec<Vec<f64>> = (0..nt).map(simpson_weights).collect();

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..nt)
        .into_par_iter()
        .map(|i| {
            let cols = m + 1 - i;
            let mut lu = vec![0.0; nr];
            let mut dlu = vec![0.0; nr];
            if i == 0 {
                return (lu, dlu);
            }
            let sw = &simpson[i];
            for j in 0..cols {
                let mut acc_l = 0.0;
                let mut acc_d = 0.0;
                for k in 0..=i {
                    let wk = sw[k] * weights[k];
                    let plus = i - k + j;
                    let diff = i as isize - k as isize - j as isize;
                    let minus = diff.unsigned_abs();
                    let h_minus = if diff >= 0 { hh[[k, minus]] } else { -hh[[k, minus]] };
                    acc_d += wk * (hh[[k, plus]] + h_minus);
                    if j == 0 {
                        acc_l += wk * 2.0 * hh[[k, i - k]];
                    } else {
                        acc_l += wk * (gg[[k, plus]] - gg[[k, minus]]);
                    }
                }
                lu[j] = if j == 0 { acc_l * h } else { acc_l * h / (j as f64 * h) };
                dlu[j] = acc_d * h;
            }
            (lu, dlu)
        })
        .collect();

    let mut lu = Array2::<f64>::zeros((nt, nr));
    let mut dr_rlu = Array2::<f64>::zeros((nt, nr));
    for (i, (a, b)) in rows.into_iter().enumerate() {
        for j in 0..nr {
            lu[[i, j]] = a[j];
            dr_rlu[[i, j]] = b[j];
        }
    }
    let valid = (0..nt).map(|i| m + 1 - i).collect();
    Ok(CharacteristicL { lu, dr_rlu, valid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_linear::field::{Axis, FieldOrigin};
    use approx::assert_abs_diff_eq;

    fn bilinear_field(h: f64, t_max: f64, r_max: f64) -> SpaceTimeField {
        let t = Axis::with_step(0.0, t_max, h).unwrap();
        let r = Axis::with_step(0.0, r_max, h).unwrap();
        // exactly representable by bilinear interpolation in (s, |ρ|)
        SpaceTimeField::try_from_fn(t, r, FieldOrigin::Synthetic, |s, rho| {
            let u = (1.0 + 0.3 * s) * (1.0 + 0.2 * rho) * 0.1;
            Ok((u, 0.0))
        })
        .unwrap()
    }

    fn exact_u(s: f64, rho: f64) -> f64 {
        (1.0 + 0.3 * s) * (1.0 + 0.2 * rho.abs()) * 0.1
    }

    fn simpson_panel(n: usize, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = g(a) + g(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(a + h * i as f64);
        }
        acc * h / 3.0
    }

    /// Tensor-product Simpson over (s, σ), splitting σ at the sign change of
    /// the characteristic where `|ρ|` has its kink.
    fn tensor_oracle(p: f64, t: f64, r: f64) -> f64 {
        let hfun = |s: f64, rho: f64| 0.5 * rho * exact_u(s, rho).abs().powf(p);
        let inner = |s: f64| {
            let g = |sig: f64| hfun(s, t - s + r * sig);
            let kink = -(t - s) / r;
            if kink > -1.0 && kink < 1.0 {
                simpson_panel(500, -1.0, kink, g) + simpson_panel(500, kink, 1.0, g)
            } else {
                simpson_panel(1000, -1.0, 1.0, g)
            }
        };
        simpson_panel(1000, 0.0, t, |s| (1.0 + s).powf(-(p - 1.0)) * inner(s))
    }

    #[test]
    fn zero_field_gives_zero() {
        let t = Axis::with_step(0.0, 4.0, 0.5).unwrap();
        let r = Axis::with_step(0.0, 8.0, 0.5).unwrap();
        let z = SpaceTimeField::zeros(t, r, FieldOrigin::Synthetic);
        let f = Nonlinearity::abs_power(1.9).unwrap();
        let cfg = QuadConfig::default();
        assert_eq!(apply_l(&z, &f, 3.0, 1.0, &cfg).unwrap(), 0.0);
        assert_eq!(dr_rlu(&z, &f, 3.0, 1.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn matches_tensor_simpson_oracle() {
        let field = bilinear_field(0.5, 4.0, 10.0);
        let f = Nonlinearity::abs_power(1.9).unwrap();
        let cfg = QuadConfig::default().with_abs_tol(1e-13);
        for (t, r) in [(3.0, 1.2), (2.0, 2.5)] {
            let value = apply_l(&field, &f, t, r, &cfg).unwrap();
            let oracle = tensor_oracle(1.9, t, r);
            assert_abs_diff_eq!(value, oracle, epsilon = 1e-8);
        }
    }

    #[test]
    fn even_and_zero_at_start() {
        let field = bilinear_field(0.5, 4.0, 10.0);
        let f = Nonlinearity::abs_power(2.2).unwrap();
        let cfg = QuadConfig::default().with_abs_tol(1e-12);
        let a = apply_l(&field, &f, 2.5, 1.5, &cfg).unwrap();
        let b = apply_l(&field, &f, 2.5, -1.5, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(apply_l(&field, &f, 0.0, 1.5, &cfg).unwrap(), 0.0);
        assert!(matches!(apply_l(&field, &f, 5.0, 1.0, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn reduced_domain_agrees_with_full_interval() {
        let field = bilinear_field(0.5, 4.0, 12.0);
        let f = Nonlinearity::abs_power(1.9).unwrap();
        let cfg = QuadConfig::default().with_abs_tol(1e-13);
        let (t, r) = (2.0, 3.0);
        let reduced = apply_l(&field, &f, t, r, &cfg).unwrap();
        assert_abs_diff_eq!(reduced, tensor_oracle(1.9, t, r), epsilon = 1e-8);
    }

    #[test]
    fn radial_derivative_matches_difference_quotient() {
        let field = bilinear_field(0.25, 4.0, 10.0);
        let f = Nonlinearity::abs_power(1.9).unwrap();
        let cfg = QuadConfig::default().with_abs_tol(1e-13);
        let (t, r) = (3.0, 1.3);
        let d = 1e-3;
        let ru = |rr: f64| rr * apply_l(&field, &f, t, rr, &cfg).unwrap();
        let fd = (ru(r + d) - ru(r - d)) / (2.0 * d);
        assert_abs_diff_eq!(dr_rlu(&field, &f, t, r, &cfg).unwrap(), fd, epsilon = 1e-6);
    }

    fn characteristic_errors(h: f64) -> Vec<(f64, f64)> {
        let field = bilinear_field(h, 4.0, 10.0);
        let f = Nonlinearity::abs_power(1.9).unwrap();
        // ∂_r(ru) of the exact field, needed by the Hermite correction
        let exact = SpaceTimeField::try_from_fn(
            field.t_axis().clone(),
            field.r_axis().clone(),
            FieldOrigin::Synthetic,
            |s, rho| Ok((exact_u(s, rho), 0.1 * (1.0 + 0.3 * s) * (1.0 + 0.4 * rho))),
        )
        .unwrap();
        let grid = apply_l_characteristic(exact.u(), exact.dr_ru(), h, &f).unwrap();
        let cfg = QuadConfig::default().with_abs_tol(1e-13);
        [(3.0, 0.0), (3.0, 1.25), (4.0, 2.0), (2.0, 5.0)]
            .into_iter()
            .map(|(t, r)| {
                let (i, j) = ((t / h).round() as usize, (r / h).round() as usize);
                assert!(j < grid.valid[i]);
                let point = apply_l(&field, &f, t, r, &cfg).unwrap();
                let dpoint = dr_rlu(&field, &f, t, r, &cfg).unwrap();
                ((grid.lu[[i, j]] - point).abs() / point.abs(), (grid.dr_rlu[[i, j]] - dpoint).abs() / dpoint.abs())
            })
            .collect()
    }

    #[test]
    fn characteristic_route_converges_to_pointwise_route() {
        let coarse = characteristic_errors(0.25);
        let fine = characteristic_errors(0.125);
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(f.0 < 1e-5 && f.1 < 1e-5, "{fine:?}");
            // Simpson in s is fourth order
            assert!(c.0 / f.0 > 8.0 && c.1 / f.1 > 8.0, "{coarse:?} vs {fine:?}");
        }
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for k in 1..9 {
            let w = simpson_weights(k);
            let total: f64 = w.iter().enumerate().map(|(i, wi)| wi * (i as f64).powi(if k == 1 { 1 } else { 3 })).sum();
            let exact = if k == 1 { 0.5 } else { (k as f64).powi(4) / 4.0 };
            assert_abs_diff_eq!(total, exact, epsilon = 1e-12);
        }
    }
}
