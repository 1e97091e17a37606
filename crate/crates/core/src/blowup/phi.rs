//! The test weight `φ_1(x) = ∫_{S^{n-1}} e^{x·ω} dω` as a function of `r = |x|`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{break_points, try_integrate_pieces, QuadConfig};

/// `|S^{n-1}|`: 2, 2π, 4π, ...
pub fn sphere_area(n: u32) -> Result<f64> {
    match n {
        0 => Err(Error::Domain("sphere area needs n >= 1".into())),
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        _ => Ok(2.0 * PI / (n - 2) as f64 * sphere_area(n - 2)?),
    }
}

/// `log φ_1(r)`. For `n >= 2` this is
/// `r + log(|S^{n-2}| ∫_0^π e^{r(cos θ - 1)} sin^{n-2} θ dθ)`, so nothing
/// overflows for large `r`; for `n = 1` the sphere is `{±1}` and
/// `φ_1 = 2 cosh r`.
pub fn log_phi1(r: f64, n: u32) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("phi1 needs finite r >= 0, got {r}")));
    }
    match n {
        0 => Err(Error::Domain("phi1 needs n >= 1".into())),
        1 => Ok(r + (1.0 + (-2.0 * r).exp()).ln()),
        _ => {
            let k = (n - 2) as i32;
            // the integrand concentrates in θ ≲ r^{-1/2}
            let width = 1.0 / r.max(1.0).sqrt();
            let breaks: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|m| m * width).collect();
            let points = break_points(0.0, PI, &breaks);
            let cfg = QuadConfig::default().with_abs_tol(0.0).with_rel_tol(1e-13);
            let res = try_integrate_pieces(
                |th: f64| Ok((r * (th.cos() - 1.0)).exp() * th.sin().powi(k)),
                &points,
                &cfg,
            )?;
            Ok(r + (sphere_area(n - 1)? * res.value).ln())
        }
    }
}

pub fn phi1(r: f64, n: u32) -> Result<f64> {
    Ok(log_phi1(r, n)?.exp())
}
