//! The weighted sup norm of `X_κ`:
//! `sup <t+|r|> <t-|r|>^{κ-1} |u| + sup <r>^{-1} <t+|r|> <t-|r|>^{κ-1} |∂_r(ru)|`.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::field::SpaceTimeField;
use super::profile::jap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormReport {
    pub kappa: f64,
    pub norm_u: f64,
    pub norm_dru: f64,
    pub total: f64,
    /// `(t, r)` where the `u` part attains its grid supremum.
    pub argmax_u: (f64, f64),
    pub argmax_dru: (f64, f64),
}

/// Decay weight `<t+|r|> <t-|r|>^{κ-1}`.
#[inline]
pub fn xkappa_weight(t: f64, r: f64, kappa: f64) -> f64 {
    let r = r.abs();
    jap(t + r) * jap(t - r).powf(kappa - 1.0)
}

pub fn xkappa_norm(field: &SpaceTimeField, kappa: f64) -> Result<WeightedNormReport> {
    xkappa_norm_arrays(field.t(), field.r(), field.u().view(), field.dr_ru().view(), kappa)
}

pub(crate) fn xkappa_norm_arrays(
    t: &[f64],
    r: &[f64],
    u: ArrayView2<f64>,
    dr_ru: ArrayView2<f64>,
    kappa: f64,
) -> Result<WeightedNormReport> {
    if !(kappa > 1.0) {
        return Err(Error::Domain(format!("X_kappa needs kappa > 1, got {kappa}")));
    }
    let mut report = WeightedNormReport {
        kappa,
        norm_u: 0.0,
        norm_dru: 0.0,
        total: 0.0,
        argmax_u: (t[0], r[0]),
        argmax_dru: (t[0], r[0]),
    };
    // row-major scan with strict comparisons keeps the argmax deterministic
    for (i, &tt) in t.iter().enumerate() {
        for (j, &rr) in r.iter().enumerate() {
            let w = xkappa_weight(tt, rr, kappa);
            let a = w * u[[i, j]].abs();
            if a > report.norm_u {
                report.norm_u = a;
                report.argmax_u = (tt, rr);
            }
            let b = w / jap(rr) * dr_ru[[i, j]].abs();
            if b > report.norm_dru {
                report.norm_dru = b;
                report.argmax_dru = (tt, rr);
            }
        }
    }
    report.total = report.norm_u + report.norm_dru;
    Ok(report)
}
