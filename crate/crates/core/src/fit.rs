//! Ordinary least squares on log-log samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    pub samples: usize,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Numerical("fit: length mismatch".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Numerical(format!("fit needs at least two samples, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Numerical("fit: abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    if !slope.is_finite() {
        return Err(Error::Numerical("fit produced a non-finite slope".into()));
    }
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        samples: n,
    })
}

/// Fit `log|y|` against `log x` over samples with `x` in `[lo, hi]`.
/// Samples with `y == 0` are skipped.
pub fn fit_power_law(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Result<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x >= lo && **x <= hi && **x > 0.0 && **y != 0.0)
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .unzip();
    fit_line(&lx, &ly)
}
