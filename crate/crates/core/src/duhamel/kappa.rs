//! Admissible decay rates `κ` for the weighted-space fixed point.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponents::{strauss_p0, BOUNDARY_TOL};

/// `lower <= κ <= upper` (strict at `lower` when `lower_open`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaRange {
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub empty: bool,
}

impl KappaRange {
    pub fn contains(&self, kappa: f64) -> bool {
        if self.empty {
            return false;
        }
        let above = if self.lower_open {
            kappa > self.lower
        } else {
            kappa >= self.lower - BOUNDARY_TOL
        };
        above && kappa <= self.upper + BOUNDARY_TOL
    }
}

fn p0_5() -> f64 {
    strauss_p0(5.0).map(|v| v.to_f64()).unwrap_or(f64::NAN)
}

/// Range used by the global solver: `[(3-p)/(p-1), 2(p-1)]` for `p < 2`,
/// `(1, 2(p-1)]` for `p >= 2`. Empty for `p <= p0(5)`.
pub fn kappa_range(p: f64) -> Result<KappaRange> {
    if !(p > 1.0) {
        return Err(crate::Error::Domain(format!("kappa range needs p > 1, got {p}")));
    }
    let upper = 2.0 * (p - 1.0);
    if p <= p0_5() + BOUNDARY_TOL {
        return Ok(KappaRange {
            p,
            lower: (3.0 - p) / (p - 1.0),
            upper,
            lower_open: false,
            empty: true,
        });
    }
    Ok(if p < 2.0 {
        KappaRange {
            p,
            lower: (3.0 - p) / (p - 1.0),
            upper,
            lower_open: false,
            empty: false,
        }
    } else {
        KappaRange {
            p,
            lower: 1.0,
            upper,
            lower_open: true,
            empty: false,
        }
    })
}

/// Range of the integral lemma: as [`kappa_range`] for `p <= 2`, and
/// `[1/(p-1), 2(p-1)]` for `p > 2`.
pub fn lemma_kappa_range(p: f64) -> Result<KappaRange> {
    let mut range = kappa_range(p)?;
    if p > 2.0 {
        range.lower = 1.0 / (p - 1.0);
        range.lower_open = false;
    }
    Ok(range)
}
