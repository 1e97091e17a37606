//! Time series of the functionals and the verdict drawn from them.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fit::{fit_power_law, LineFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// `step_halving_change` is the relative change of the blow-up time
    /// between the two resolutions. For the finite-difference solver the
    /// verdict is a candidate only: the overflow guard fired at both
    /// resolutions.
    BlewUp { t_star: f64, step_halving_change: f64 },
    BoundedThroughHorizon { horizon: f64 },
    Inconclusive { reason: String },
}

/// Power-law fit of `F` against `<t>` over `window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub window: (f64, f64),
    pub fit: LineFit,
}

impl GrowthFit {
    pub fn exponent(&self) -> f64 {
        self.fit.slope
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupDiagnostics {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    /// Empty when `F_1` is not defined (the ODE engine).
    pub f1: Vec<f64>,
    pub growth: Option<GrowthFit>,
    pub verdict: Verdict,
}

impl BlowupDiagnostics {
    pub fn new(t: Vec<f64>, f: Vec<f64>, f1: Vec<f64>, verdict: Verdict) -> Self {
        Self {
            t,
            f,
            f1,
            growth: None,
            verdict,
        }
    }

    pub fn estimated_tstar(&self) -> Option<f64> {
        match self.verdict {
            Verdict::BlewUp { t_star, .. } => Some(t_star),
            _ => None,
        }
    }

    /// Fit `log F` against `log<t>` for `t ∈ window` and store it.
    pub fn fit_growth(&mut self, window: (f64, f64)) -> Result<GrowthFit> {
        let fit = growth_exponent(&self.t, &self.f, window)?;
        self.growth = Some(fit);
        Ok(fit)
    }

    /// CSV with columns `t,F,F1,bound_rhs`; `F1` and `bound_rhs` are left
    /// empty where they are not available.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, bound_rhs: Option<&[f64]>) -> Result<()> {
        writeln!(w, "t,F,F1,bound_rhs")?;
        for (k, (t, f)) in self.t.iter().zip(&self.f).enumerate() {
            let f1 = self.f1.get(k).map(|v| format!("{v:e}")).unwrap_or_default();
            let b = bound_rhs.and_then(|b| b.get(k)).map(|v| format!("{v:e}")).unwrap_or_default();
            writeln!(w, "{t:e},{f:e},{f1},{b}")?;
        }
        Ok(())
    }
}

/// Least-squares slope of `log F` against `log<t>` on `window`.
pub fn growth_exponent(t: &[f64], f: &[f64], window: (f64, f64)) -> Result<GrowthFit> {
    let jt: Vec<f64> = t.iter().map(|t| 1.0 + t).collect();
    let fit = fit_power_law(&jt, f, 1.0 + window.0, 1.0 + window.1)?;
    Ok(GrowthFit { window, fit })
}
