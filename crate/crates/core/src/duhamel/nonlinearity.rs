//! Even power nonlinearities `f(u) = |u|^p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    /// `|u|^p`.
    AbsPower,
    /// `scale · |u|^p`.
    ScaledAbsPower { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub p: f64,
    pub kind: NonlinearityKind,
}

impl Nonlinearity {
    pub fn abs_power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("nonlinearity needs p > 1, got {p}")));
        }
        Ok(Self {
            p,
            kind: NonlinearityKind::AbsPower,
        })
    }

    fn scale(&self) -> f64 {
        match self.kind {
            NonlinearityKind::AbsPower => 1.0,
            NonlinearityKind::ScaledAbsPower { scale } => scale,
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.scale() * u.abs().powf(self.p)
    }

    /// `f'(u) = p |u|^{p-1} sgn(u)`.
    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        self.scale() * self.p * u.abs().powf(self.p - 1.0) * u.signum()
    }

    /// Constant `C` in `|f(u) - f(v)| <= C |u - v| (|u|^{p-1} + |v|^{p-1})`.
    /// By the mean value theorem `C = p |scale|` suffices.
    pub fn lipschitz_constant(&self) -> f64 {
        self.p * self.scale().abs()
    }
}
