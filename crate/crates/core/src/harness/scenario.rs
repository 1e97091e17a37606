//! Experiment descriptions read from TOML.

use serde::{Deserialize, Serialize};

use crate::blowup::{FdGrid, OdeBlowupInstance, OdeConfig};
use crate::duhamel::{kappa_range, PicardGrid};
use crate::error::{Error, Result};
use crate::radial_linear::{RadialProfile, Shape, Term};
use crate::transforms::{Form, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Linear,
    Picard,
    Fd,
    OdeLemma,
    Verify,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Linear => "linear",
            SolverKind::Picard => "picard",
            SolverKind::Fd => "fd",
            SolverKind::OdeLemma => "ode-lemma",
            SolverKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeName {
    Zero,
    Algebraic,
    Bump,
    Gaussian,
}

/// A single-term radial profile. Its size is either `amplitude` (the
/// coefficient) or, failing that, the scenario's `epsilon` (the weighted
/// size of the profile).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub shape: ShapeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

impl DataSpec {
    fn check(&self, field: &str, problems: &mut Vec<String>) {
        match self.shape {
            ShapeName::Bump => {
                if !self.radius.is_some_and(|r| r > 0.0) {
                    problems.push(format!("{field}.radius must be positive for a bump"));
                }
                if self.power.is_some_and(|p| !(p >= 1.0)) {
                    problems.push(format!("{field}.power must be at least 1"));
                }
            }
            ShapeName::Gaussian => {
                if !self.width.is_some_and(|w| w > 0.0) {
                    problems.push(format!("{field}.width must be positive for a gaussian"));
                }
            }
            ShapeName::Zero | ShapeName::Algebraic => {}
        }
        if self.amplitude.is_some_and(|a| !a.is_finite()) {
            problems.push(format!("{field}.amplitude is not finite"));
        }
    }

    fn compact(&self) -> bool {
        matches!(self.shape, ShapeName::Zero | ShapeName::Bump)
    }

    /// Build the profile; `epsilon` is used when no amplitude is given.
    pub fn profile(&self, kappa: f64, epsilon: Option<f64>) -> Result<RadialProfile> {
        let shape = match self.shape {
            ShapeName::Zero => return RadialProfile::zero(kappa),
            ShapeName::Algebraic => Shape::Algebraic { kappa },
            ShapeName::Bump => Shape::Bump {
                radius: self.radius.unwrap_or(1.0),
                power: self.power.unwrap_or(4.0),
            },
            ShapeName::Gaussian => Shape::Gaussian {
                width: self.width.unwrap_or(1.0),
            },
        };
        let unit = RadialProfile::new(vec![Term { coef: 1.0, shape }], kappa)?;
        match (self.amplitude, epsilon) {
            (Some(a), _) => unit.scaled(a),
            (None, Some(eps)) => unit.scaled(eps / unit.epsilon()),
            (None, None) => Err(Error::Validation(vec!["data needs an amplitude or the scenario an epsilon".into()])),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Time step (and radial step for the characteristic and FD grids).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Largest stored radius; `t_max + pad` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub save_dt: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Picard stopping tolerance, relative to `‖u^lin‖_{X_κ}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Absolute quadrature tolerance of the linear solver per unit `ε`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindows {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<(f64, f64)>,
}

/// Parameters of the blow-up lemma ODE; `p` comes from the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub q: f64,
    pub k1: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub k0: f64,
    #[serde(default)]
    pub t1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fdot0: Option<f64>,
    pub horizon: f64,
    #[serde(default = "default_escape")]
    pub escape: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// When present, run the critical-branch sweep over these `K0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_sweep: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn default_escape() -> f64 {
    1e12
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// `(p, κ)` pairs; the scenario's own pair when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    /// Also run the zone check on the standard 100-point sample set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zones: Option<bool>,
}

pub const DEFAULT_XI: [f64; 4] = [1e1, 1e2, 1e3, 1e4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Set by the command line subcommand when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverKind>,
    #[serde(default = "default_n")]
    pub n: u32,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Equation solved by the finite-difference solver: `damped` (with `mu`
    /// and `m`) or `weighted-wave`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Form>,
    /// Initial velocity (the only datum of the linear and Picard solvers).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSpec>,
    /// Initial displacement for the finite-difference solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_u0: Option<DataSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fit: FitWindows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
}

pub(crate) fn read(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn default_n() -> u32 {
    3
}

fn default_mu() -> f64 {
    2.0
}

pub const DEFAULT_KAPPA: f64 = 1.5;

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Validation(vec![e.message().to_string()]))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&read(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn solver(&self) -> Result<SolverKind> {
        self.solver
            .ok_or_else(|| Error::Validation(vec!["solver: not set".into()]))
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(DEFAULT_KAPPA)
    }

    /// Check everything the chosen solver needs; every problem is listed.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.name.trim().is_empty() {
            problems.push("name: must not be empty".into());
        }
        let Some(solver) = self.solver else {
            problems.push("solver: not set".into());
            return Err(Error::Validation(problems));
        };
        if self.n == 0 {
            problems.push("n: must be at least 1".into());
        }
        for (name, v) in [("mu", self.mu), ("m", self.m)] {
            if !v.is_finite() {
                problems.push(format!("{name}: not finite"));
            }
        }
        let p = self.p;
        if let Some(p) = p {
            if !(p > 1.0) || !p.is_finite() {
                problems.push(format!("p: must exceed 1, got {p}"));
            }
        } else if solver != SolverKind::Linear && !(solver == SolverKind::Verify && self.verify_pairs_given()) {
            problems.push("p: required".into());
        }
        if let Some(k) = self.kappa {
            if !(k > 1.0) || !k.is_finite() {
                problems.push(format!("kappa: must exceed 1, got {k}"));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0) || !eps.is_finite() {
                problems.push(format!("epsilon: must be non-negative, got {eps}"));
            }
        }
        for (name, v) in [
            ("grid.h", self.grid.h),
            ("grid.t_max", self.grid.t_max),
            ("grid.r_max", self.grid.r_max),
            ("grid.cfl", self.grid.cfl),
            ("grid.save_dt", self.grid.save_dt),
            ("tolerances.picard", self.tolerances.picard),
            ("tolerances.quad", self.tolerances.quad),
        ] {
            if v.is_some_and(|v| !(v > 0.0) || !v.is_finite()) {
                problems.push(format!("{name}: must be positive"));
            }
        }
        if self.grid.pad.is_some_and(|v| !(v >= 0.0)) {
            problems.push("grid.pad: must be non-negative".into());
        }
        for (name, w) in [("fit.decay", self.fit.decay), ("fit.growth", self.fit.growth)] {
            if w.is_some_and(|(a, b)| !(b > a) || !(a >= 0.0)) {
                problems.push(format!("{name}: needs 0 <= lo < hi"));
            }
        }
        for (name, d) in [("data", &self.data), ("data_u0", &self.data_u0)] {
            if let Some(d) = d {
                d.check(name, &mut problems);
                if d.amplitude.is_none() && d.shape != ShapeName::Zero && self.epsilon.is_none() {
                    problems.push(format!("{name}: needs an amplitude or the scenario an epsilon"));
                }
            }
        }

        match solver {
            SolverKind::Linear | SolverKind::Picard => {
                if self.n != 3 {
                    problems.push(format!("n: the {} solver is three-dimensional, got {}", solver.as_str(), self.n));
                }
                if self.data.is_none() {
                    problems.push("data: required".into());
                }
                if self.data_u0.is_some() {
                    problems.push(format!("data_u0: the {} solver starts from zero displacement", solver.as_str()));
                }
                if solver == SolverKind::Picard {
                    if self.mu != 2.0 || self.m != 0.0 {
                        problems.push("mu, m: the Picard solver needs mu = 2 and m = 0".into());
                    }
                    if let Some(p) = p.filter(|p| *p > 1.0) {
                        let range = kappa_range(p)?;
                        if range.empty {
                            problems.push(format!("kappa: kappa range empty for p={p}"));
                        } else if !range.contains(self.kappa()) {
                            problems.push(format!(
                                "kappa: {} outside [{}, {}] for p={p}",
                                self.kappa(),
                                range.lower,
                                range.upper
                            ));
                        }
                    }
                }
            }
            SolverKind::Fd => {
                if self.n > 3 {
                    problems.push(format!("n: finite differences support n <= 3, got {}", self.n));
                }
                if self.data.is_none() && self.data_u0.is_none() {
                    problems.push("data: at least one of data and data_u0 is required".into());
                }
                for (name, d) in [("data", &self.data), ("data_u0", &self.data_u0)] {
                    if d.as_ref().is_some_and(|d| !d.compact()) {
                        problems.push(format!("{name}: finite differences need compactly supported data"));
                    }
                }
                if !matches!(self.form, None | Some(Form::Damped) | Some(Form::WeightedWave)) {
                    problems.push("form: finite differences solve the damped or weighted-wave form".into());
                }
                if self.grid.t_max.is_none() {
                    problems.push("grid.t_max: required".into());
                }
            }
            SolverKind::OdeLemma => match &self.ode {
                None => problems.push("ode: required".into()),
                Some(o) => {
                    if !(o.horizon > o.t1) {
                        problems.push("ode.horizon: must exceed ode.t1".into());
                    }
                    if !(o.escape > 0.0) {
                        problems.push("ode.escape: must be positive".into());
                    }
                    if o.eta.is_some_and(|e| !(e > 0.0)) {
                        problems.push("ode.eta: must be positive".into());
                    }
                    if let Some(p) = p.filter(|p| *p > 1.0) {
                        if let Err(Error::Validation(more)) = self.ode_instance(p, o).validate() {
                            problems.extend(more.into_iter().map(|m| format!("ode: {m}")));
                        }
                    }
                    if o.k0_sweep.as_ref().is_some_and(|k| k.is_empty() || k.iter().any(|v| !(*v > 0.0))) {
                        problems.push("ode.k0_sweep: needs positive values".into());
                    }
                }
            },
            SolverKind::Verify => {
                let pairs = self.verify_pairs();
                if pairs.is_empty() {
                    problems.push("verify.pairs: no (p, kappa) pair".into());
                }
                if self
                    .verify
                    .as_ref()
                    .and_then(|v| v.xi.as_ref())
                    .is_some_and(|xi| xi.is_empty() || xi.iter().any(|x| !(*x >= 0.0)))
                {
                    problems.push("verify.xi: needs non-negative values".into());
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    fn ode_instance(&self, p: f64, o: &OdeSpec) -> OdeBlowupInstance {
        OdeBlowupInstance {
            p,
            q: o.q,
            k1: o.k1,
            r: o.r,
            a: o.a,
            k0: o.k0,
            t1: o.t1,
            f0: o.f0,
            fdot0: o.fdot0,
        }
    }

    pub(crate) fn ode_setup(&self) -> Result<(OdeBlowupInstance, OdeConfig, &OdeSpec)> {
        let o = self
            .ode
            .as_ref()
            .ok_or_else(|| Error::Validation(vec!["ode: required".into()]))?;
        let p = self.p.ok_or_else(|| Error::Validation(vec!["p: required".into()]))?;
        let mut cfg = OdeConfig::default();
        if let Some(eta) = o.eta {
            cfg.eta = eta;
        }
        Ok((self.ode_instance(p, o), cfg, o))
    }

    fn verify_pairs_given(&self) -> bool {
        self.verify.as_ref().is_some_and(|v| v.pairs.is_some())
    }

    pub(crate) fn verify_pairs(&self) -> Vec<(f64, f64)> {
        match self.verify.as_ref().and_then(|v| v.pairs.clone()) {
            Some(pairs) => pairs,
            None => self.p.map(|p| vec![(p, self.kappa())]).unwrap_or_default(),
        }
    }

    /// Velocity profile used by the linear and Picard solvers.
    pub(crate) fn velocity(&self) -> Result<RadialProfile> {
        match &self.data {
            Some(d) => d.profile(self.kappa(), self.epsilon),
            None => RadialProfile::zero(self.kappa()),
        }
    }

    pub(crate) fn picard_grid(&self) -> PicardGrid {
        let d = PicardGrid::default();
        PicardGrid {
            h: self.grid.h.unwrap_or(d.h),
            t_max: self.grid.t_max.unwrap_or(d.t_max),
            pad: self.grid.pad.unwrap_or(d.pad),
        }
    }

    pub(crate) fn fd_grid(&self) -> FdGrid {
        let d = FdGrid::default();
        FdGrid {
            h: self.grid.h.unwrap_or(d.h),
            cfl: self.grid.cfl.unwrap_or(d.cfl),
            save_dt: self.grid.save_dt.unwrap_or(d.save_dt),
            r_out: self.grid.r_max,
        }
    }

    /// Problem descriptor for the finite-difference solver.
    pub(crate) fn fd_spec(&self) -> Result<ProblemSpec> {
        let p = self.p.ok_or_else(|| Error::Validation(vec!["p: required".into()]))?;
        let spec = match self.form.unwrap_or(Form::Damped) {
            Form::WeightedWave => ProblemSpec::weighted_wave(self.n, p)?,
            _ => ProblemSpec::damped(self.n, self.mu, self.m, p)?,
        };
        let kappa = self.kappa();
        let profile = |d: &Option<DataSpec>| match d {
            Some(d) => d.profile(kappa, self.epsilon),
            None => RadialProfile::zero(kappa),
        };
        Ok(spec.with_data(profile(&self.data_u0)?, profile(&self.data)?))
    }
}
