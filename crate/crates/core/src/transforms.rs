//! Changes of variables between damped, weighted and variable-speed forms of
//! the semilinear wave equation. Transforms act on problem descriptors and
//! initial data; they never solve anything.
//!
//! Every form is an instance of
//!
//! `u_tt - a(t)^2 Δu + (damping/<t>) u_t + (mass/<t>^2) u = c w(t) |u|^p`
//!
//! where `a(t) = <t>^ℓ` (or `e^{ℓt}`) and `w(t) = <t>^{weight}` (or `e^{weight t}`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial_linear::profile::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// `v_tt - Δv + μ/<t> v_t + m/(4<t>^2) v = <t>^w |v|^p`.
    Damped,
    /// `u_tt - Δu + mass/<t>^2 u = <t>^w |u|^p`.
    WeightedWave,
    /// `u_tt - <t>^{2ℓ} Δu = c <t>^w |u|^p`.
    VariableSpeedWave,
    /// `u_tt - e^{2t} Δu = e^{w t} |u|^p`.
    ExponentialSpeedWave,
}

/// Initial data `(u(t0), u_t(t0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub u0: RadialProfile,
    pub u1: RadialProfile,
}

/// One Cauchy problem. Which fields matter depends on `form`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: u32,
    pub mu: f64,
    pub m: f64,
    pub p: f64,
    pub form: Form,
    /// Power of `<t>` (rate of `e^t` for the exponential form) multiplying `|u|^p`.
    pub weight_exponent: f64,
    /// Power of `<t>` in the propagation speed (rate of `e^t` for the exponential form).
    pub speed_exponent: f64,
    /// Coefficient of `<t>^{-2} u`.
    pub mass_coefficient: f64,
    pub initial_time: f64,
    pub nonlinearity_constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<InitialData>,
}

impl ProblemSpec {
    /// `v_tt - Δv + μ/<t> v_t + m/(4<t>^2) v = |v|^p` started at `t = 0`.
    pub fn damped(n: u32, mu: f64, m: f64, p: f64) -> Result<Self> {
        let spec = Self {
            n,
            mu,
            m,
            p,
            form: Form::Damped,
            weight_exponent: 0.0,
            speed_exponent: 0.0,
            mass_coefficient: m / 4.0,
            initial_time: 0.0,
            nonlinearity_constant: 1.0,
            data: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `u_tt - Δu = <t>^{-(p-1)} |u|^p`, the equation met by `u = <t> v` when
    /// `v` solves the damped problem with `μ = 2`.
    pub fn weighted_wave(n: u32, p: f64) -> Result<Self> {
        let mut spec = Self::damped(n, 0.0, 0.0, p)?;
        spec.form = Form::WeightedWave;
        spec.weight_exponent = -(p - 1.0);
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_data(mut self, u0: RadialProfile, u1: RadialProfile) -> Self {
        self.data = Some(InitialData { u0, u1 });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n == 0 {
            problems.push("n must be at least 1".to_string());
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            problems.push(format!("p must exceed 1, got {}", self.p));
        }
        for (name, v) in [
            ("mu", self.mu),
            ("m", self.m),
            ("weight_exponent", self.weight_exponent),
            ("speed_exponent", self.speed_exponent),
            ("mass_coefficient", self.mass_coefficient),
            ("initial_time", self.initial_time),
            ("nonlinearity_constant", self.nonlinearity_constant),
        ] {
            if !v.is_finite() {
                problems.push(format!("{name} is not finite"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Normalized coefficients of the equation, independent of the label `form`.
    pub fn equation_coefficients(&self) -> EquationCoefficients {
        let damping = match self.form {
            Form::Damped => self.mu,
            _ => 0.0,
        };
        EquationCoefficients {
            exponential_time: self.form == Form::ExponentialSpeedWave,
            damping,
            mass: self.mass_coefficient,
            speed_exponent: self.speed_exponent,
            weight_exponent: self.weight_exponent,
            nonlinearity_constant: self.nonlinearity_constant,
            initial_time: self.initial_time,
        }
    }

    /// Solvers integrate forward from `t = 0` with damping `μ/<t>`; a
    /// negative or non-zero start time is refused rather than shifted.
    pub fn require_solvable(&self) -> Result<()> {
        match self.form {
            Form::Damped | Form::WeightedWave => {}
            other => {
                return Err(Error::Config(format!("no solver for the {other:?} form")));
            }
        }
        if self.initial_time < 0.0 {
            return Err(Error::Config(format!(
                "initial time {} is negative; solvers do not shift time",
                self.initial_time
            )));
        }
        if self.initial_time != 0.0 {
            return Err(Error::Config("solvers start at t = 0".into()));
        }
        Ok(())
    }
}

/// Coefficients of `u_tt - a^2 Δu + damping/<t> u_t + mass/<t>^2 u = c w |u|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationCoefficients {
    pub exponential_time: bool,
    pub damping: f64,
    pub mass: f64,
    pub speed_exponent: f64,
    pub weight_exponent: f64,
    pub nonlinearity_constant: f64,
    pub initial_time: f64,
}

impl EquationCoefficients {
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        self.exponential_time == other.exponential_time
            && close(self.damping, other.damping)
            && close(self.mass, other.mass)
            && close(self.speed_exponent, other.speed_exponent)
            && close(self.weight_exponent, other.weight_exponent)
            && close(self.nonlinearity_constant, other.nonlinearity_constant)
            && close(self.initial_time, other.initial_time)
    }
}

/// Relation between the old time `t` and the new time `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeMap {
    Identity,
    /// `t = Λ(τ) - 1`, `Λ(τ) = <τ>^{ℓ+1}/(ℓ+1)`.
    Polynomial { ell: f64 },
    /// `τ = Λ(t) - 1`, inverse of `Polynomial`.
    InversePolynomial { ell: f64 },
    /// `t = e^τ - 1`.
    Exponential,
    /// `τ = log(1 + t)`, inverse of `Exponential`.
    Logarithmic,
}

impl TimeMap {
    /// Old time corresponding to new time `tau`.
    pub fn old_time(&self, tau: f64) -> f64 {
        match *self {
            TimeMap::Identity => tau,
            TimeMap::Polynomial { ell } => lambda(ell, tau) - 1.0,
            TimeMap::InversePolynomial { ell } => lambda_inv(ell, tau + 1.0),
            TimeMap::Exponential => tau.exp() - 1.0,
            TimeMap::Logarithmic => (1.0 + tau).ln(),
        }
    }

    /// New time corresponding to old time `t`.
    pub fn new_time(&self, t: f64) -> f64 {
        self.inverse().old_time(t)
    }

    pub fn inverse(&self) -> TimeMap {
        match *self {
            TimeMap::Identity => TimeMap::Identity,
            TimeMap::Polynomial { ell } => TimeMap::InversePolynomial { ell },
            TimeMap::InversePolynomial { ell } => TimeMap::Polynomial { ell },
            TimeMap::Exponential => TimeMap::Logarithmic,
            TimeMap::Logarithmic => TimeMap::Exponential,
        }
    }
}

/// `Λ(τ) = <τ>^{ℓ+1}/(ℓ+1)`.
pub fn lambda(ell: f64, tau: f64) -> f64 {
    (1.0 + tau).powf(ell + 1.0) / (ell + 1.0)
}

/// `τ` with `Λ(τ) = x`.
fn lambda_inv(ell: f64, x: f64) -> f64 {
    ((ell + 1.0) * x).powf(1.0 / (ell + 1.0)) - 1.0
}

/// `(u0, u1) = (a v0 + b v1, c v0 + d v1)`, together with the time map and
/// the amplitude factor: the new unknown at new time `τ` is
/// `<t>^{amplitude_exponent} v(t)` with `t = old_time(τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub time_reparameterization: TimeMap,
    pub amplitude_exponent: f64,
}

impl DataMap {
    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
            time_reparameterization: TimeMap::Identity,
            amplitude_exponent: 0.0,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        (self.a - 1.0).abs() <= tol
            && self.b.abs() <= tol
            && self.c.abs() <= tol
            && (self.d - 1.0).abs() <= tol
            && self.time_reparameterization == TimeMap::Identity
            && self.amplitude_exponent.abs() <= tol
    }

    pub fn apply(&self, v0: f64, v1: f64) -> (f64, f64) {
        (self.a * v0 + self.b * v1, self.c * v0 + self.d * v1)
    }

    pub fn apply_profiles(&self, data: &InitialData) -> Result<InitialData> {
        Ok(InitialData {
            u0: RadialProfile::combine(self.a, &data.u0, self.b, &data.u1)?,
            u1: RadialProfile::combine(self.c, &data.u0, self.d, &data.u1)?,
        })
    }

    pub fn inverse(&self) -> Result<DataMap> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numerical("data map is singular".into()));
        }
        Ok(DataMap {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
            time_reparameterization: self.time_reparameterization.inverse(),
            amplitude_exponent: -self.amplitude_exponent,
        })
    }

    /// `self ∘ first`: apply `first`, then `self`. Only data maps whose
    /// amplitude and time factors do not interact can be composed.
    pub fn after(&self, first: &DataMap) -> Result<DataMap> {
        let time = match (first.time_reparameterization, self.time_reparameterization) {
            (TimeMap::Identity, t) | (t, TimeMap::Identity) => t,
            (x, y) if x == y.inverse() => TimeMap::Identity,
            _ => {
                return Err(Error::Config("cannot compose two non-trivial time reparameterizations".into()));
            }
        };
        if self.time_reparameterization != TimeMap::Identity && first.amplitude_exponent != 0.0 {
            return Err(Error::Config("amplitude factor does not commute with the time change".into()));
        }
        Ok(DataMap {
            a: self.a * first.a + self.b * first.c,
            b: self.a * first.b + self.b * first.d,
            c: self.c * first.a + self.d * first.c,
            d: self.c * first.b + self.d * first.d,
            time_reparameterization: time,
            amplitude_exponent: self.amplitude_exponent + first.amplitude_exponent,
        })
    }
}

fn finish(mut spec: ProblemSpec, map: DataMap) -> Result<(ProblemSpec, DataMap)> {
    if let Some(data) = &spec.data {
        spec.data = Some(map.apply_profiles(data)?);
    }
    spec.validate()?;
    Ok((spec, map))
}

fn require_damped(spec: &ProblemSpec, what: &str) -> Result<()> {
    spec.validate()?;
    if spec.form != Form::Damped {
        return Err(Error::Domain(format!("{what} needs the damped form, got {:?}", spec.form)));
    }
    Ok(())
}

/// `v♯ = <t>^{μ-1} v`: damping `μ` becomes `μ♯ = 2 - μ`, the nonlinearity
/// picks up `<t>^{(μ♯-1)(p-1)}` and `v♯_t(0) = v1 + (μ-1) v0`. An involution.
pub fn dissipation_shift(spec: &ProblemSpec) -> Result<(ProblemSpec, DataMap)> {
    require_damped(spec, "dissipation shift")?;
    if spec.m != 0.0 {
        return Err(Error::Domain("dissipation shift needs m = 0".into()));
    }
    let mu_sharp = 2.0 - spec.mu;
    let mut out = spec.clone();
    out.mu = mu_sharp;
    out.weight_exponent = spec.weight_exponent + (mu_sharp - 1.0) * (spec.p - 1.0);
    let map = DataMap {
        a: 1.0,
        b: 0.0,
        c: spec.mu - 1.0,
        d: 1.0,
        time_reparameterization: TimeMap::Identity,
        amplitude_exponent: spec.mu - 1.0,
    };
    finish(out, map)
}

/// `ṽ(τ) = v(Λ(τ) - 1)` with `ℓ = μ/(1-μ)`: turns damping `μ < 1` into the
/// propagation speed `<τ>^ℓ`, started at `t̄ = (1-μ)^{-(1-μ)} - 1`.
pub fn time_reparam_sub1(spec: &ProblemSpec) -> Result<(ProblemSpec, DataMap)> {
    require_damped(spec, "polynomial time change")?;
    if !(spec.mu < 1.0) {
        return Err(Error::Domain(format!("polynomial time change needs mu < 1, got {}", spec.mu)));
    }
    if spec.m != 0.0 || spec.initial_time != 0.0 {
        return Err(Error::Domain("polynomial time change needs m = 0 and initial time 0".into()));
    }
    let mu = spec.mu;
    let ell = mu / (1.0 - mu);
    let w = spec.weight_exponent;
    let mut out = spec.clone();
    out.form = Form::VariableSpeedWave;
    out.speed_exponent = ell;
    // Λ'(τ)^2 <t>^w = <τ>^{2ℓ} (<τ>^{ℓ+1}/(ℓ+1))^w
    out.weight_exponent = 2.0 * ell + (ell + 1.0) * w;
    out.nonlinearity_constant = spec.nonlinearity_constant * (1.0 - mu).powf(w);
    out.initial_time = (1.0 - mu).powf(-(1.0 - mu)) - 1.0;
    let map = DataMap {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: (1.0 - mu).powf(-mu),
        time_reparameterization: TimeMap::Polynomial { ell },
        amplitude_exponent: 0.0,
    };
    finish(out, map)
}

/// Damping `μ > 1`: the dissipation shift to `μ♯ = 2 - μ < 1` followed by the
/// polynomial time change with `ℓ♯ = (2-μ)/(μ-1)`.
pub fn time_reparam_super1(spec: &ProblemSpec) -> Result<(ProblemSpec, DataMap)> {
    require_damped(spec, "shifted polynomial time change")?;
    if !(spec.mu > 1.0) {
        return Err(Error::Domain(format!(
            "shifted polynomial time change needs mu > 1, got {}",
            spec.mu
        )));
    }
    let (sharp, shift) = dissipation_shift(spec)?;
    let (out, reparam) = time_reparam_sub1(&sharp)?;
    // the amplitude factor <t>^{μ-1} is expressed in the old time, so the
    // composite keeps it alongside the time change
    let map = DataMap {
        a: reparam.a * shift.a + reparam.b * shift.c,
        b: reparam.a * shift.b + reparam.b * shift.d,
        c: reparam.c * shift.a + reparam.d * shift.c,
        d: reparam.c * shift.b + reparam.d * shift.d,
        time_reparameterization: reparam.time_reparameterization,
        amplitude_exponent: shift.amplitude_exponent,
    };
    Ok((out, map))
}

/// `Λ(τ) = e^τ` for `μ = 1`: propagation speed `e^τ`, nonlinearity `e^{2τ}`.
pub fn exponential_reparam(spec: &ProblemSpec) -> Result<(ProblemSpec, DataMap)> {
    require_damped(spec, "exponential time change")?;
    if spec.mu != 1.0 {
        return Err(Error::Domain(format!("exponential time change needs mu = 1, got {}", spec.mu)));
    }
    if spec.m != 0.0 || spec.initial_time != 0.0 {
        return Err(Error::Domain("exponential time change needs m = 0 and initial time 0".into()));
    }
    let mut out = spec.clone();
    out.form = Form::ExponentialSpeedWave;
    out.speed_exponent = 1.0;
    out.weight_exponent = 2.0 + spec.weight_exponent;
    out.initial_time = 0.0;
    let map = DataMap {
        time_reparameterization: TimeMap::Exponential,
        ..DataMap::identity()
    };
    finish(out, map)
}

/// `u = <t>^{μ/2} v` for `v_tt - Δv + μ/<t> v_t + m/(4<t>^2) v = <t>^w |v|^p`:
/// no damping, mass `(μ(2-μ) + m)/4`, nonlinearity `<t>^{w - (μ/2)(p-1)}`.
pub fn mass_shift(spec: &ProblemSpec) -> Result<(ProblemSpec, DataMap)> {
    require_damped(spec, "mass shift")?;
    let mu = spec.mu;
    let mut out = spec.clone();
    out.form = Form::WeightedWave;
    out.mass_coefficient = (mu * (2.0 - mu) + spec.m) / 4.0;
    out.weight_exponent = spec.weight_exponent - 0.5 * mu * (spec.p - 1.0);
    let map = DataMap {
        a: 1.0,
        b: 0.0,
        c: 0.5 * mu,
        d: 1.0,
        time_reparameterization: TimeMap::Identity,
        amplitude_exponent: 0.5 * mu,
    };
    finish(out, map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    DissipationShift,
    TimeReparamSub1,
    TimeReparamSuper1,
    ExponentialReparam,
    MassShift,
}

pub fn apply_transform(kind: TransformKind, spec: &ProblemSpec) -> Result<(ProblemSpec, DataMap)> {
    match kind {
        TransformKind::DissipationShift => dissipation_shift(spec),
        TransformKind::TimeReparamSub1 => time_reparam_sub1(spec),
        TransformKind::TimeReparamSuper1 => time_reparam_super1(spec),
        TransformKind::ExponentialReparam => exponential_reparam(spec),
        TransformKind::MassShift => mass_shift(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Spatially constant solutions satisfy the ODE obtained by dropping Δ.
    /// Classical RK4 with a fixed step on `[t0, t1]`.
    fn ode_solve(spec: &ProblemSpec, t0: f64, t1: f64, y0: f64, y1: f64, steps: usize) -> f64 {
        let c = spec.equation_coefficients();
        let rhs = |t: f64, y: f64, yp: f64| {
            let (w, jt) = if c.exponential_time {
                ((c.weight_exponent * t).exp(), 1.0)
            } else {
                ((1.0 + t).powf(c.weight_exponent), 1.0 + t)
            };
            let damp = if c.exponential_time { 0.0 } else { c.damping / jt };
            let mass = if c.exponential_time { 0.0 } else { c.mass / (jt * jt) };
            c.nonlinearity_constant * w * y.abs().powf(spec.p) - damp * yp - mass * y
        };
        let h = (t1 - t0) / steps as f64;
        let (mut t, mut y, mut v) = (t0, y0, y1);
        for _ in 0..steps {
            let k1 = (v, rhs(t, y, v));
            let k2 = (v + 0.5 * h * k1.1, rhs(t + 0.5 * h, y + 0.5 * h * k1.0, v + 0.5 * h * k1.1));
            let k3 = (v + 0.5 * h * k2.1, rhs(t + 0.5 * h, y + 0.5 * h * k2.0, v + 0.5 * h * k2.1));
            let k4 = (v + h * k3.1, rhs(t + h, y + h * k3.0, v + h * k3.1));
            y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            t += h;
        }
        y
    }

    /// Solve the original ODE to old time `t_end`, the transformed one to the
    /// matching new time, and compare through the amplitude factor.
    fn check_ode_equivalence(spec: &ProblemSpec, out: &ProblemSpec, map: &DataMap, t_end: f64) {
        let (v0, v1) = (0.3, 0.2);
        let old = ode_solve(spec, 0.0, t_end, v0, v1, 20_000);
        let (u0, u1) = map.apply(v0, v1);
        let tau_end = map.time_reparameterization.new_time(t_end);
        let new = ode_solve(out, out.initial_time, tau_end, u0, u1, 20_000);
        let expected = (1.0 + t_end).powf(map.amplitude_exponent) * old;
        assert!(
            (new - expected).abs() <= 1e-8 * expected.abs().max(1.0),
            "transformed {new} vs mapped original {expected}"
        );
    }

    #[test]
    fn dissipation_shift_examples() {
        let spec = ProblemSpec::damped(3, 2.0, 0.0, 1.9).unwrap();
        let (out, map) = dissipation_shift(&spec).unwrap();
        assert_eq!(out.mu, 0.0);
        assert_abs_diff_eq!(out.weight_exponent, -0.9, epsilon = 1e-15);
        assert_eq!(map.apply(2.0, 5.0), (2.0, 7.0));
        let (one, map1) = dissipation_shift(&ProblemSpec::damped(3, 1.0, 0.0, 2.0).unwrap()).unwrap();
        assert_eq!(one.mu, 1.0);
        assert_eq!(one.weight_exponent, 0.0);
        assert!(map1.is_identity(0.0));
        check_ode_equivalence(&spec, &out, &map, 3.0);
        check_ode_equivalence(
            &ProblemSpec::damped(2, 0.6, 0.0, 2.5).unwrap(),
            &dissipation_shift(&ProblemSpec::damped(2, 0.6, 0.0, 2.5).unwrap()).unwrap().0,
            &dissipation_shift(&ProblemSpec::damped(2, 0.6, 0.0, 2.5).unwrap()).unwrap().1,
            3.0,
        );
    }

    #[test]
    fn sub1_examples() {
        let (s0, m0) = time_reparam_sub1(&ProblemSpec::damped(3, 0.0, 0.0, 2.0).unwrap()).unwrap();
        assert_eq!(s0.speed_exponent, 0.0);
        assert_eq!(s0.initial_time, 0.0);
        assert_eq!((m0.a, m0.b, m0.c, m0.d), (1.0, 0.0, 0.0, 1.0));

        let spec = ProblemSpec::damped(3, 0.5, 0.0, 2.0).unwrap();
        let (s, map) = time_reparam_sub1(&spec).unwrap();
        assert_abs_diff_eq!(s.speed_exponent, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.initial_time, 2f64.sqrt() - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.weight_exponent, 2.0, epsilon = 1e-15);
        check_ode_equivalence(&spec, &s, &map, 2.0);

        let (neg, _) = time_reparam_sub1(&ProblemSpec::damped(3, -1.0, 0.0, 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(neg.speed_exponent, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(neg.initial_time, -0.75, epsilon = 1e-15);
        assert!(neg.require_solvable().is_err());
        assert!(time_reparam_sub1(&ProblemSpec::damped(3, 1.0, 0.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn super1_examples() {
        let spec2 = ProblemSpec::damped(3, 2.0, 0.0, 1.7).unwrap();
        let (s2, m2) = time_reparam_super1(&spec2).unwrap();
        assert_eq!(s2.speed_exponent, 0.0);
        assert_eq!(s2.initial_time, 0.0);
        assert_eq!(s2.nonlinearity_constant, 1.0);
        let (d2, dm2) = dissipation_shift(&spec2).unwrap();
        assert!(s2.equation_coefficients().approx_eq(&d2.equation_coefficients(), 1e-15));
        assert_eq!((m2.a, m2.b, m2.c, m2.d), (dm2.a, dm2.b, dm2.c, dm2.d));

        let spec3 = ProblemSpec::damped(3, 3.0, 0.0, 2.0).unwrap();
        let (s3, m3) = time_reparam_super1(&spec3).unwrap();
        assert_abs_diff_eq!(s3.speed_exponent, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s3.initial_time, -0.75, epsilon = 1e-15);
        // (μ-1)^{-(μ-1)(p-1)}: the spatially constant solution confirms the sign
        assert_abs_diff_eq!(s3.nonlinearity_constant, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s3.weight_exponent, 2.0 * -0.5 - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m3.d, 2f64.powf(1.0), epsilon = 1e-15);

        let spec15 = ProblemSpec::damped(3, 1.5, 0.0, 2.0).unwrap();
        let (s15, m15) = time_reparam_super1(&spec15).unwrap();
        assert_abs_diff_eq!(s15.nonlinearity_constant, 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(m15.d, 0.5f64.powf(-0.5), epsilon = 1e-14);
        assert_abs_diff_eq!(m15.c, 0.5f64.powf(-0.5) * 0.5, epsilon = 1e-14);
        check_ode_equivalence(&spec15, &s15, &m15, 2.0);
        assert!(time_reparam_super1(&ProblemSpec::damped(3, 1.0, 0.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn exponential_examples() {
        let spec = ProblemSpec::damped(2, 1.0, 0.0, 2.0).unwrap();
        let (s, map) = exponential_reparam(&spec).unwrap();
        assert_eq!(s.form, Form::ExponentialSpeedWave);
        assert_eq!((map.a, map.b, map.c, map.d), (1.0, 0.0, 0.0, 1.0));
        for t in [0.0, 0.5, 3.0, 10.0] {
            let tau = map.time_reparameterization.new_time(t);
            assert_abs_diff_eq!(tau, (1.0 + t).ln(), epsilon = 1e-15);
            assert_abs_diff_eq!(map.time_reparameterization.old_time(tau), t, epsilon = 1e-12);
        }
        check_ode_equivalence(&spec, &s, &map, 2.0);
        assert!(exponential_reparam(&ProblemSpec::damped(2, 0.9, 0.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn mass_shift_examples() {
        let spec = ProblemSpec::damped(3, 1.5, (1.5 - 2.0) * 1.5, 2.0).unwrap();
        let (s, map) = mass_shift(&spec).unwrap();
        assert_abs_diff_eq!(s.mass_coefficient, 0.0, epsilon = 1e-15);
        check_ode_equivalence(&spec, &s, &map, 3.0);
        let (id, idm) = mass_shift(&ProblemSpec::damped(3, 0.0, 0.0, 2.0).unwrap()).unwrap();
        assert!(idm.is_identity(0.0));
        assert_eq!(id.equation_coefficients(), ProblemSpec::damped(3, 0.0, 0.0, 2.0).unwrap().equation_coefficients());
        let generic = ProblemSpec::damped(2, 0.7, 1.3, 2.2).unwrap();
        let (gs, gm) = mass_shift(&generic).unwrap();
        check_ode_equivalence(&generic, &gs, &gm, 3.0);
    }

    #[test]
    fn mass_shift_agrees_with_dissipation_shift_at_two() {
        let spec = ProblemSpec::damped(3, 2.0, 0.0, 1.9).unwrap();
        let (a, am) = mass_shift(&spec).unwrap();
        let (b, bm) = dissipation_shift(&spec).unwrap();
        assert!(a.equation_coefficients().approx_eq(&b.equation_coefficients(), 1e-15));
        assert_eq!(am, bm);
    }

    #[test]
    fn profiles_follow_the_data_map() {
        let v0 = RadialProfile::bump(1.0, 2.0, 3.0, 1.5).unwrap();
        let v1 = RadialProfile::gaussian(0.5, 1.0, 1.5).unwrap();
        let spec = ProblemSpec::damped(3, 2.0, 0.0, 1.9).unwrap().with_data(v0.clone(), v1.clone());
        let (out, _) = dissipation_shift(&spec).unwrap();
        let data = out.data.unwrap();
        for r in [0.0, 0.7, 1.9, 3.0] {
            assert_abs_diff_eq!(data.u0.g(r), v0.g(r), epsilon = 1e-15);
            assert_abs_diff_eq!(data.u1.g(r), v0.g(r) + v1.g(r), epsilon = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn dissipation_shift_is_involution(mu in -3.0f64..5.0, p in 1.01f64..5.0, n in 1u32..5) {
            let spec = ProblemSpec::damped(n, mu, 0.0, p).unwrap();
            let (once, m1) = dissipation_shift(&spec).unwrap();
            let (twice, m2) = dissipation_shift(&once).unwrap();
            prop_assert!((twice.mu - spec.mu).abs() < 1e-12);
            prop_assert!(twice.weight_exponent.abs() < 1e-12);
            let composite = m2.after(&m1).unwrap();
            prop_assert!(composite.is_identity(1e-12));
        }

        #[test]
        fn data_maps_invert(mu in 0.01f64..0.99, v0 in -3.0f64..3.0, v1 in -3.0f64..3.0) {
            let spec = ProblemSpec::damped(3, mu, 0.0, 2.0).unwrap();
            for map in [
                time_reparam_sub1(&spec).unwrap().1,
                time_reparam_super1(&ProblemSpec::damped(3, 1.0 + mu * 3.0, 0.0, 2.0).unwrap()).unwrap().1,
                mass_shift(&spec).unwrap().1,
            ] {
                prop_assert!(map.determinant() != 0.0);
                let inv = map.inverse().unwrap();
                let (a, b) = map.apply(v0, v1);
                let (x, y) = inv.apply(a, b);
                prop_assert!((x - v0).abs() < 1e-12 && (y - v1).abs() < 1e-12);
            }
        }

        #[test]
        fn speed_exponent_and_start_time(mu in -5.0f64..0.999) {
            let (s, _) = time_reparam_sub1(&ProblemSpec::damped(3, mu, 0.0, 2.0).unwrap()).unwrap();
            prop_assert_eq!(s.speed_exponent > 0.0, mu > 0.0 && mu < 1.0);
            if mu > 0.0 {
                prop_assert!(s.initial_time > 0.0 && s.initial_time <= (1f64 / std::f64::consts::E).exp() - 1.0 + 1e-15);
            }
            if mu < 0.0 {
                prop_assert!(s.speed_exponent > -1.0 && s.speed_exponent < 0.0);
                prop_assert!(s.initial_time > -1.0 && s.initial_time < 0.0);
            }
        }
    }
}
