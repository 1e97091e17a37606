//! The extremal ODE `F'' = K1 (t+R)^{-q} F^p` behind the blow-up lemma.

use serde::{Deserialize, Serialize};

use super::diagnostics::{BlowupDiagnostics, Verdict};
use crate::error::{Error, Result};

/// One instance of the lemma. When `f0`/`fdot0` are absent the ODE starts on
/// the lower-bound curve: `F(T1) = K0 (T1+R)^a`, `F'(T1) = a K0 (T1+R)^{a-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeBlowupInstance {
    pub p: f64,
    pub q: f64,
    pub k1: f64,
    pub r: f64,
    pub a: f64,
    pub k0: f64,
    #[serde(default)]
    pub t1: f64,
    #[serde(default)]
    pub f0: Option<f64>,
    #[serde(default)]
    pub fdot0: Option<f64>,
}

/// Which branch of the lemma the parameters fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaBranch {
    /// `a >= 1` and `a > (q-2)/(p-1)`.
    Subcritical,
    /// `a = (q-2)/(p-1)` and `q >= p+1`.
    Critical,
    Neither,
}

impl OdeBlowupInstance {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.p > 1.0) {
            problems.push(format!("p must exceed 1, got {}", self.p));
        }
        if !(self.k1 > 0.0) {
            problems.push("K1 must be positive".to_string());
        }
        if !(self.r > 0.0) {
            problems.push("R must be positive".to_string());
        }
        if !(self.k0 > 0.0) {
            problems.push("K0 must be positive".to_string());
        }
        if !(self.t1 >= 0.0) {
            problems.push("T1 must be non-negative".to_string());
        }
        for (name, v) in [("q", Some(self.q)), ("a", Some(self.a)), ("f0", self.f0), ("fdot0", self.fdot0)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    problems.push(format!("{name} is not finite"));
                }
            }
        }
        if let Some(f0) = self.f0 {
            if !(f0 > 0.0) {
                problems.push("F(T1) must be positive".to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn branch(&self) -> LemmaBranch {
        let threshold = (self.q - 2.0) / (self.p - 1.0);
        if self.a >= 1.0 && self.a > threshold + 1e-12 {
            LemmaBranch::Subcritical
        } else if (self.a - threshold).abs() <= 1e-12 && self.q >= self.p + 1.0 - 1e-12 {
            LemmaBranch::Critical
        } else {
            LemmaBranch::Neither
        }
    }

    pub fn initial_state(&self) -> (f64, f64) {
        let base = self.t1 + self.r;
        let f0 = self.f0.unwrap_or(self.k0 * base.powf(self.a));
        let fdot0 = self.fdot0.unwrap_or(self.a * self.k0 * base.powf(self.a - 1.0));
        (f0, fdot0)
    }
}

/// Step control for [`ode_blowup_integrate`]. Steps are
/// `eta · min(t+R, F/|F'|, sqrt(F/F''))`; halving `eta` halves every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub eta: f64,
    /// Keep every `record_every`-th state in the series.
    pub record_every: usize,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            eta: 2e-3,
            record_every: 50,
            max_steps: 50_000_000,
        }
    }
}

enum Run {
    Escaped { t: f64, f: f64, fdot: f64 },
    Horizon,
    Stalled(String),
}

struct Trajectory {
    t: Vec<f64>,
    f: Vec<f64>,
    end: Run,
}

fn rhs(inst: &OdeBlowupInstance, t: f64, f: f64) -> f64 {
    inst.k1 * (t + inst.r).powf(-inst.q) * f.max(0.0).powf(inst.p)
}

fn integrate(inst: &OdeBlowupInstance, horizon: f64, escape: f64, eta: f64, cfg: &OdeConfig) -> Trajectory {
    let (mut f, mut g) = inst.initial_state();
    let mut t = inst.t1;
    let mut out = Trajectory {
        t: vec![t],
        f: vec![f],
        end: Run::Horizon,
    };
    let deriv = |t: f64, f: f64, g: f64| (g, rhs(inst, t, f));
    for step in 1..=cfg.max_steps {
        if f >= escape {
            out.end = Run::Escaped { t, f, fdot: g };
            break;
        }
        if t >= horizon {
            out.end = Run::Horizon;
            break;
        }
        if !(f > 0.0) || !f.is_finite() || !g.is_finite() {
            out.end = Run::Stalled(format!("F left the positive reals at t={t}"));
            break;
        }
        let acc = rhs(inst, t, f);
        let mut scale = t + inst.r;
        if g.abs() > 0.0 {
            scale = scale.min(f / g.abs());
        }
        if acc > 0.0 {
            scale = scale.min((f / acc).sqrt());
        }
        let dt = (eta * scale).min(horizon - t);
        if dt <= 1e-14 * (t + 1.0) {
            out.end = Run::Stalled(format!("step underflow at t={t} without escape"));
            break;
        }
        let (k1f, k1g) = deriv(t, f, g);
        let (k2f, k2g) = deriv(t + 0.5 * dt, f + 0.5 * dt * k1f, g + 0.5 * dt * k1g);
        let (k3f, k3g) = deriv(t + 0.5 * dt, f + 0.5 * dt * k2f, g + 0.5 * dt * k2g);
        let (k4f, k4g) = deriv(t + dt, f + dt * k3f, g + dt * k3g);
        f += dt / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        g += dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        t += dt;
        if step % cfg.record_every == 0 {
            out.t.push(t);
            out.f.push(f);
        }
        if step == cfg.max_steps {
            out.end = Run::Stalled(format!("step budget exhausted at t={t}"));
        }
    }
    if out.t.last() != Some(&t) {
        out.t.push(t);
        out.f.push(f);
    }
    out
}

/// Blow-up time from an escape state: near `T*`, `F ~ C (T*-t)^{-2/(p-1)}`,
/// so `T* - t = 2F / ((p-1)F')`.
fn escape_estimate(p: f64, t: f64, f: f64, fdot: f64) -> f64 {
    t + 2.0 * f / ((p - 1.0) * fdot)
}

/// Integrate with steps `eta` and `eta/2`. `BlewUp` needs both runs to
/// escape; `T*` is the Richardson combination of the two escape estimates
/// (RK4 is fourth order).
pub fn ode_blowup_integrate(
    inst: &OdeBlowupInstance,
    horizon: f64,
    escape_threshold: f64,
    cfg: &OdeConfig,
) -> Result<BlowupDiagnostics> {
    inst.validate()?;
    if !(horizon > inst.t1) {
        return Err(Error::Config(format!("horizon {horizon} must exceed T1 = {}", inst.t1)));
    }
    let (f0, _) = inst.initial_state();
    if !(escape_threshold > f0) {
        return Err(Error::Config(format!(
            "escape threshold {escape_threshold} must exceed F(T1) = {f0}"
        )));
    }
    let coarse = integrate(inst, horizon, escape_threshold, cfg.eta, cfg);
    let fine = integrate(inst, horizon, escape_threshold, 0.5 * cfg.eta, cfg);
    let verdict = match (&coarse.end, &fine.end) {
        (Run::Escaped { t, f, fdot }, Run::Escaped { t: tf, f: ff, fdot: gf }) => {
            let tc = escape_estimate(inst.p, *t, *f, *fdot);
            let t_half = escape_estimate(inst.p, *tf, *ff, *gf);
            let t_star = t_half + (t_half - tc) / 15.0;
            Verdict::BlewUp {
                t_star,
                step_halving_change: (t_half - tc).abs() / t_star.abs(),
            }
        }
        (Run::Horizon, Run::Horizon) => Verdict::BoundedThroughHorizon { horizon },
        (_, Run::Stalled(why)) | (Run::Stalled(why), _) => Verdict::Inconclusive { reason: why.clone() },
        _ => Verdict::Inconclusive {
            reason: "step halving changed the outcome".into(),
        },
    };
    Ok(BlowupDiagnostics::new(fine.t, fine.f, Vec::new(), verdict))
}

/// Run the critical branch (`q = p+1`, `a = 1`, data on the curve
/// `K0 (t+R)`) for each `K0` and report the verdicts.
pub fn critical_k0_sweep(
    base: &OdeBlowupInstance,
    k0s: &[f64],
    horizon: f64,
    escape_threshold: f64,
    cfg: &OdeConfig,
) -> Result<Vec<(f64, Verdict)>> {
    k0s.iter()
        .map(|&k0| {
            let inst = OdeBlowupInstance {
                k0,
                f0: None,
                fdot0: None,
                ..*base
            };
            Ok((k0, ode_blowup_integrate(&inst, horizon, escape_threshold, cfg)?.verdict))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn subcritical() -> OdeBlowupInstance {
        OdeBlowupInstance {
            p: 2.0,
            q: 2.0,
            k1: 1.0,
            r: 1.0,
            a: 1.0,
            k0: 1.0,
            t1: 0.0,
            f0: Some(1.0),
            fdot0: Some(1.0),
        }
    }

    #[test]
    fn branches() {
        assert_eq!(subcritical().branch(), LemmaBranch::Subcritical);
        let crit = OdeBlowupInstance { q: 3.0, ..subcritical() };
        assert_eq!(crit.branch(), LemmaBranch::Critical);
        let neither = OdeBlowupInstance { q: 5.0, ..subcritical() };
        assert_eq!(neither.branch(), LemmaBranch::Neither);
    }

    #[test]
    fn autonomous_case_matches_closed_form() {
        // q = 0, F'' = F^2, F(0) = 1, F'(0) = sqrt(2/3): F = (1 - t/sqrt(6))^{-2}, T* = sqrt(6)
        let inst = OdeBlowupInstance {
            q: 0.0,
            fdot0: Some((2.0f64 / 3.0).sqrt()),
            ..subcritical()
        };
        let diag = ode_blowup_integrate(&inst, 100.0, 1e10, &OdeConfig::default()).unwrap();
        assert_relative_eq!(diag.estimated_tstar().unwrap(), 6f64.sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn subcritical_example_blows_up() {
        let diag = ode_blowup_integrate(&subcritical(), 1e4, 1e12, &OdeConfig::default()).unwrap();
        match diag.verdict {
            Verdict::BlewUp { t_star, step_halving_change } => {
                assert!(t_star.is_finite() && t_star > 0.0);
                assert!(step_halving_change < 0.02);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integrable_forcing_stays_bounded() {
        let inst = OdeBlowupInstance {
            q: 10.0,
            k1: 1e-3,
            fdot0: Some(0.0),
            ..subcritical()
        };
        let diag = ode_blowup_integrate(&inst, 1e4, 1e12, &OdeConfig::default()).unwrap();
        assert!(matches!(diag.verdict, Verdict::BoundedThroughHorizon { .. }), "{:?}", diag.verdict);
    }

    #[test]
    fn stronger_data_blows_up_sooner() {
        let mut last = f64::INFINITY;
        for f0 in [0.5, 1.0, 2.0, 4.0] {
            let inst = OdeBlowupInstance { f0: Some(f0), ..subcritical() };
            let t = ode_blowup_integrate(&inst, 1e5, 1e12, &OdeConfig::default())
                .unwrap()
                .estimated_tstar()
                .unwrap();
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn rejects_bad_instances() {
        let bad = OdeBlowupInstance { p: 1.0, k1: -1.0, ..subcritical() };
        match ode_blowup_integrate(&bad, 10.0, 1e6, &OdeConfig::default()) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
