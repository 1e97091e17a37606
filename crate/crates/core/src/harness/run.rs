//! Execute one scenario into a content-addressed run directory.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::{cell, sanitize, sha256_hex, write_json, write_with};
use super::scenario::{Scenario, SolverKind, DEFAULT_XI};
use crate::blowup::{
    critical_k0_sweep, f1_lower_bound, fd_blowup_diagnostics, measured_t0, ode_blowup_integrate, Verdict,
};
use crate::duhamel::estimates::standard_bound_samples;
use crate::duhamel::{decay_fit, picard_solve, verify_i, verify_i0_i1, BoundReport, XiSample};
use crate::error::{Error, Result};
use crate::radial_linear::{solve_linear, xkappa_norm, Axis, LinearConfig};
use crate::transforms::Form;

/// Version of the manifest and report layouts.
pub const SCHEMA_VERSION: u32 = 1;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ERROR_FILE: &str = "error.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub name: String,
    pub solver: SolverKind,
    pub scenario_hash: String,
    pub run_dir: PathBuf,
    pub started: String,
    pub finished: String,
    /// File names relative to `run_dir`.
    pub outputs: Vec<String>,
    pub measured: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunError {
    pub exit_code: i32,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<f64>>,
}

/// Hash of the scenario's canonical JSON form.
pub fn scenario_hash(scenario: &Scenario) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(scenario)?))
}

pub fn run_dir(root: &Path, scenario: &Scenario) -> Result<PathBuf> {
    let hash = scenario_hash(scenario)?;
    Ok(root.join(format!("{}-{}", sanitize(&scenario.name), &hash[..12])))
}

#[derive(Default)]
struct Outputs {
    files: Vec<String>,
    measured: BTreeMap<String, f64>,
    verdicts: BTreeMap<String, String>,
}

impl Outputs {
    fn measure(&mut self, key: impl Into<String>, v: f64) {
        // JSON has no NaN; absent means not measurable
        if v.is_finite() {
            self.measured.insert(key.into(), v);
        }
    }

    fn verdict(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.verdicts.insert(key.into(), v.into());
    }

    fn file(&mut self, name: &str) {
        self.files.push(name.to_string());
    }
}

/// Validate, run and persist. Failures after validation leave an
/// `error.json` in the run directory.
pub fn run(scenario: &Scenario, root: &Path) -> Result<RunManifest> {
    scenario.validate()?;
    let solver = scenario.solver()?;
    let hash = scenario_hash(scenario)?;
    let dir = run_dir(root, scenario)?;
    std::fs::create_dir_all(&dir)?;
    let _ = std::fs::remove_file(dir.join(ERROR_FILE));
    std::fs::write(dir.join("scenario.toml"), scenario.to_toml()?)?;
    let started = chrono::Utc::now().to_rfc3339();

    let mut out = Outputs::default();
    out.file("scenario.toml");
    let result = match solver {
        SolverKind::Linear => run_linear(scenario, &dir, &mut out),
        SolverKind::Picard => run_picard(scenario, &dir, &mut out),
        SolverKind::Fd => run_fd(scenario, &dir, &mut out),
        SolverKind::OdeLemma => run_ode(scenario, &dir, &mut out),
        SolverKind::Verify => run_verify(scenario, &dir, &mut out),
    };
    if let Err(err) = result {
        let history = match &err {
            Error::Divergence { history } => Some(history.clone()),
            _ => None,
        };
        let record = RunError {
            exit_code: err.exit_code(),
            message: err.to_string(),
            history,
        };
        write_json(&dir.join(ERROR_FILE), &record)?;
        return Err(err);
    }

    out.file(MANIFEST_FILE);
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        name: scenario.name.clone(),
        solver,
        scenario_hash: hash,
        run_dir: dir.clone(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        outputs: out.files,
        measured: out.measured,
        verdicts: out.verdicts,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// As [`run`], but reuse a finished run of the same scenario.
pub fn run_or_resume(scenario: &Scenario, root: &Path) -> Result<RunManifest> {
    scenario.validate()?;
    let path = run_dir(root, scenario)?.join(MANIFEST_FILE);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(m) = serde_json::from_str::<RunManifest>(&text) {
            if m.scenario_hash == scenario_hash(scenario)? && m.schema_version == SCHEMA_VERSION {
                return Ok(m);
            }
        }
    }
    run(scenario, root)
}

fn run_linear(s: &Scenario, dir: &Path, out: &mut Outputs) -> Result<()> {
    let g = s.velocity()?;
    let h = s.grid.h.unwrap_or(0.5);
    let t_max = s.grid.t_max.unwrap_or(50.0);
    let r_max = s.grid.r_max.unwrap_or(t_max + s.grid.pad.unwrap_or(20.0));
    let cfg = match s.tolerances.quad {
        Some(tol) => LinearConfig::with_tol(tol),
        None => LinearConfig::default(),
    };
    let field = solve_linear(&g, &Axis::with_step(0.0, t_max, h)?, &Axis::with_step(0.0, r_max, h)?, &cfg)?;
    let norm = xkappa_norm(&field, s.kappa())?;
    field.save_csv(&dir.join("field.csv"))?;
    out.file("field.csv");
    write_json(&dir.join("norm.json"), &norm)?;
    out.file("norm.json");
    out.measure("epsilon", g.epsilon());
    out.measure("norm", norm.total);
    if g.epsilon() > 0.0 {
        out.measure("norm_over_epsilon", norm.total / g.epsilon());
    }
    Ok(())
}

fn run_picard(s: &Scenario, dir: &Path, out: &mut Outputs) -> Result<()> {
    let g = s.velocity()?;
    let p = s.p.expect("validated");
    let mut rep = picard_solve(
        &g,
        p,
        s.kappa(),
        s.picard_grid(),
        s.tolerances.picard.unwrap_or(1e-10),
        s.tolerances.max_iter.unwrap_or(8),
    )?;
    let field = rep.field.take().expect("the solver returns its field");
    if let Some((lo, hi)) = s.fit.decay {
        rep.decay_fit = decay_fit(&field, lo, hi).ok();
    }
    field.save_csv(&dir.join("field.csv"))?;
    out.file("field.csv");
    write_json(&dir.join("report.json"), &rep)?;
    out.file("report.json");
    write_with(&dir.join("iterations.csv"), |w| {
        writeln!(w, "k,norm,difference")?;
        for (k, norm) in rep.iterates.iter().enumerate() {
            writeln!(w, "{k},{norm:e},{}", cell(rep.differences.get(k).copied()))?;
        }
        Ok(())
    })?;
    out.file("iterations.csv");
    out.measure("epsilon", g.epsilon());
    out.measure("lin_norm", rep.iterates[0]);
    out.measure("norm", *rep.iterates.last().expect("at least the linear iterate"));
    if g.epsilon() > 0.0 {
        out.measure("norm_over_epsilon", rep.iterates[0] / g.epsilon());
    }
    out.measure("iterations", rep.iterations as f64);
    out.measure("contraction_ratio", rep.contraction_ratio);
    if let Some(fit) = rep.decay_fit {
        out.measure("decay_slope", fit.slope);
    }
    out.verdict("picard", if rep.converged { "converged" } else { "not-converged" });
    Ok(())
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::BlewUp { .. } => "blew-up",
        Verdict::BoundedThroughHorizon { .. } => "bounded-through-horizon",
        Verdict::Inconclusive { .. } => "inconclusive",
    }
}

fn record_verdict(out: &mut Outputs, key: &str, v: &Verdict) {
    out.verdict(key, verdict_name(v));
    if let Verdict::BlewUp {
        t_star,
        step_halving_change,
    } = *v
    {
        out.measure("t_star", t_star);
        out.measure("step_halving_change", step_halving_change);
    }
}

fn run_fd(s: &Scenario, dir: &Path, out: &mut Outputs) -> Result<()> {
    let spec = s.fd_spec()?;
    let horizon = s.grid.t_max.expect("validated");
    let (diag, outcome) = fd_blowup_diagnostics(&spec, &s.fd_grid(), horizon, s.fit.growth)?;
    // the lower bound on F_1 needs an undamped equation with nonnegative forcing
    let undamped = spec.form == Form::WeightedWave || (spec.mu == 0.0 && spec.m == 0.0);
    let bound = match (&spec.data, undamped) {
        (Some(data), true) => Some(f1_lower_bound(data, spec.n, &diag.t)?),
        _ => None,
    };
    outcome.field.save_csv(&dir.join("field.csv"))?;
    out.file("field.csv");
    write_with(&dir.join("functionals.csv"), |w| diag.write_csv(w, bound.as_deref()))?;
    out.file("functionals.csv");
    write_json(&dir.join("diagnostics.json"), &diag)?;
    out.file("diagnostics.json");

    let label = match diag.verdict {
        Verdict::BlewUp { .. } => "blow-up-candidate",
        _ => verdict_name(&diag.verdict),
    };
    record_verdict(out, "fd", &diag.verdict);
    out.verdict("fd", label);
    if let Some(g) = diag.growth {
        out.measure("growth_exponent", g.exponent());
    }
    if let Some(f) = diag.f.last() {
        out.measure("f_final", *f);
    }
    if let Some(b) = &bound {
        if let Some(t0) = measured_t0(&diag.t, &diag.f1, b, 1e-3) {
            out.measure("f1_bound_t0", t0);
        }
    }
    Ok(())
}

fn run_ode(s: &Scenario, dir: &Path, out: &mut Outputs) -> Result<()> {
    let (inst, cfg, o) = s.ode_setup()?;
    out.verdict("branch", format!("{:?}", inst.branch()).to_lowercase());
    let diag = ode_blowup_integrate(&inst, o.horizon, o.escape, &cfg)?;
    write_with(&dir.join("series.csv"), |w| diag.write_csv(w, None))?;
    out.file("series.csv");
    write_json(&dir.join("diagnostics.json"), &diag)?;
    out.file("diagnostics.json");
    record_verdict(out, "ode", &diag.verdict);

    if let Some(k0s) = &o.k0_sweep {
        let rows = critical_k0_sweep(&inst, k0s, o.horizon, o.escape, &cfg)?;
        write_with(&dir.join("k0_sweep.csv"), |w| {
            writeln!(w, "k0,verdict,t_star")?;
            for (k0, v) in &rows {
                let t_star = match v {
                    Verdict::BlewUp { t_star, .. } => Some(*t_star),
                    _ => None,
                };
                writeln!(w, "{k0:e},{},{}", verdict_name(v), cell(t_star))?;
            }
            Ok(())
        })?;
        out.file("k0_sweep.csv");
        let onset = rows
            .iter()
            .filter(|(_, v)| matches!(v, Verdict::BlewUp { .. }))
            .map(|(k, _)| *k)
            .fold(f64::INFINITY, f64::min);
        out.measure("onset_k0", onset);
    }
    Ok(())
}

#[derive(Serialize)]
struct PairEstimates {
    p: f64,
    kappa: f64,
    xi: Vec<XiSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zones: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zones_skipped: Option<String>,
}

fn run_verify(s: &Scenario, dir: &Path, out: &mut Outputs) -> Result<()> {
    let spec = s.verify.clone().unwrap_or_default();
    let xi = spec.xi.clone().unwrap_or_else(|| DEFAULT_XI.to_vec());
    let zones = spec.zones.unwrap_or(true);
    let samples = standard_bound_samples();
    let mut results = Vec::new();
    for (p, kappa) in s.verify_pairs() {
        let rows = verify_i(p, kappa, &xi)?;
        let tag = format!("p={p},kappa={kappa}");
        if rows.len() >= 2 {
            // variation between the two largest ξ
            let mut sorted: Vec<&XiSample> = rows.iter().collect();
            sorted.sort_by(|a, b| a.xi.total_cmp(&b.xi));
            let (a, b) = (sorted[sorted.len() - 2].ratio, sorted[sorted.len() - 1].ratio);
            out.measure(format!("i_variation[{tag}]"), (b - a).abs() / a.abs().min(b.abs()));
        }
        let (report, skipped) = if zones {
            match verify_i0_i1(p, kappa, &samples) {
                Ok(rep) => {
                    out.verdict(
                        format!("zones[{tag}]"),
                        if rep.all_bounded() { "single-ceiling" } else { "no-single-ceiling" },
                    );
                    (Some(rep), None)
                }
                Err(Error::Domain(why)) => {
                    out.verdict(format!("zones[{tag}]"), "not-applicable");
                    (None, Some(why))
                }
                Err(e) => return Err(e),
            }
        } else {
            (None, None)
        };
        results.push(PairEstimates {
            p,
            kappa,
            xi: rows,
            zones: report,
            zones_skipped: skipped,
        });
    }
    write_with(&dir.join("xi.csv"), |w| {
        writeln!(w, "p,kappa,xi,value,ratio")?;
        for r in &results {
            for x in &r.xi {
                writeln!(w, "{:e},{:e},{:e},{:e},{:e}", r.p, r.kappa, x.xi, x.value, x.ratio)?;
            }
        }
        Ok(())
    })?;
    out.file("xi.csv");
    if zones {
        write_with(&dir.join("zones.csv"), |w| {
            writeln!(w, "p,kappa,zone,quantity,count,rays,max_ratio,worst_deceleration,single_ceiling")?;
            for r in &results {
                for c in r.zones.iter().flat_map(|z| &z.ceilings) {
                    writeln!(
                        w,
                        "{:e},{:e},{},{},{},{},{:e},{},{}",
                        r.p,
                        r.kappa,
                        serde_json::to_value(c.zone)?.as_str().unwrap_or_default(),
                        serde_json::to_value(c.quantity)?.as_str().unwrap_or_default(),
                        c.count,
                        c.rays,
                        c.max_ratio,
                        cell(Some(c.worst_deceleration)),
                        c.single_ceiling
                    )?;
                }
            }
            Ok(())
        })?;
        out.file("zones.csv");
    }
    write_json(&dir.join("estimates.json"), &results)?;
    out.file("estimates.json");
    Ok(())
}
