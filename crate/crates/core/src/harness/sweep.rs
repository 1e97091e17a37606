//! Cartesian parameter sweeps over a base scenario.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::{cell, text_cell, write_with};
use super::run::{run_or_resume, RunManifest};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::exponents::classify;

/// `[base]` is a scenario; `[axes]` maps dotted scenario keys
/// (`p`, `grid.h`, `data.amplitude`, ...) to lists of values. The axis
/// named [`VARIANT_AXIS`] takes tables instead, each merged into the whole
/// scenario and named by its optional `label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Scenario,
    #[serde(default)]
    pub axes: toml::Table,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Validation(vec![e.message().to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&super::scenario::read(path)?)
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub outcome: std::result::Result<RunManifest, (i32, String)>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub summary: PathBuf,
}

fn set_path(root: &mut serde_json::Value, key: &str, value: serde_json::Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Validation(vec![format!("axes.{key}: {part} is not a table")]))?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| Error::Validation(vec![format!("axes.{key}: parent is not a table")]))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

pub const VARIANT_AXIS: &str = "variant";

fn merge(into: &mut serde_json::Value, from: serde_json::Value) {
    match (into, from) {
        (serde_json::Value::Object(a), serde_json::Value::Object(b)) => {
            for (k, v) in b {
                merge(a.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

fn label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Expand the axes in key order, last key fastest. Empty axes give the base.
pub fn expand(config: &SweepConfig) -> Result<Vec<Scenario>> {
    let mut axes: Vec<(&String, &Vec<toml::Value>)> = Vec::new();
    let mut problems = Vec::new();
    for (key, values) in &config.axes {
        match values.as_array() {
            Some(list) if !list.is_empty() => axes.push((key, list)),
            _ => problems.push(format!("axes.{key}: needs a non-empty list")),
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let base = serde_json::to_value(&config.base)?;
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut out = Vec::with_capacity(total);
    for mut index in 0..total {
        let mut value = base.clone();
        let mut picks = Vec::with_capacity(axes.len());
        for (key, values) in axes.iter().rev() {
            let pick = index % values.len();
            let v = &values[pick];
            index /= values.len();
            if key.as_str() == VARIANT_AXIS {
                let mut table = v
                    .as_table()
                    .cloned()
                    .ok_or_else(|| Error::Validation(vec![format!("axes.{VARIANT_AXIS}: entries must be tables")]))?;
                let name = table.remove("label").map(|l| label(&l)).unwrap_or_else(|| pick.to_string());
                merge(&mut value, serde_json::to_value(table)?);
                picks.push(format!("{key}={name}"));
            } else {
                set_path(&mut value, key, serde_json::to_value(v)?)?;
                picks.push(format!("{key}={}", label(v)));
            }
        }
        picks.reverse();
        if !picks.is_empty() {
            let name = format!("{}-{}", config.base.name, picks.join(","));
            value["name"] = serde_json::Value::String(name);
        }
        let scenario: Scenario =
            serde_json::from_value(value).map_err(|e| Error::Validation(vec![format!("axes: {e}")]))?;
        out.push(scenario);
    }
    Ok(out)
}

/// Columns of `summary.csv`, in order.
pub const SUMMARY_COLUMNS: [&str; 22] = [
    "name",
    "solver",
    "n",
    "mu",
    "m",
    "p",
    "kappa",
    "epsilon",
    "regime",
    "status",
    "exit_code",
    "verdict",
    "norm",
    "norm_over_epsilon",
    "iterations",
    "contraction_ratio",
    "decay_slope",
    "t_star",
    "growth_exponent",
    "scenario_hash",
    "run_dir",
    "message",
];

fn summary_line(row: &SweepRow) -> String {
    let s = &row.scenario;
    let regime = s
        .p
        .and_then(|p| classify(s.n, s.mu, s.m, p).ok())
        .map(|v| v.regime.to_string())
        .unwrap_or_default();
    let solver = s.solver.map(|k| k.as_str()).unwrap_or_default();
    let mut cols = vec![
        text_cell(&s.name),
        solver.to_string(),
        s.n.to_string(),
        cell(Some(s.mu)),
        cell(Some(s.m)),
        cell(s.p),
        cell(Some(s.kappa())),
        cell(s.epsilon),
        regime,
    ];
    match &row.outcome {
        Ok(m) => {
            let get = |k: &str| cell(m.measured.get(k).copied());
            let verdict = ["picard", "fd", "ode"]
                .iter()
                .find_map(|k| m.verdicts.get(*k).cloned())
                .unwrap_or_default();
            cols.extend([
                "ok".to_string(),
                "0".to_string(),
                verdict,
                get("norm"),
                get("norm_over_epsilon"),
                get("iterations"),
                get("contraction_ratio"),
                get("decay_slope"),
                get("t_star"),
                get("growth_exponent"),
                m.scenario_hash.clone(),
                text_cell(&m.run_dir.display().to_string()),
                String::new(),
            ]);
        }
        Err((code, msg)) => {
            cols.extend(["failed".to_string(), code.to_string()]);
            cols.extend(std::iter::repeat_n(String::new(), 10));
            cols.push(text_cell(msg));
        }
    }
    cols.join(",")
}

/// Run every expanded scenario on `jobs` threads (`0` = all cores) and
/// write `summary.csv` under `root/<base name>-sweep`. Failures are recorded
/// per row; the sweep continues.
pub fn sweep(config: &SweepConfig, root: &Path, jobs: usize) -> Result<SweepOutcome> {
    let scenarios = expand(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        scenarios
            .into_par_iter()
            .map(|scenario| {
                let outcome = run_or_resume(&scenario, root).map_err(|e| (e.exit_code(), e.to_string()));
                SweepRow { scenario, outcome }
            })
            .collect()
    });
    let dir = root.join(format!("{}-sweep", super::io::sanitize(&config.base.name)));
    std::fs::create_dir_all(&dir)?;
    let summary = dir.join("summary.csv");
    write_with(&summary, |w| {
        writeln!(w, "{}", SUMMARY_COLUMNS.join(","))?;
        for row in &rows {
            writeln!(w, "{}", summary_line(row))?;
        }
        Ok(())
    })?;
    Ok(SweepOutcome { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[base]\nname = \"b\"\nsolver = \"ode-lemma\"\np = 2.0\n\
                        [base.ode]\nq = 2.0\nk1 = 1.0\nf0 = 1.0\nfdot0 = 1.0\nhorizon = 50.0\n";

    #[test]
    fn empty_axes_give_the_base() {
        let cfg = SweepConfig::from_toml(BASE).unwrap();
        let all = expand(&cfg).unwrap();
        assert_eq!(all, vec![cfg.base.clone()]);
    }

    #[test]
    fn cartesian_product_in_key_order() {
        let cfg = SweepConfig::from_toml(&format!("{BASE}[axes]\np = [2.0, 3.0]\n\"ode.k1\" = [1.0, 2.0, 4.0]\n")).unwrap();
        let all = expand(&cfg).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].ode.as_ref().unwrap().k1, 1.0);
        assert_eq!(all[1].p, Some(3.0));
        assert_eq!(all[2].ode.as_ref().unwrap().k1, 2.0);
        assert_eq!(all[3].name, "b-ode.k1=2.0,p=3.0");
    }

    #[test]
    fn variants_merge_tables() {
        let cfg = SweepConfig::from_toml(&format!(
            "{BASE}[[axes.variant]]\nlabel = \"slow\"\node = {{ k1 = 0.5 }}\n[[axes.variant]]\np = 3.0\n"
        ))
        .unwrap();
        let all = expand(&cfg).unwrap();
        assert_eq!(all[0].name, "b-variant=slow");
        assert_eq!(all[0].ode.as_ref().unwrap().k1, 0.5);
        assert_eq!(all[0].ode.as_ref().unwrap().q, 2.0);
        assert_eq!(all[1].name, "b-variant=1");
        assert_eq!(all[1].p, Some(3.0));
    }

    #[test]
    fn bad_axes_are_rejected() {
        let cfg = SweepConfig::from_toml(&format!("{BASE}[axes]\np = []\n")).unwrap();
        assert!(matches!(expand(&cfg), Err(Error::Validation(_))));
        let cfg = SweepConfig::from_toml(&format!("{BASE}[axes]\n\"ode.typo\" = [1.0]\n")).unwrap();
        assert!(matches!(expand(&cfg), Err(Error::Validation(_))));
    }

    #[test]
    fn failures_do_not_stop_the_sweep() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = SweepConfig::from_toml(&format!("{BASE}[axes]\n\"ode.k1\" = [1.0, -1.0]\n")).unwrap();
        let out = sweep(&cfg, tmp.path(), 2).unwrap();
        assert!(out.rows[0].outcome.is_ok());
        assert_eq!(out.rows[1].outcome.as_ref().unwrap_err().0, 2);
        let text = std::fs::read_to_string(&out.summary).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].contains(",ok,0,blew-up,"));
        assert!(lines[2].contains(",failed,2,"));
    }
}
