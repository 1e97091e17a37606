//! The command line front end and the sweep runner, end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wavecrit::harness::{expand, run, sweep, Scenario, SolverKind, SweepConfig};

fn wavecrit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavecrit"))
        .args(args)
        .env("WAVECRIT_OUT", out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn scenario_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn manifest(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn zero_data_linear_run_is_zero_and_replays_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "zero.toml",
        "name = \"zero\"\n[data]\nshape = \"zero\"\n[grid]\nh = 1.0\nt_max = 5.0\npad = 2.0\n",
    );
    let cfg = cfg.to_str().unwrap();
    let first = manifest(&wavecrit(tmp.path(), &["solve-linear", "--config", cfg]));
    let dir = PathBuf::from(first["run_dir"].as_str().unwrap());
    let field = std::fs::read(dir.join("field.csv")).unwrap();
    let text = String::from_utf8(field.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r,u,dr_ru"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[2..], ["0e0", "0e0"], "{line}");
    }
    assert_eq!(first["measured"]["norm"], 0.0);

    let second = manifest(&wavecrit(tmp.path(), &["solve-linear", "--config", cfg]));
    assert_eq!(second["run_dir"], first["run_dir"]);
    assert_eq!(second["scenario_hash"], first["scenario_hash"]);
    assert_eq!(std::fs::read(dir.join("field.csv")).unwrap(), field);
}

#[test]
fn empty_kappa_range_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "p17.toml",
        "name = \"p17\"\np = 1.7\nepsilon = 1e-3\n[data]\nshape = \"algebraic\"\n",
    );
    let out = wavecrit(tmp.path(), &["solve-picard", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kappa range empty for p=1.7"), "{stderr}");
    // nothing is written for a scenario that fails validation
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 1);
}

#[test]
fn solver_mismatch_and_missing_config_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wavecrit(tmp.path(), &["solve-fd"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(tmp.path(), "lin.toml", "name = \"lin\"\nsolver = \"linear\"\n");
    let out = wavecrit(tmp.path(), &["solve-fd", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("asks for linear"));
    let out = wavecrit(
        tmp.path(),
        &["solve-fd", "--config", scenario_file("picard.toml").to_str().unwrap()],
    );
    // the file does not name a solver, so fd is used and its checks apply
    assert_eq!(out.status.code(), Some(2));
    let out = wavecrit(tmp.path(), &["solve-linear", "--config", "/nonexistent/x.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/x.toml"));
}

#[test]
fn exponent_table_and_classifier() {
    let tmp = tempfile::tempdir().unwrap();
    let table = manifest(&wavecrit(tmp.path(), &["exponents", "--max-n", "3"]));
    let rows = table.as_array().unwrap();
    let p2_3 = rows
        .iter()
        .find(|r| r["name"] == "p2" && r["args"]["n"] == 3)
        .expect("p2(3) listed");
    assert!((p2_3["value"].as_f64().unwrap() - (3.0 + 17f64.sqrt()) / 4.0).abs() < 1e-12);

    let v = manifest(&wavecrit(tmp.path(), &["classify", "--n", "2", "--mu", "2", "--m", "0", "--p", "2.5"]));
    assert_eq!(v["regime"], "GlobalExistence");
    let v = manifest(&wavecrit(tmp.path(), &["classify", "--n", "4", "--mu", "2", "--m", "0", "--p", "3"]));
    assert_eq!(v["regime"], "Open");
}

#[test]
fn epsilon_sweep_keeps_the_norm_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::load(&write(
        tmp.path(),
        "eps.toml",
        "[base]\nname = \"eps\"\nsolver = \"linear\"\nkappa = 1.5\nepsilon = 1e-1\n\
         [base.data]\nshape = \"algebraic\"\n[base.grid]\nh = 0.5\nt_max = 50.0\npad = 20.0\n\
         [axes]\nepsilon = [1e-1, 1e-2, 1e-3]\n",
    ))
    .unwrap();
    let out = sweep(&cfg, tmp.path(), 1).unwrap();
    let ratios: Vec<f64> = out
        .rows
        .iter()
        .map(|r| r.outcome.as_ref().unwrap().measured["norm_over_epsilon"])
        .collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo - 1.0 <= 0.05, "{ratios:?}");
}

#[test]
fn p_sweep_across_the_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::load(&scenario_file("sweep-p.toml")).unwrap();
    let out = sweep(&cfg, tmp.path(), 0).unwrap();
    assert_eq!(out.rows.len(), 8);
    let summary = std::fs::read_to_string(&out.summary).unwrap();
    let header = summary.lines().next().unwrap();
    assert_eq!(header, wavecrit::harness::SUMMARY_COLUMNS.join(","));
    let row = |name: &str| {
        summary
            .lines()
            .find(|l| l.starts_with(&format!("\"{name}\"")) || l.starts_with(&format!("{name},")))
            .unwrap_or_else(|| panic!("{name} missing from\n{summary}"))
            .to_string()
    };
    assert!(row("sweep-p-p=1.5,variant=fd").contains(",blow-up,ok,0,blow-up-candidate,"));
    assert!(row("sweep-p-p=2.2,variant=fd").contains(",bounded-through-horizon,"));
    assert!(row("sweep-p-p=1.9,variant=picard").contains(",ok,0,converged,"));
    // below p0(5) the solver range for kappa is empty
    assert!(row("sweep-p-p=1.5,variant=picard").contains(",failed,2,"));
}

#[test]
fn sweep_results_do_not_depend_on_the_thread_count() {
    let text = "[base]\nname = \"ode\"\nsolver = \"ode-lemma\"\np = 2.0\n\
                [base.ode]\nq = 2.0\nk1 = 1.0\nf0 = 1.0\nfdot0 = 1.0\nhorizon = 50.0\n\
                [axes]\n\"ode.k1\" = [0.25, 0.5, 1.0, 2.0]\n\"ode.f0\" = [0.5, 1.0]\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::from_toml(text).unwrap();
    let one = sweep(&cfg, a.path(), 1).unwrap();
    let many = sweep(&cfg, b.path(), 3).unwrap();
    let strip = |s: &str, root: &Path| s.replace(root.to_str().unwrap(), "ROOT");
    assert_eq!(
        strip(&std::fs::read_to_string(&one.summary).unwrap(), a.path()),
        strip(&std::fs::read_to_string(&many.summary).unwrap(), b.path())
    );
    for (x, y) in one.rows.iter().zip(&many.rows) {
        let (x, y) = (x.outcome.as_ref().unwrap(), y.outcome.as_ref().unwrap());
        assert_eq!(
            std::fs::read(x.run_dir.join("series.csv")).unwrap(),
            std::fs::read(y.run_dir.join("series.csv")).unwrap()
        );
    }
}

#[test]
fn empty_axes_run_the_base_once() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::from_toml(
        "[base]\nname = \"single\"\nsolver = \"ode-lemma\"\np = 2.0\n\
         [base.ode]\nq = 10.0\nk1 = 1e-3\nf0 = 1.0\nfdot0 = 0.0\nhorizon = 100.0\n",
    )
    .unwrap();
    assert_eq!(expand(&cfg).unwrap(), vec![cfg.base.clone()]);
    let out = sweep(&cfg, tmp.path(), 1).unwrap();
    assert_eq!(out.rows.len(), 1);
    let m = out.rows[0].outcome.as_ref().unwrap();
    assert_eq!(m.verdicts["ode"], "bounded-through-horizon");
}

#[test]
fn shipped_scenarios_are_valid() {
    // the files leave the solver to the subcommand
    for (name, solver) in [
        ("linear.toml", SolverKind::Linear),
        ("picard.toml", SolverKind::Picard),
        ("fd-subcritical.toml", SolverKind::Fd),
        ("ode-critical.toml", SolverKind::OdeLemma),
        ("verify.toml", SolverKind::Verify),
    ] {
        let mut s = Scenario::load(&scenario_file(name)).unwrap();
        s.solver = s.solver.or(Some(solver));
        s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let tmp = tempfile::tempdir().unwrap();
    let mut s = Scenario::load(&scenario_file("ode-critical.toml")).unwrap();
    s.solver = Some(SolverKind::OdeLemma);
    let m = run(&s, tmp.path()).unwrap();
    assert!(m.outputs.contains(&"k0_sweep.csv".to_string()));
}
