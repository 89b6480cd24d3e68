use clap::Parser;
use fingap::cli::{execute, run, Cli, ExperimentConfig, ExperimentKind, Status, EXIT_CONFIG};

fn read(dir: &std::path::Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn equilibrium_example_passes_with_unit_capacity() {
    let out = run(&ExperimentConfig::example(ExperimentKind::Equilibrium));
    assert_eq!(out.status(), Status::Pass);
    let cap = out.report.results["capacity"].as_f64().unwrap();
    assert!((cap - 1.0).abs() < 1e-10);
}

#[test]
fn sum_rule_example_reports_ratio_two() {
    let out = run(&ExperimentConfig::example(ExperimentKind::SumRule));
    assert_eq!(out.status(), Status::Pass, "{:?}", out.report.checks);
    let r = &out.report.results;
    assert!((r["final_ratio"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((r["predicted_ratio"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn tables_are_deterministic_and_reports_carry_provenance() {
    let cfg = ExperimentConfig::example(ExperimentKind::CoveringFit);
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg).write(d1.path()).unwrap();
    run(&cfg).write(d2.path()).unwrap();
    for t in ["boundary", "circles", "green_identity"] {
        let name = format!("covering_fit_{t}.csv");
        assert_eq!(read(d1.path(), &name), read(d2.path(), &name));
    }
    let json: serde_json::Value =
        serde_json::from_str(&read(d1.path(), "covering_fit.json")).unwrap();
    assert_eq!(json["config_hash"], cfg.hash());
    assert_eq!(json["config"]["tolerances"]["green_identity"], 1e-4);
    assert_eq!(json["status"], "pass");
    // a different seed moves the random probes
    let mut other = cfg.clone();
    other.seed = 9;
    let d3 = tempfile::tempdir().unwrap();
    run(&other).write(d3.path()).unwrap();
    assert_ne!(
        read(d1.path(), "covering_fit_green_identity.csv"),
        read(d3.path(), "covering_fit_green_identity.csv")
    );
}

#[test]
fn malformed_endpoints_exit_with_config_status_and_no_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "kind = \"equilibrium\"\nendpoints = [1.0, 0.5, 2.0]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let cli = Cli::parse_from([
        "fingap",
        "equilibrium",
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(execute(&cli), EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn subcommand_and_config_kind_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eq.toml");
    let text = ExperimentConfig::example(ExperimentKind::Equilibrium).to_toml();
    std::fs::write(&cfg, text).unwrap();
    let cli = Cli::parse_from(["fingap", "beardon", "-c", cfg.to_str().unwrap()]);
    assert_eq!(execute(&cli), EXIT_CONFIG);
}

#[test]
fn failed_checks_and_errors_have_their_own_status() {
    let dir = tempfile::tempdir().unwrap();
    let mut tight = ExperimentConfig::example(ExperimentKind::SumRule);
    tight.tolerances.ratio = 1e-15;
    tight.output.dir = Some(dir.path().to_str().unwrap().into());
    let path = dir.path().join("tight.toml");
    std::fs::write(&path, tight.to_toml()).unwrap();
    let cli = Cli::parse_from(["fingap", "sumrule", "-c", path.to_str().unwrap()]);
    assert_eq!(execute(&cli), Status::CheckFailed.exit_code());
    assert!(dir.path().join("sum_rule.json").exists());

    // p_n(0) vanishes for odd n on the free background
    let mut pole = ExperimentConfig::example(ExperimentKind::Asymptotics);
    pole.endpoints = vec![-2.0, 2.0];
    pole.operator = ExperimentConfig::example(ExperimentKind::SumRule).operator;
    pole.knobs.probe_x = [0.0, 0.0];
    let out = run(&pole);
    assert_eq!(out.status(), Status::NumericalFailure);
    assert!(out.report.error.is_some());
    let d = tempfile::tempdir().unwrap();
    out.write(d.path()).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&read(d.path(), "asymptotics.json")).unwrap();
    assert_eq!(json["status"], "numerical_failure");
}

#[test]
fn every_example_runs() {
    for kind in ExperimentKind::ALL {
        let mut cfg = ExperimentConfig::example(kind);
        cfg.knobs.walk_steps = 6;
        let out = run(&cfg);
        assert_eq!(out.status(), Status::Pass, "{kind:?}: {:?}", out.report);
    }
}
