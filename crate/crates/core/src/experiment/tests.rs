use super::*;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

const ROTATIONS: &str = r#"
[scenario]
family = "planar-rotations"
n = 5

[engine]
kind = "curve"
samples = 9
resolution = 32
"#;

const QUADRATIC: &str = r#"
[scenario]
family = "1d-quadratic-contraction"
n = 100

[engine]
kind = "derivative-1d"
samples = 1000
"#;

#[test]
fn rotations_hold_with_zero_distortion() {
    let r = run_experiment(&config(ROTATIONS)).unwrap();
    assert_eq!(r.result.verdict, Verdict::BoundHolds);
    assert!(r.result.empirical <= 1e-12);
    assert_eq!(r.exit_code(), 0);
}

#[test]
fn quadratic_report_is_byte_stable() {
    let cfg = config(QUADRATIC);
    let (a, b) = (run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    assert!(a.result.empirical <= 2.0);
    assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
    assert_eq!(steps_csv(&a).unwrap(), steps_csv(&b).unwrap());
    let csv = steps_csv(&a).unwrap();
    assert!(csv.starts_with("step_index,length_i,alpha_i,lemma1_increment,lemma2_increment,cumulative_log_bound\n"));
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn echoed_config_reproduces_numbers() {
    let cfg = config(QUADRATIC);
    let r = run_experiment(&cfg).unwrap();
    let again = ExperimentConfig::from_toml(&r.config.to_toml()).unwrap();
    assert_eq!(again, cfg);
    let r2 = run_experiment(&again).unwrap();
    assert_eq!(to_json(&r).unwrap(), to_json(&r2).unwrap());
}

#[test]
fn missing_subintervals_is_a_config_error() {
    let cfg = config(
        r#"
[scenario]
family = "planar-rotations"
n = 3

[engine]
kind = "arc-ratio"
"#,
    );
    let err = run_experiment(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("engine.subintervals"));
}

#[test]
fn parse_errors_name_the_location() {
    let err = ExperimentConfig::from_toml("[scenario]\nfamily = 3\n").unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("line"), "{err}");
    let err = ExperimentConfig::from_toml("[scenario]\nfamily = \"identity\"\nn = 2\nbogus = 1\n[engine]\nkind = \"curve\"\n")
        .unwrap_err();
    assert!(err.to_string().contains("bogus"));
}

#[test]
fn engine_scenario_mismatch() {
    let mut cfg = config(ROTATIONS);
    cfg.engine.kind = EngineName::Derivative1d;
    assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 3);
    cfg.engine.kind = EngineName::Holder;
    assert!(run_experiment(&cfg).unwrap_err().to_string().contains("scenario.epsilon"));
}

#[test]
fn verdict_classes() {
    let mut violated = config(QUADRATIC);
    violated.budget.c = Some(0.001);
    violated.engine.samples = 65;
    assert_eq!(run_experiment(&violated).unwrap().exit_code(), 1);

    let trace = config(
        r#"
[scenario]
family = "fibonacci-trace-map"
n = 6

[engine]
kind = "curve"
samples = 17
resolution = 64
"#,
    );
    let r = run_experiment(&trace).unwrap();
    assert_eq!(r.result.verdict, Verdict::HypothesisUnverified);
    assert_eq!(r.exit_code(), 2);
}

#[test]
fn interval_ratio_and_arc_ratio() {
    let mut cfg = config(QUADRATIC);
    cfg.engine.kind = EngineName::IntervalRatio1d;
    cfg.engine.subintervals = Some([[0.0, 0.5], [0.5, 1.0]]);
    cfg.scenario.n = 50;
    let r = run_experiment(&cfg).unwrap();
    let check = r.result.ratio.unwrap();
    assert_eq!(check.r, 1.0);
    assert_eq!(r.result.verdict, Verdict::BoundHolds);

    let mut arc = config(ROTATIONS);
    arc.engine.kind = EngineName::ArcRatio;
    arc.engine.subintervals = Some([[0.0, 0.25], [0.25, 1.0]]);
    let r = run_experiment(&arc).unwrap();
    let check = r.result.ratio.unwrap();
    assert!((check.r - 1.0 / 3.0).abs() < 1e-12);
    assert!((check.ratio - check.r).abs() < 1e-10);
}

#[test]
fn outputs_written() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&config(ROTATIONS)).unwrap();
    let w = write_outputs(&r, dir.path(), false).unwrap();
    assert!(w.report.exists() && w.steps.unwrap().exists() && w.profile.unwrap().exists());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&w.report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "bound-holds");
    assert_eq!(json["config"]["scenario"]["family"], "planar-rotations");

    let only = tempfile::tempdir().unwrap();
    let w = write_outputs(&r, only.path(), true).unwrap();
    assert!(w.steps.is_none());
    assert_eq!(std::fs::read_dir(only.path()).unwrap().count(), 1);
}

#[test]
fn overrides_are_echoed() {
    let mut cfg = config(ROTATIONS);
    cfg.apply_overrides(Some(17), Some(64), Some(99));
    assert_eq!((cfg.engine.samples, cfg.engine.resolution, cfg.scenario.seed), (17, 64, 99));
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.seed, 99);
    assert_eq!(r.config.engine.samples, 17);
}

#[test]
fn short_engine_aliases_parse() {
    for (alias, name) in [
        ("thm-2.1", EngineName::Derivative1d),
        ("thm-2.2", EngineName::IntervalRatio1d),
        ("main-thm", EngineName::Curve),
        ("nbdp", EngineName::ArcRatio),
    ] {
        let cfg = config(&format!("[scenario]\nfamily = \"identity\"\nn = 1\n\n[engine]\nkind = \"{alias}\"\n"));
        assert_eq!(cfg.engine.kind, name);
    }
}
