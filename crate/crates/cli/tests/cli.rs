use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use confdop_core::conformal::{flow_oracle, Event, FlowOptions, GroupParameter};
use confdop_core::extended::DoubleDouble;
use confdop_core::tracking::{read_csv, SimConfig};

fn confdop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confdop"))
        .args(args)
        .env_remove("CONFDOP_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn transform_identity_in_si_units() {
    let v = json(&confdop(&[
        "transform",
        "--alpha",
        "0",
        "--r",
        "1",
        "--t",
        "-10",
        "--json",
    ]));
    assert_eq!(v["r"], 1.0);
    assert_eq!(v["t"], -10.0);
    assert_eq!(v["gamma"], 1.0);
}

#[test]
fn transform_matches_rk4_flow() {
    let v = json(&confdop(&[
        "transform",
        "--beta4",
        "0.05",
        "--r",
        "1",
        "--x4",
        "2",
        "--json",
        "--hill",
    ]));
    let p = GroupParameter::geometric(0.05).unwrap();
    let flowed = flow_oracle(&p, &Event::new(1.0, 2.0).unwrap(), &FlowOptions::default()).unwrap();
    let r = v["r"].as_f64().unwrap();
    let x4 = v["x4"].as_f64().unwrap();
    assert!((r - flowed.r()).abs() < 1e-9 * flowed.r());
    assert!((x4 - flowed.x4()).abs() < 1e-9 * flowed.x4());
    assert!(v["hill"]["r"].is_number());
    assert!((v["s2_over_r"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn transform_origin_is_fixed_and_s2_over_r_undefined() {
    for beta in ["-4", "0.3", "25"] {
        let v = json(&confdop(&[
            "transform",
            "--beta4",
            beta,
            "--r",
            "0",
            "--x4",
            "0",
            "--json",
        ]));
        assert_eq!((v["r"].as_f64(), v["x4"].as_f64()), (Some(0.0), Some(0.0)));
        assert!(v["s2_over_r"].is_null());
    }
}

#[test]
fn transform_exit_codes() {
    let singular = confdop(&["transform", "--beta4", "1", "--r", "0", "--x4", "1"]);
    assert_eq!(singular.status.code(), Some(1));
    assert!(
        stderr(&singular).contains("singular"),
        "{}",
        stderr(&singular)
    );
    let crossing = confdop(&["transform", "--beta4", "0.34", "--r", "1", "--x4", "2"]);
    assert_eq!(crossing.status.code(), Some(1));
    assert_eq!(
        confdop(&["transform", "--r", "1", "--x4", "1"])
            .status
            .code(),
        Some(2)
    );
    let both = confdop(&[
        "transform",
        "--alpha",
        "1",
        "--beta4",
        "1",
        "--r",
        "1",
        "--x4",
        "1",
    ]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    assert_eq!(
        confdop(&["check", "--suite", "group", "--cases", "300"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        confdop(&["check", "--suite", "metric", "--cases", "300"])
            .status
            .code(),
        Some(0)
    );
    let hill = confdop(&["check", "--suite", "hill"]);
    assert_eq!(hill.status.code(), Some(0));
    assert!(stdout(&hill).contains("min empirical order"));
    let strict = confdop(&[
        "check",
        "--suite",
        "invariant",
        "--cases",
        "50",
        "--tol",
        "0",
    ]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(stdout(&strict).contains("beta4="), "{}", stdout(&strict));
    assert_eq!(
        confdop(&["check", "--suite", "nonsense"]).status.code(),
        Some(2)
    );
}

fn write_config(dir: &Path, name: &str, cfg: &SimConfig) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(cfg).unwrap()).unwrap();
    path
}

#[test]
fn simulate_noiseless_minkowski_doppler_equals_range_rate_over_c() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &SimConfig::pioneer_like(0.0, 50, 1).noiseless(),
    );
    let out = dir.path().join("t.csv");
    let o = confdop(&["simulate", "--config", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = read_csv(fs::File::open(&out).unwrap()).unwrap();
    for r in recs {
        assert_eq!(
            r.doppler_frac_meas,
            DoubleDouble::from_f64(r.range_rate_true).div_f64(confdop_core::SPEED_OF_LIGHT)
        );
    }
    assert!(dir.path().join("t.csv.manifest.json").exists());
}

#[test]
fn simulate_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &SimConfig::pioneer_like(0.0, 20, 1));
    let run = |name: &str, flag: Option<&str>, env: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_confdop"));
        cmd.args(["simulate", "--config", p(&cfg), "--out", p(&out)]);
        cmd.env_remove("CONFDOP_SEED");
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        if let Some(s) = env {
            cmd.env("CONFDOP_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read(out).unwrap()
    };
    let config_seed = run("a.csv", None, None);
    let env_seed = run("b.csv", None, Some("7"));
    let flag_seed = run("c.csv", Some("7"), Some("99"));
    assert_ne!(config_seed, env_seed);
    assert_eq!(env_seed, flag_seed);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["seed"], 7);
}

#[test]
fn simulate_invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SimConfig {
        n_obs: 1,
        ..SimConfig::pioneer_like(0.0, 10, 0)
    };
    let cfg = write_config(dir.path(), "c.json", &bad);
    let o = confdop(&[
        "simulate",
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("x.csv")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n_obs"), "{}", stderr(&o));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn fit_writes_exact_keys_and_recovers_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &SimConfig::pioneer_like(2.19e-18, 200, 1).noiseless(),
    );
    let csv = dir.path().join("t.csv");
    assert!(
        confdop(&["simulate", "--config", p(&cfg), "--out", p(&csv)])
            .status
            .success()
    );
    let out = dir.path().join("fit.json");
    let o = confdop(&[
        "fit",
        "--input",
        p(&csv),
        "--out",
        p(&out),
        "--bootstrap",
        "100",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("bootstrap_stderr"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "alpha_hat",
            "alpha_stderr",
            "chi2",
            "decision",
            "dof",
            "n_used",
            "z_score_alpha_zero"
        ]
    );
    assert!((v["alpha_hat"].as_f64().unwrap() / 2.19e-18 - 1.0).abs() < 1e-12);
    assert_eq!(v["decision"], "ConformalDetected");
    assert_eq!(v["n_used"], 200);

    let o = confdop(&["fit", "--input", p(&csv), "--z-threshold", "1e300"]);
    assert_eq!(json(&o)["decision"], "MinkowskiConsistent");
}

#[test]
fn fit_malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(
        &csv,
        format!(
            "{}\n1,2,3,4,5e-5,1e-12\n1,2,3,4,5e-5,1e-12\n1,2,3,4,zzz,1e-12\n",
            confdop_core::tracking::CSV_HEADER
        ),
    )
    .unwrap();
    let o = confdop(&["fit", "--input", p(&csv)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    let o = confdop(&["fit", "--input", p(&dir.path().join("missing.csv"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fit_degenerate_design_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    fs::write(
        &csv,
        format!(
            "{}\n1,2,3,4,5e-5,1e-12\n",
            confdop_core::tracking::CSV_HEADER
        ),
    )
    .unwrap();
    assert_eq!(confdop(&["fit", "--input", p(&csv)]).status.code(), Some(1));
}

#[test]
fn report_defaults_and_corrections() {
    let v = json(&confdop(&["report", "--json"]));
    assert_eq!(v["opposite_sign"], true);
    assert_eq!(v["hubble_rate"], 2.19e-18);
    assert_eq!(v["anomaly_rate"], -2.80e-18);
    assert!(v["corrected_hubble_rate"].is_null());

    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit.json");
    let doc = |alpha: f64| {
        format!(
            r#"{{"alpha_hat":{alpha:e},"alpha_stderr":1e-19,"chi2":1.0,"dof":9,"z_score_alpha_zero":1.0,"n_used":10,"decision":"MinkowskiConsistent"}}"#
        )
    };
    fs::write(&fit, doc(2.19e-18)).unwrap();
    let v = json(&confdop(&["report", "--fit", p(&fit), "--json"]));
    assert_eq!(v["corrected_hubble_rate"], 0.0);
    fs::write(&fit, doc(0.0)).unwrap();
    let v = json(&confdop(&["report", "--fit", p(&fit), "--json"]));
    assert_eq!(v["corrected_hubble_rate"], 2.19e-18);
    let text = stdout(&confdop(&["report", "--fit", p(&fit)]));
    assert!(
        text.contains("opposite sign") && text.contains("MinkowskiConsistent"),
        "{text}"
    );

    let o = confdop(&["report", "--fit", p(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &SimConfig::pioneer_like(1e-18, 20, 4));
    let csv = dir.path().join("t.csv");
    assert!(
        confdop(&["simulate", "--config", p(&cfg), "--out", p(&csv)])
            .status
            .success()
    );
    let manifest = dir.path().join("t.csv.manifest.json");
    assert!(confdop(&["verify", p(&manifest)]).status.success());
    let mut text = fs::read_to_string(&csv).unwrap();
    text.push('\n');
    fs::write(&csv, text).unwrap();
    let o = confdop(&["verify", p(&manifest)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("digest mismatch"));
}
