use std::path::Path;
use std::process::{Command, Output};

use oam_swipt::output::read_bundle_json;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oam-swipt")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

#[test]
fn run_writes_requested_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["run", "fig2", "--samples", "2000", "--grid_size", "20", "--out", "res"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["fig2.csv", "fig2.json", "fig2.svg"] {
        assert!(dir.path().join("res").join(f).is_file(), "{f} missing");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("mimo-zf"));
}

#[test]
fn fig2_csv_has_three_ratios_per_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["run", "fig2", "--samples", "1000", "--grid_size", "10", "--format", "csv", "--out", "."]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "baseline,method,param_name,param_value,energy_w_per_hz,max_rate_bps_per_hz"
    );
    let mut curves = std::collections::BTreeSet::new();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 6);
        curves.insert((cols[0].to_string(), cols[1].to_string(), cols[3].to_string()));
    }
    for baseline in ["oam", "mimo-zf", "siso"] {
        let n = curves.iter().filter(|c| c.0 == baseline && c.1 == "monte-carlo").count();
        assert_eq!(n, 3, "{baseline}");
    }
    assert!(!dir.path().join("fig2.json").exists());
}

#[test]
fn json_echo_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "custom", "--samples", "1500", "--seed", "42", "--grid_size", "15", "--format", "json", "--out", "a"];
    assert_eq!(code(&cli(dir.path(), &args)), 0);
    let first = read_bundle_json(&dir.path().join("a/custom.json")).unwrap();
    assert_eq!(first.seed, 42);
    assert_eq!(first.config.samples, 1500);

    // the echoed config, written back as a config file, reproduces the curves
    let mut echo = first.config.clone();
    echo.out_dir = "b".into();
    std::fs::write(dir.path().join("echo.toml"), echo.to_config_text()).unwrap();
    assert_eq!(code(&cli(dir.path(), &["run", "custom", "--config", "echo.toml"])), 0);
    let second = read_bundle_json(&dir.path().join("b/custom.json")).unwrap();
    assert_eq!(first.curves, second.curves);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "samples = 800\ndistance_m = 10\nbaselines = [\"siso\"]\n").unwrap();
    let o = cli(
        dir.path(),
        &["run", "custom", "--config", "c.toml", "--distance_m", "15", "--format", "json", "--out", "."],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = read_bundle_json(&dir.path().join("custom.json")).unwrap();
    assert_eq!(b.config.distance_m, 15.0);
    assert_eq!(b.config.samples, 800);
    assert_eq!(b.curves.len(), 1);
}

#[test]
fn negative_dbm_values_parse() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(
        dir.path(),
        &["run", "custom", "--noise_dbm_per_hz", "-30", "--samples", "500", "--format", "json", "--out", "."],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = read_bundle_json(&dir.path().join("custom.json")).unwrap();
    assert_eq!(b.config.noise_dbm_per_hz, -30.0);
}

#[test]
fn config_errors_exit_2_with_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["run", "custom", "--radius_m", "-1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius_m"));

    std::fs::write(dir.path().join("bad.toml"), "distanse_m = 3\n").unwrap();
    let o = cli(dir.path(), &["run", "custom", "--config", "bad.toml"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("distanse_m"));

    assert_eq!(code(&cli(dir.path(), &["run", "fig9"])), 2);
    assert_eq!(code(&cli(dir.path(), &["run", "custom", "--bogus", "1"])), 2);
    assert_eq!(code(&cli(dir.path(), &["run", "custom", "--baselines", "mimo"])), 2);
    assert_eq!(code(&cli(dir.path(), &["run", "custom", "--format", "png"])), 2);
}

#[test]
fn model_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // a 1 MHz carrier makes the 0.1 m array electrically tiny, so ZF cannot invert it
    let o = cli(
        dir.path(),
        &["run", "custom", "--baselines", "mimo-zf", "--frequency_hz", "1e6", "--samples", "100", "--out", "."],
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ill-conditioned"));
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("file"), "").unwrap();
    let o = cli(dir.path(), &["run", "custom", "--samples", "100", "--out", "file/sub"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("file/sub"));
}

#[test]
fn config_command_prints_parseable_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["config", "fig5"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let parsed = oam_swipt::config::ScenarioConfig::from_str_for(oam_swipt::config::Scenario::Custom, &text).unwrap();
    assert_eq!(parsed, oam_swipt::config::ScenarioConfig::new(oam_swipt::config::Scenario::Fig5));
}
