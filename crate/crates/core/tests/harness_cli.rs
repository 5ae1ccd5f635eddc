//! End-to-end checks of the sweep runner, result files and the binary.

use std::path::Path;
use std::process::{Command, Output};

use active_ris::harness::{run_sweep, write_realizations, write_results, ExperimentConfig, SweepVariable};
use active_ris::solver::Mode;

const SMALL_CONFIG: &str = r#"
schema_version = 1

[system]
num_antennas = 2
num_users = 2
num_elements = 8

[experiment]
seed = 5
realizations = 2
modes = ["practical_active", "passive"]
power_values_dbm = [6.0, 21.0]
position_values_m = [380.0, 420.0]
element_values = [4, 8]
"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_active-ris")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(&path, SMALL_CONFIG).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_experiment() -> ExperimentConfig {
    let mut exp = ExperimentConfig::default();
    exp.system.m = 2;
    exp.system.k = 2;
    exp.system.l = 8;
    exp.sweep_values = vec![6.0, 21.0];
    exp.realizations = 3;
    exp
}

#[test]
fn repeated_sweeps_are_bit_identical() {
    let mut exp = small_experiment();
    exp.realizations = 1;
    exp.modes = vec![Mode::PracticalActive, Mode::IdealActive];
    let a = run_sweep(&exp).unwrap();
    let b = run_sweep(&exp).unwrap();
    assert_eq!(a, b);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.sum_rate.map(f64::to_bits), y.sum_rate.map(f64::to_bits));
    }
}

#[test]
fn power_sweep_orders_and_passive_stays_low() {
    let mut exp = small_experiment();
    exp.system.l = 16;
    exp.realizations = 4;
    let res = run_sweep(&exp).unwrap();
    let practical = res.means(Mode::PracticalActive);
    assert!(practical[1] > practical[0], "{practical:?}");
    assert!(res.means(Mode::Passive).iter().all(|r| *r < 0.5));
    for s in &res.summaries {
        assert!(s.min_sum_rate <= s.mean_sum_rate && s.mean_sum_rate <= s.max_sum_rate);
    }
}

#[test]
fn summary_matches_per_realization_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = small_experiment();
    exp.sweep_variable = SweepVariable::UserCenterXM;
    exp.sweep_values = vec![380.0, 420.0];
    let res = run_sweep(&exp).unwrap();
    let summary = dir.path().join("summary.csv");
    let long = dir.path().join("long.csv");
    write_results(&res, &summary).unwrap();
    write_realizations(&res, &long).unwrap();

    let mut rows = csv::Reader::from_path(&long).unwrap();
    let mut table: Vec<(String, f64, f64)> = Vec::new();
    for r in rows.records() {
        let r = r.unwrap();
        assert_eq!(&r[1], "user_center_x_m");
        table.push((r[0].to_string(), r[2].parse().unwrap(), r[6].parse().unwrap()));
    }
    let mut sums = csv::Reader::from_path(&summary).unwrap();
    let header: Vec<String> = sums.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(
        header,
        ["mode", "sweep_variable", "sweep_value", "mean_sum_rate_bps_hz", "std_err", "n_realizations", "n_failed"]
    );
    let mut n_rows = 0;
    for r in sums.records() {
        let r = r.unwrap();
        n_rows += 1;
        let value: f64 = r[2].parse().unwrap();
        let xs: Vec<f64> = table.iter().filter(|t| t.0 == r[0] && t.1 == value).map(|t| t.2).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let got_mean: f64 = r[3].parse().unwrap();
        let got_se: f64 = r[4].parse().unwrap();
        assert!((got_mean - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        assert!((got_se - se).abs() <= 1e-12 * se.abs().max(1.0));
        assert_eq!(r[5].parse::<usize>().unwrap(), xs.len());
        assert_eq!(&r[6], "0");
    }
    assert_eq!(n_rows, exp.modes.len() * exp.sweep_values.len());
}

#[test]
fn single_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = bin(&["single-run", "--config", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    let runs = json["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert!(!runs[0]["trace"]["records"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_commands_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    for (cmd, variable) in [
        ("sweep-power", "p_bs_dbm"),
        ("sweep-position", "user_center_x_m"),
        ("sweep-elements", "num_elements"),
    ] {
        let out = dir.path().join(format!("{cmd}.csv"));
        let o = bin(&[cmd, "--config", &cfg, "--realizations", "1", "--mode", "passive", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3, "{text}");
        assert!(lines[1].starts_with(&format!("passive,{variable},")));
    }
    // Without --out the table goes to stdout, byte-identical across runs.
    let a = bin(&["sweep-power", "--config", &cfg, "--realizations", "1"]);
    let b = bin(&["sweep-power", "--config", &cfg, "--realizations", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("mode,sweep_variable,"));
}

#[test]
fn validate_subcommand_passes() {
    let o = bin(&["validate", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("[FAIL]"));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let o = bin(&["sweep-power", "--config", "/definitely/missing.toml"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/definitely/missing.toml"));

    let o = bin(&["sweep-power", "--no-such-flag"]);
    assert!(!o.status.success());
    assert!(!o.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[system]\nnum_elements = \"many\"\n").unwrap();
    let o = bin(&["single-run", "--config", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml"));

    let cfg = small_config(dir.path());
    let o = bin(&["sweep-power", "--config", &cfg, "--realizations", "1", "--mode", "passive", "--out", "/no/such/dir/out.csv"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/dir/out.csv"));

    let o = bin(&["sweep-power", "--mode", "imaginary"]);
    assert!(!o.status.success());
}
