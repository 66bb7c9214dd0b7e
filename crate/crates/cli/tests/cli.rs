use std::path::Path;
use std::process::{Command, Output};

fn measq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_measq")).args(args).current_dir(dir).env_remove("MEASQ_THREADS").output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let j = lines.next().unwrap().split(',').position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = measq(&[], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let all = text(&out.stdout) + &text(&out.stderr);
    assert!(all.contains("Usage: measq"), "{all}");
    for sub in ["ctap-run", "ctap-sweep", "qpc-loss", "tls-run", "classical-mc", "collide", "qbm-moments", "wigner-sweep", "validity"] {
        assert!(all.contains(sub), "{sub} missing from usage");
    }
}

#[test]
fn unknown_keys_exit_2_and_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = measq(&["ctap-run", "--bogus-key", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("--bogus-key"));

    std::fs::write(dir.path().join("run.cfg"), "period = 40\nfrobnicate = 3\n").unwrap();
    let out = measq(&["ctap-run", "--config", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("'frobnicate'"), "{}", text(&out.stderr));
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["ctap-run", "--n-dots", "4"][..], &["ctap-run", "--dt", "abc"], &["ctap-run", "--pulses", "square"], &["ctap-run", "--dt", "0.5"]] {
        let out = measq(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", text(&out.stderr));
    }
}

#[test]
fn help_prints_every_schema_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = measq(&["tls-run", "--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let help = text(&out.stdout);
    for key in ["--n-dots", "--chi", "--omega", "--memory-budget", "--config", "--out", "[default: 0.15]"] {
        assert!(help.contains(key), "{key} missing:\n{help}");
    }
}

#[test]
fn ctap_run_defaults_reach_the_figure_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let out = measq(&["ctap-run", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run/ctap-run.csv")).unwrap();
    assert!(csv.starts_with("t,omega_p,omega_s,pop_1,pop_2,pop_3,pop_4,pop_5,fidelity\r\n"));
    let f = *column(&csv, "fidelity").last().unwrap();
    assert!((f - 0.998).abs() <= 0.002, "{f}");

    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/ctap-run.json")).unwrap()).unwrap();
    let obj = side.as_object().unwrap();
    assert!(obj.values().all(|v| !v.is_object()), "sidecar must be flat");
    assert!(obj.keys().all(|k| k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')));
    for key in ["subcommand", "measq_version", "wall_time_s", "period", "pulses", "dt", "n_dots", "final_fidelity"] {
        assert!(obj.contains_key(key), "{key}");
    }
    assert_eq!(obj["period"], 60.0);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# shorter pulses\nperiod = 40\nrecord-every = 100\n").unwrap();
    let out = measq(&["ctap-run", "--config", "run.cfg", "--out", "a"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let f40 = *column(&std::fs::read_to_string(dir.path().join("a/ctap-run.csv")).unwrap(), "fidelity").last().unwrap();
    assert!((f40 - 0.973).abs() <= 0.002, "{f40}");
    let out = measq(&["ctap-run", "--config", "run.cfg", "--period", "60", "--out", "b"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let f60 = *column(&std::fs::read_to_string(dir.path().join("b/ctap-run.csv")).unwrap(), "fidelity").last().unwrap();
    assert!((f60 - 0.998).abs() <= 0.002, "{f60}");
}

#[test]
fn validity_reports_violations_with_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = measq(&["validity", "--n-g", "10", "--m-g", "1", "--temperature", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = text(&out.stdout);
    assert!(report.contains("violated:") && report.contains("high_temperature_low_density"), "{report}");
    let csv = std::fs::read_to_string(dir.path().join("measq-out/validity.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("high_temperature_low_density,") && l.ends_with(",false")));
}

#[test]
fn seeded_runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, out: &str, threads: &str| {
        let args = [sub, "--out", out, "--seed", "7"];
        let o = Command::new(env!("CARGO_BIN_EXE_measq")).args(args).current_dir(dir.path()).env("MEASQ_THREADS", threads).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
        std::fs::read(dir.path().join(out).join(format!("{sub}.csv"))).unwrap()
    };
    for sub in ["classical-mc", "wigner-sweep"] {
        let a = run(sub, "a", "1");
        let b = run(sub, "b", "1");
        let c = run(sub, "c", "3");
        assert_eq!(a, b, "{sub}: repeated run differs");
        assert_eq!(a, c, "{sub}: thread count changes the output");
    }
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_measq")).args(["validity"]).current_dir(dir.path()).env("MEASQ_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("MEASQ_THREADS"));
}

#[test]
fn every_subcommand_runs_on_a_small_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 9] = [
        &["ctap-run", "--period", "20", "--n-dots", "3"],
        &["ctap-sweep", "--periods", "20,40", "--n-dots", "3"],
        &["qpc-loss", "--n-dots", "3", "--periods", "150"],
        &["tls-run", "--n-dots", "3", "--omega", "0", "--period", "60"],
        &["classical-mc", "--trajectories", "200"],
        &["collide", "--observable", "momentum", "--n-x", "201", "--n-p", "41"],
        &["qbm-moments", "--n-times", "5"],
        &["wigner-sweep", "--temperatures", "0.5", "--samples", "100"],
        &["validity"],
    ];
    for args in cases {
        let out = measq(&[args, &["--out", "all"]].concat(), dir.path());
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", text(&out.stderr));
        let csv = std::fs::read_to_string(dir.path().join("all").join(format!("{}.csv", args[0]))).unwrap();
        let mut lines = csv.split("\r\n").filter(|l| !l.is_empty());
        let width = lines.next().unwrap().split(',').count();
        assert!(lines.all(|l| l.split(',').count() == width || l.contains('"')), "{}", args[0]);
    }
}
