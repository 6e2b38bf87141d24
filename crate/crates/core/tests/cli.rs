use std::path::Path;
use std::process::{Command, Output};

use weyl_lab::cli_io::{parse_rows_csv, Manifest, ResultRecord, CSV_HEADER, EXIT_NOT_ACHIEVED, OUT_DIR_ENV};

const SWEEP: &str =
    "scenario = \"step\"\nseed = 3\n[grid]\nN = 61\nL = 30.0\n[energy_window]\nalpha = 0.3\nbeta = 0.7\n\
[sweep]\ncomponent = \"x_plus\"\noffsets = [0.0, 2.0, 4.0]\n[propagation]\nrandom_states = 4\n[times]\ncount = 5\n";

fn weyl_lab(args: &[&str], cwd: &Path, env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_weyl-lab"));
    cmd.args(args).current_dir(cwd).env_remove(OUT_DIR_ENV);
    if let Some(p) = env_out {
        cmd.env(OUT_DIR_ENV, p);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn env_out_applies_only_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "scenario = \"constant\"\n[grid]\nN = 31\nL = 20.0\n",
    );
    let env_dir = dir.path().join("from_env");
    let flag_dir = dir.path().join("from_flag");

    let o = weyl_lab(&["spectrum", "--quiet", "--config", &cfg], dir.path(), Some(&env_dir));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.join("spectrum.csv").exists());

    let before = std::fs::read_dir(&env_dir).unwrap().count();
    let flag = flag_dir.to_string_lossy().into_owned();
    let o = weyl_lab(
        &["spectrum", "--quiet", "--config", &cfg, "--out", &flag],
        dir.path(),
        Some(&env_dir),
    );
    assert!(o.status.success());
    assert!(flag_dir.join("spectrum.csv").exists());
    assert_eq!(std::fs::read_dir(&env_dir).unwrap().count(), before);

    let o = weyl_lab(&["spectrum", "--quiet", "--config", &cfg], dir.path(), None);
    assert!(o.status.success());
    assert!(dir.path().join("results").join("spectrum.manifest.json").exists());
}

#[test]
fn validate_lists_every_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "scenario = \"nowhere\"\n[grid]\nN = 40\nL = -1.0\n[energy_window]\nalpha = 2.0\nbeta = 1.0\n",
    );
    let o = weyl_lab(&["validate", "--config", &cfg], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for field in ["scenario", "grid.N", "grid.L", "energy_window"] {
        assert!(err.contains(field), "missing {field} in {err}");
    }

    let good = write_config(dir.path(), "good.toml", SWEEP);
    let o = weyl_lab(&["validate", "--config", &good], dir.path(), None);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("mollifier"));
}

#[test]
fn missing_config_and_unknown_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = weyl_lab(&["spectrum"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    let o = weyl_lab(&["spectrum", "--config", "absent.toml"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    let cfg = write_config(
        dir.path(),
        "x.toml",
        "scenario = \"step\"\ncolour = 1\n[grid]\nN = 31\nL = 20.0\n",
    );
    let o = weyl_lab(&["validate", "--config", &cfg], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_exit_status_reflects_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out").to_string_lossy().into_owned();
    let reached = write_config(dir.path(), "r.toml", &format!("{SWEEP}[tolerances]\nepsilon = 0.99\n"));
    let o = weyl_lab(
        &["sweep", "--quiet", "--config", &reached, "--out", &out],
        dir.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let missed = write_config(dir.path(), "m.toml", &format!("{SWEEP}[tolerances]\nepsilon = 1e-12\n"));
    let o = weyl_lab(
        &["sweep", "--quiet", "--config", &missed, "--out", &out],
        dir.path(),
        None,
    );
    assert_eq!(o.status.code(), Some(EXIT_NOT_ACHIEVED));
}

#[test]
fn csv_and_json_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SWEEP);
    let out = dir.path().join("out");
    let o = weyl_lab(
        &[
            "sweep",
            "--quiet",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "9",
        ],
        dir.path(),
        None,
    );
    assert!(o.status.code() == Some(0) || o.status.code() == Some(EXIT_NOT_ACHIEVED));
    let o = weyl_lab(
        &[
            "sweep",
            "--quiet",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "9",
            "--format",
            "json",
        ],
        dir.path(),
        None,
    );
    assert!(o.status.code() == Some(0) || o.status.code() == Some(EXIT_NOT_ACHIEVED));

    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = parse_rows_csv(csv.as_bytes()).unwrap();
    let record: ResultRecord = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rows, record.rows);
    assert_eq!(record.config.seed, 9);
    assert!(record.normalizations.iter().any(|n| n.contains("seed")));

    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(out.join("sweep.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.config_hash, record.config_hash);
    assert_eq!(manifest.version, record.version);
    assert!(manifest.files.iter().any(|f| f.file == "sweep.json"));
}
