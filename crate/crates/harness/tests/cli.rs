use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_farrow-sync"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("farrow-sync-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn design_writes_report_and_bank() {
    let out = scratch("design");
    let st = bin()
        .args(["design", "--config"])
        .arg(configs().join("design.toml"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = std::fs::read_to_string(out.join("design.csv")).unwrap();
    assert!(csv.starts_with("degree,order,omega_c,measured_minimax_error"));
    let bank = std::fs::read_to_string(out.join("bank_L4_N36.txt")).unwrap();
    assert!(bank.starts_with("4 36\n"));

    // measure the written bank from file
    let cfg = out.join("measure.toml");
    std::fs::write(&cfg, "experiment = \"measure\"\n[bank]\nfile = \"bank_L4_N36.txt\"\n").unwrap();
    let st = bin().args(["measure", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    let a: Vec<String> = csv.lines().map(String::from).collect();
    let b = std::fs::read_to_string(out.join("measure.csv")).unwrap();
    assert_eq!(a[1], b.lines().nth(1).unwrap());
}

#[test]
fn config_errors_exit_with_one() {
    let out = scratch("bad");
    let cfg = out.join("bad.toml");
    std::fs::write(&cfg, "experiment = \"table3\"\n[estimator]\nn = 2\n").unwrap();
    let st = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(1));
    let st = bin().args(["run", "--config"]).arg(out.join("missing.toml")).status().unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn failed_cells_exit_with_two() {
    let out = scratch("cells");
    let cfg = out.join("short.toml");
    // an impossible modulation order fails every trial
    std::fs::write(
        &cfg,
        "experiment = \"table3\"\ntrials = 2\n[signal]\nkind = \"multisine\"\nqam_order = 8\n",
    )
    .unwrap();
    let st = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let csv = std::fs::read_to_string(out.join("table3.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn seed_override_changes_output() {
    let out = scratch("seed");
    let cfg = out.join("t.toml");
    std::fs::write(&cfg, "experiment = \"table3\"\ntrials = 3\n").unwrap();
    let run = |seed: &str, dir: &str| {
        let d = out.join(dir);
        let st = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .args(["--seed", seed, "--out"])
            .arg(&d)
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read(d.join("table3.csv")).unwrap()
    };
    let a = run("5", "a");
    assert_eq!(a, run("5", "b"));
    assert_ne!(a, run("6", "c"));
}
