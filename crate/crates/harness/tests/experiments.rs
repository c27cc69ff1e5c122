use std::path::Path;

use farrow_sync_harness::config::ExperimentConfig;
use farrow_sync_harness::run;

fn shipped(name: &str) -> ExperimentConfig {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"));
    ExperimentConfig::from_file(&p).unwrap()
}

#[test]
fn every_shipped_config_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            ExperimentConfig::from_file(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert_eq!(n, 10);
}

#[test]
fn opcounts_all_match() {
    let out = run(&shipped("opcounts"), false).unwrap();
    let t = out.table("opcounts").unwrap();
    assert_eq!(t.rows.len(), (3 + 3 + 1) * 5 * 2);
    for r in 0..t.rows.len() {
        assert_eq!(t.cell(r, "match"), Some("true"), "row {r}");
    }
}

#[test]
fn nsweep_accepts_the_shortest_window() {
    let mut cfg = shipped("nsweep");
    cfg.trials = 5;
    cfg.sweep.n_values = vec![3, 64, 1024];
    cfg.sweep.snr_db = vec![20.0];
    let out = run(&cfg, false).unwrap();
    assert_eq!(out.failed_cells, 0);
    let t = out.table("nsweep").unwrap();
    assert_eq!(t.rows.len(), 2 * 3 * 2);
    // (200 ppm, 0.03) at N = 1024 stays inside the delay range, no warning
    assert!(out.warnings.is_empty(), "{:?}", out.warnings);
}

#[test]
fn noiseless_spread_is_below_noisy_spread() {
    let mut cfg = shipped("nsweep");
    cfg.trials = 20;
    cfg.sweep.n_values = vec![256, 1024];
    cfg.sweep.snr_db = vec![20.0, f64::INFINITY];
    cfg.sweep.offsets = vec![[200.0, 0.03]];
    let out = run(&cfg, false).unwrap();
    let t = out.table("nsweep").unwrap();
    for n in ["256", "1024"] {
        for m in ["newton", "ils"] {
            let get = |snr: f64| {
                let r = t.find(&[("n", n), ("method", m), ("snr_db", &farrow_sync::metrics::fmt_f64(snr))]);
                t.value(r[0], "std_delta_ppm").unwrap()
            };
            assert!(get(f64::INFINITY) < get(20.0), "{m} N={n}");
        }
    }
}

#[test]
fn large_offsets_raise_a_warning() {
    let mut cfg = shipped("table3");
    cfg.trials = 2;
    cfg.sweep.snr_db = vec![30.0];
    cfg.sweep.delta_ppm = 600.0;
    let out = run(&cfg, false).unwrap();
    assert_eq!(out.warnings.len(), 1);
    let t = out.table("table3").unwrap();
    assert!(t.value(0, "d_exceeded_trials").unwrap() > 0.0);
}

#[test]
fn zero_offsets_without_noise_are_found() {
    let mut cfg = shipped("grid");
    cfg.trials = 3;
    cfg.sweep.snr_db = vec![f64::INFINITY];
    cfg.sweep.grid_points = 3;
    cfg.sweep.grid_min_ppm = -1.0;
    cfg.sweep.grid_max_ppm = 1.0;
    cfg.sweep.subgrid = Some(1);
    let out = run(&cfg, false).unwrap();
    let t = out.table("grid").unwrap();
    assert_eq!(t.rows.len(), 2);
    for r in 0..2 {
        assert_eq!(t.value(r, "delta_ppm"), Some(0.0));
        assert!(t.value(r, "sigma_delta_ppm").unwrap() < 0.1);
    }
}

#[test]
fn example1_has_joint_and_delta_only_rows() {
    let mut cfg = shipped("example1");
    cfg.trials = 4;
    let out = run(&cfg, false).unwrap();
    let t = out.table("example1").unwrap();
    assert_eq!(t.find(&[("mode", "joint")]).len(), 4);
    assert_eq!(t.find(&[("mode", "sfo_only")]).len(), 2);
}
