use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lrf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrf"))
        .args(args)
        .current_dir(dir)
        .env_remove("LRF_MEMORY_BUDGET_MB")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_dump_is_deterministic_with_header() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", "seed = 7\nparams.n = 1\nparams.alpha = 0.4\nsynth.shape = [1024]\n");
    for out in ["a", "b"] {
        let o = lrf(&["synth", "--config", &cfg, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a/field.bin")).unwrap();
    let b = fs::read(dir.path().join("b/field.bin")).unwrap();
    assert_eq!(a.len(), 1024 * 8);
    assert_eq!(a, b);
    let h = json(&dir.path().join("a/field.json"));
    assert_eq!(h["shape"], serde_json::json!([1024]));
    assert_eq!(h["alpha"], 0.4);
    assert_eq!(h["seed"], 7);
    assert_eq!(h["n"], 1);
    assert_eq!(h["dtype"], "f64-le");
    let first = f64::from_le_bytes(a[..8].try_into().unwrap());
    assert!(first.is_finite());
    assert!(dir.path().join("a/resolved_config.toml").exists());
}

#[test]
fn synth_rejects_alpha_outside_the_domain() {
    let dir = TempDir::new().unwrap();
    let o = lrf(&["synth", "--set", "params.alpha=1.5", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
    assert!(!dir.path().join("x/field.bin").exists());
}

#[test]
fn scaling_demo_has_ordered_interval() {
    let dir = TempDir::new().unwrap();
    let o = lrf(&["scaling", "--out", "demo", "--threads", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("demo");
    let r = json(&out.join("report.json"));
    let h = &r["hurst_estimate"];
    assert!(h.is_object());
    let (lo, est, hi) = (
        h["ci_low"].as_f64().unwrap(),
        h["estimate"].as_f64().unwrap(),
        h["ci_high"].as_f64().unwrap(),
    );
    assert!(lo <= est && est <= hi);
    assert_eq!(r["provenance"]["validity_mode"], "window");
    let csv = fs::read_to_string(out.join("cells.csv")).unwrap();
    assert!(csv.starts_with("r,t,replicate_count,mean,variance,stderr\r\n"));
    assert_eq!(csv.lines().count(), 1 + 5 * 4);
    let plot = fs::read_to_string(out.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 6);
    let fit = json(&out.join("plot_fit.json"));
    assert!((fit["slope"].as_f64().unwrap() / 2.0 - est).abs() < 1e-12);
    // the written config reproduces the run
    let again = lrf(
        &["scaling", "--config", out.join("resolved_config.toml").to_str().unwrap(), "--out", "again"],
        dir.path(),
    );
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(
        fs::read(out.join("cells.csv")).unwrap(),
        fs::read(dir.path().join("again/cells.csv")).unwrap()
    );
}

#[test]
fn scaling_validity_gates() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[params]\nalpha = 0.5\nbeta = 0.4\n[scaling]\nreplicates = 30\nradii = [32.0, 64.0, 128.0]\nt_grid = [1.0]\n",
    );
    let o = lrf(&["scaling", "--config", &cfg, "--validity-mode", "theorem", "--out", "t"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(0, (n - 2*beta)/kappa)"), "{}", stderr(&o));
    let o = lrf(&["scaling", "--config", &cfg, "--validity-mode", "window", "--out", "w"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&dir.path().join("w/report.json"));
    assert_eq!(r["provenance"]["validity_mode"], "window");
    assert_eq!(r["provenance"]["admissible_modes"], serde_json::json!(["window"]));
}

#[test]
fn scaling_with_limit_comparison() {
    let dir = TempDir::new().unwrap();
    let o = lrf(
        &[
            "scaling",
            "--set",
            "scaling.replicates=500",
            "--set",
            "scaling.radii=[64.0, 128.0, 256.0]",
            "--set",
            "scaling.t_grid=[0.5, 1.0]",
            "--set",
            "limit.count=500",
            "--out",
            "o",
            "--set",
            "scaling.compare_limit=true",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&dir.path().join("o/report.json"));
    let ks = r["ks_stats"].as_array().unwrap();
    assert_eq!(ks.len(), 2);
    for k in ks {
        assert!(k["ks_distance"].as_f64().unwrap() < k["critical_5pct"].as_f64().unwrap(), "{k}");
    }
}

#[test]
fn limit_sample_summary_and_determinism() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| {
        vec![
            "limit-sample",
            "--set",
            "limit.t_grid=[0.5, 1.0]",
            "--set",
            "limit.count=4000",
            "--seed",
            "3",
            "--out",
            out,
        ]
    };
    for out in ["a", "b"] {
        let o = lrf(&args(out), dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let s = json(&dir.path().join("a/summary.json"));
    for row in s["rows"].as_array().unwrap() {
        assert_eq!(row["within_3_stderr"], true, "{row}");
        assert_eq!(row["count"], 4000);
    }
    let a = fs::read(dir.path().join("a/samples.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/samples.csv")).unwrap());
    assert!(String::from_utf8_lossy(&a).starts_with("t,index,value\r\n"));
}

#[test]
fn limit_sample_rejects_rank_three() {
    let dir = TempDir::new().unwrap();
    let o = lrf(
        &["limit-sample", "--set", "params.kappa=3", "--set", "params.alpha=0.2", "--out", "x"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rank 3"), "{}", stderr(&o));
}

fn classes(dir: &Path, out: &str) -> Vec<(String, f64, String)> {
    let mut r = csv::Reader::from_path(dir.join(out).join("integrability.csv")).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[2].parse().unwrap(), rec[5].to_string())
        })
        .collect()
}

#[test]
fn integrability_sweeps() {
    let dir = TempDir::new().unwrap();
    let o = lrf(
        &[
            "integrability",
            "--set",
            "integrability.windows=[\"ball:2\"]",
            "--set",
            "integrability.exponents=[2.5, 3.0, 3.2, -0.1]",
            "--out",
            "ball",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let got: Vec<String> = classes(dir.path(), "ball").into_iter().map(|c| c.2).collect();
    assert_eq!(got, ["convergent", "boundary", "divergent-at-infinity", "divergent-at-origin"]);

    let cfg = write_config(
        dir.path(),
        "i.toml",
        "integrability.windows = [\"interval\"]\nintegrability.exponents = [0.5, 1.9]\n",
    );
    let o = lrf(&["integrability", "--config", &cfg, "--out", "line"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for (w, _, c) in classes(dir.path(), "line") {
        assert_eq!((w.as_str(), c.as_str()), ("interval", "convergent"));
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    // unknown key
    let cfg = write_config(dir.path(), "bad.toml", "params.alpah = 0.4\n");
    let o = lrf(&["synth", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpah"));
    // missing config file
    let o = lrf(&["synth", "--config", "nope.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("nope.toml"));
    // output path is a file
    fs::write(dir.path().join("taken"), "x").unwrap();
    let o = lrf(&["synth", "--out", "taken"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    // precision not reached
    let o = lrf(
        &[
            "limit-sample",
            "--set",
            "limit.mc_samples=1000",
            "--set",
            "limit.mc_rel_tol=1e-6",
            "--set",
            "limit.count=100",
            "--out",
            "p",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    // memory budget from the environment
    let o = Command::new(env!("CARGO_BIN_EXE_lrf"))
        .args(["scaling", "--out", "m", "--set", "scaling.radii=[1e5, 1e6, 1e7]"])
        .current_dir(dir.path())
        .env("LRF_MEMORY_BUDGET_MB", "16")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radius 10000000"), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_lrf"))
        .args(["synth", "--out", "m"])
        .current_dir(dir.path())
        .env("LRF_MEMORY_BUDGET_MB", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    // clap usage errors
    let o = lrf(&["scaling", "--validity-mode", "loose"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
