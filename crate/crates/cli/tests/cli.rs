//! End-to-end runs of the `isopurity` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn isopurity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isopurity")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = isopurity(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn csv_column(path: &Path, column: &str) -> Vec<f64> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let idx = reader.headers().unwrap().iter().position(|h| h == column).unwrap();
    reader.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn theory_examples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.json");
    ok(&["theory", "--beta", "0", "--quantity", "a,c", "--out", p(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap(), "{\n  \"a\": 4,\n  \"c\": 1\n}\n");
    ok(&["theory", "--beta", "2", "--quantity", "r", "--out", p(&out)]);
    assert_eq!(json(&out), serde_json::json!({"r": 1.25}));
    assert!(dir.path().join("t.manifest.json").exists());

    let bad = isopurity(&["theory", "--beta", "-1", "--out", p(&out)]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("beta below beta_minus=-2/27"));

    ok(&["theory", "--beta", "-1", "--allow-below-critical", "--quantity", "r", "--out", p(&out)]);
    assert_eq!(json(&out), serde_json::json!({"r": null}));

    let no_lambda = isopurity(&["theory", "--beta", "1", "--quantity", "density", "--out", p(&out)]);
    assert_eq!(no_lambda.status.code(), Some(2));
    ok(&["theory", "--beta", "0", "--quantity", "density", "--lambda", "2", "--out", p(&out)]);
    let d = json(&out)["density"].as_f64().unwrap();
    assert!((d - 0.5 / std::f64::consts::PI).abs() < 1e-15);

    let unbalanced = isopurity(&["theory", "--beta", "1", "--mu", "1/2", "--out", p(&out)]);
    assert_eq!(unbalanced.status.code(), Some(2));
}

#[test]
fn sweep_examples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    ok(&["sweep", "--beta-min", "-0.074", "--beta-max", "4", "--steps", "200", "--out", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("beta,phase,a,b_or_c,r,G,s_rel\n"));
    assert!(!text.contains('\r'));
    let r = csv_column(&out, "r");
    assert_eq!(r.len(), 200);
    assert!(r.windows(2).all(|w| w[1] < w[0]));
    let betas = csv_column(&out, "beta");
    assert_eq!((betas[0], betas[199]), (-0.074, 4.0));

    ok(&["sweep", "--beta-min", "0", "--beta-max", "4", "--steps", "5", "--out", p(&out)]);
    let betas = csv_column(&out, "beta");
    let r = csv_column(&out, "r");
    assert_eq!(betas, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    assert_eq!(r[2], 1.25);
    assert!(fs::read_to_string(&out).unwrap().contains(",semicircle,"));

    ok(&["sweep", "--beta-min", "0.5", "--beta-max", "3", "--steps", "1", "--out", p(&out)]);
    assert_eq!(csv_column(&out, "beta"), vec![0.5]);

    let bad = isopurity(&["sweep", "--beta-min", "-0.1", "--beta-max", "1", "--steps", "3", "--out", p(&out)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn haar_examples() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().join("h");
    ok(&["haar", "--n", "32", "--m", "32", "--samples", "20000", "--seed", "5", "--chains", "4", "--out-dir", p(&d)]);
    let mean = json(&d.join("summary.json"))["mean"].as_f64().unwrap();
    assert!((mean / 0.0625 - 1.0).abs() < 0.05, "{mean}");
    assert_eq!(csv_column(&d.join("purity.csv"), "purity").len(), 20000);
    assert!(!d.join("spectra.csv").exists());

    let u = dir.path().join("u");
    ok(&["haar", "--n", "16", "--m", "32", "--samples", "20000", "--seed", "5", "--chains", "4", "--out-dir", p(&u)]);
    let mean = json(&u.join("summary.json"))["mean"].as_f64().unwrap();
    assert!((mean / (3.0 / 32.0) - 1.0).abs() < 0.05, "{mean}");

    let s = dir.path().join("s");
    ok(&["haar", "--n", "3", "--m", "5", "--samples", "7", "--emit", "spectra", "--out-dir", p(&s)]);
    assert!(!s.join("purity.csv").exists());
    let text = fs::read_to_string(s.join("spectra.csv")).unwrap();
    assert!(text.starts_with("sample_id,index,value\n"));
    assert_eq!(text.lines().count(), 1 + 7 * 3);

    let bad = isopurity(&["haar", "--n", "4", "--m", "3", "--samples", "10", "--out-dir", p(&s)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn haar_output_independent_of_thread_count() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str, sub: &str| -> PathBuf {
        let d = dir.path().join(sub);
        let out = Command::new(env!("CARGO_BIN_EXE_isopurity"))
            .env("ISOPURITY_THREADS", threads)
            .args([
                "haar",
                "--n",
                "6",
                "--samples",
                "500",
                "--seed",
                "9",
                "--chains",
                "3",
                "--emit",
                "both",
                "--out-dir",
            ])
            .arg(&d)
            .output()
            .unwrap();
        assert!(out.status.success());
        d
    };
    let (a, b) = (run("1", "a"), run("3", "b"));
    for f in ["purity.csv", "spectra.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_isopurity"))
        .env("ISOPURITY_THREADS", "zero")
        .args(["haar", "--n", "2", "--samples", "2", "--out-dir"])
        .arg(dir.path().join("c"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn mcmc_and_compare() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m");
    ok(&[
        "mcmc",
        "--n",
        "64",
        "--beta",
        "2",
        "--sweeps",
        "20000",
        "--burn-in",
        "2000",
        "--seed",
        "4",
        "--out-dir",
        p(&m),
    ]);
    let diag = json(&m.join("diagnostics.json"));
    let mean = diag["pooled"]["mean_n_purity"].as_f64().unwrap();
    assert!((mean / 1.25 - 1.0).abs() < 0.03, "{mean}");
    assert_eq!(diag["pooled"]["evaporated"], Value::Bool(false));
    assert_eq!(csv_column(&m.join("chain_0.csv"), "purity").len(), 18000);

    let c = dir.path().join("c.json");
    ok(&["compare", "--spectra", p(&m.join("spectra.csv")), "--beta", "2", "--out", p(&c)]);
    let cmp = json(&c);
    assert!(cmp["l1"].as_f64().unwrap() < 0.07, "{cmp}");
    assert_eq!(cmp["bins"], 160);
    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert!(hist.starts_with("bin_left,bin_right,density,analytic_midpoint\n"));
    assert_eq!(hist.lines().count(), 161);
}

#[test]
fn negative_beta_warns() {
    let dir = TempDir::new().unwrap();
    let out = ok(&[
        "mcmc",
        "--n",
        "8",
        "--beta",
        "-0.037",
        "--sweeps",
        "300",
        "--burn-in",
        "100",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("metastable branch; evaporation monitored"));
    let bad = isopurity(&[
        "mcmc",
        "--n",
        "8",
        "--beta",
        "1",
        "--sweeps",
        "10",
        "--burn-in",
        "10",
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(bad.status.code(), Some(2));
    let bad =
        isopurity(&["mcmc", "--n", "1", "--beta", "1", "--sweeps", "10", "--burn-in", "1", "--out-dir", p(dir.path())]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn haar_spectra_match_infinite_temperature_density() {
    let dir = TempDir::new().unwrap();
    let h = dir.path().join("h");
    ok(&[
        "haar",
        "--n",
        "64",
        "--samples",
        "8000",
        "--seed",
        "11",
        "--chains",
        "4",
        "--emit",
        "spectra",
        "--out-dir",
        p(&h),
    ]);
    let c = dir.path().join("c.json");
    ok(&["compare", "--spectra", p(&h.join("spectra.csv")), "--beta", "0", "--bins", "320", "--out", p(&c)]);
    let l1 = json(&c)["l1"].as_f64().unwrap();
    assert!(l1 < 0.05, "{l1}");
}

#[test]
fn compare_rejects_bad_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.json");
    for (name, body) in [
        ("empty.csv", ""),
        ("header_only.csv", "sample_id,index,value\n"),
        ("wrong_header.csv", "id,i,v\n0,0,1\n"),
        ("not_simplex.csv", "sample_id,index,value\n0,0,0.5\n"),
    ] {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let res = isopurity(&["compare", "--spectra", p(&path), "--beta", "0", "--out", p(&out)]);
        assert_eq!(res.status.code(), Some(2), "{name}");
    }
    let missing = isopurity(&["compare", "--spectra", "/nonexistent/spectra.csv", "--beta", "0", "--out", p(&out)]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn replay_reproduces_every_command() {
    let dir = TempDir::new().unwrap();
    let base = dir.path();
    let spectra_dir = base.join("haar");
    ok(&[
        "haar",
        "--n",
        "5",
        "--m",
        "7",
        "--samples",
        "200",
        "--seed",
        "3",
        "--chains",
        "2",
        "--emit",
        "both",
        "--out-dir",
        p(&spectra_dir),
    ]);
    ok(&[
        "mcmc",
        "--n",
        "6",
        "--beta",
        "3",
        "--sweeps",
        "600",
        "--burn-in",
        "100",
        "--thin",
        "5",
        "--chains",
        "2",
        "--init",
        "haar-draw",
        "--out-dir",
        p(&base.join("mcmc")),
    ]);
    ok(&["theory", "--beta", "0.7", "--lambda", "1", "--out", p(&base.join("theory/t.json"))]);
    ok(&["sweep", "--beta-min", "0", "--beta-max", "5", "--steps", "11", "--out", p(&base.join("sweep/s.csv"))]);
    ok(&[
        "compare",
        "--spectra",
        p(&spectra_dir.join("spectra.csv")),
        "--beta",
        "0",
        "--bins",
        "20",
        "--out",
        p(&base.join("cmp/c.json")),
    ]);

    for manifest in [
        "haar/manifest.json",
        "mcmc/manifest.json",
        "theory/t.manifest.json",
        "sweep/s.manifest.json",
        "cmp/c.manifest.json",
    ] {
        let target = base.join("replay").join(manifest.replace('/', "_"));
        ok(&["replay", "--manifest", p(&base.join(manifest)), "--out-dir", p(&target)]);
        let recorded = json(&base.join(manifest));
        let outputs = recorded["outputs"].as_array().unwrap();
        assert!(!outputs.is_empty());
        let original_dir = base.join(manifest).parent().unwrap().to_path_buf();
        for file in outputs {
            let name = file["path"].as_str().unwrap();
            assert_eq!(
                fs::read(original_dir.join(name)).unwrap(),
                fs::read(target.join(name)).unwrap(),
                "{manifest}: {name}"
            );
        }
    }

    // A tampered output is reported as a mismatch.
    let manifest = base.join("sweep/s.manifest.json");
    let mut m = json(&manifest);
    m["outputs"][0]["sha256"] = Value::String("0".repeat(64));
    fs::write(&manifest, serde_json::to_string(&m).unwrap()).unwrap();
    let res = isopurity(&["replay", "--manifest", p(&manifest), "--out-dir", p(&base.join("tampered"))]);
    assert_eq!(res.status.code(), Some(3));
}
