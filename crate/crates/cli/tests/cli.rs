use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const HEADER: &str = "model,n,param,k_mean,rR_AAT,rC_AAT,rC_A,rR_AAT_norm,rC_AAT_norm,rC_A_norm,lmin_mean,lmin_meansq,lmin_moment_ratio,samples";

fn svslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svslab"))
        .current_dir(dir)
        .env_remove("SVSLAB_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = svslab(dir, args);
    assert!(
        out.status.success(),
        "svslab {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr_of(dir: &Path, args: &[&str]) -> String {
    let out = svslab(dir, args);
    assert!(!out.status.success(), "svslab {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sweep_writes_one_row_per_point_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--model", "derg", "--n", "100", "--p-grid", "log:1e-4:1:20", "--realizations", "100",
        "--seed", "7",
    ];
    let mut first = args.to_vec();
    first.extend(["--workers", "1", "--name", "a"]);
    ok(dir.path(), &first);
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER);
    let table = rows(&dir.path().join("a.csv"));
    assert_eq!(table.len(), 20);
    for row in &table {
        assert_eq!(row.len(), 14);
        assert_eq!(row[0], "derg");
        assert_eq!(row[13], "100");
        assert!(row[4..13].iter().all(|c| c.parse::<f64>().is_ok()), "{row:?}");
    }
    assert_eq!(table[0][2].parse::<f64>().unwrap(), 1e-4);
    assert_eq!(table[19][2].parse::<f64>().unwrap(), 1.0);

    let mut second = args.to_vec();
    second.extend(["--workers", "3", "--name", "b"]);
    ok(dir.path(), &second);
    assert_eq!(text, fs::read_to_string(dir.path().join("b.csv")).unwrap());

    let doc = json(&dir.path().join("a.run.json"));
    assert_eq!(doc["request"]["command"], "sweep");
    assert_eq!(doc["request"]["master_seed"], 7);
    assert_eq!(doc["constants"]["rR_RGERGET"], 0.531);
}

#[test]
fn invalid_grid_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let err = stderr_of(dir.path(), &["sweep", "--model", "derg", "--n", "50", "--p-grid", "log:0:1:5"]);
    assert!(err.contains("--p-grid"), "{err}");
    let err = stderr_of(dir.path(), &["sweep", "--model", "derg", "--n", "50", "--p-grid", "lin:0.1:2:5"]);
    assert!(err.contains("--p-grid"), "{err}");
    let err = stderr_of(dir.path(), &["sweep", "--model", "drrg", "--n", "50", "--rho-grid", "abc"]);
    assert!(err.contains("--rho-grid"), "{err}");
    let err = stderr_of(dir.path(), &["sweep", "--model", "drrg", "--n", "50", "--p-grid", "0.1"]);
    assert!(err.contains("--p-grid"), "{err}");
    let err = stderr_of(dir.path(), &["sweep", "--model", "erdos", "--n", "50"]);
    assert!(err.contains("--model"), "{err}");
    let err = stderr_of(dir.path(), &["sweep", "--model", "pe", "--n", "50", "--stats", "rX"]);
    assert!(err.contains("--stats"), "{err}");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn preset_supplies_sizes_grid_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["--preset", "desk-fig4", "--name", "p", "sweep", "--model", "drrg", "--ratios", "400"],
    );
    let table = rows(&dir.path().join("p.csv"));
    assert_eq!(table.len(), 40);
    // desk-fig4 measures only lambda_min; the ratio columns stay empty.
    assert!(table.iter().all(|r| r[4].is_empty() && !r[12].is_empty()));
    let samples: Vec<&str> = table.iter().map(|r| r[13].as_str()).collect();
    assert_eq!(samples[0], "4");
    assert_eq!(samples[39], "2");
    let err = stderr_of(dir.path(), &["--preset", "paper-fig9", "sweep", "--model", "drrg"]);
    assert!(err.contains("--preset") && err.contains("desk-fig1"), "{err}");
}

#[test]
fn flags_override_config_which_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "preset = \"desk-fig1\"\nmodel = \"derg\"\nn = [20, 30]\np_grid = \"lin:0.1:0.5:3\"\nrealizations = 5\nseed = 3\nstats = [\"rR_AAT\"]\nname = \"cfg\"\n",
    )
    .unwrap();
    ok(dir.path(), &["--config", "run.toml", "sweep", "--realizations", "7"]);
    let table = rows(&dir.path().join("cfg.csv"));
    assert_eq!(table.len(), 6);
    assert!(table.iter().all(|r| r[13] == "7" && !r[4].is_empty() && r[5].is_empty()));
    assert_eq!(json(&dir.path().join("cfg.run.json"))["request"]["master_seed"], 3);

    ok(dir.path(), &["--config", "run.toml", "--name", "flag", "sweep", "--n", "25", "--seed", "9"]);
    let table = rows(&dir.path().join("flag.csv"));
    assert_eq!(table.len(), 3);
    assert!(table.iter().all(|r| r[1] == "25" && r[13] == "5"));

    fs::write(dir.path().join("bad.toml"), "modle = \"derg\"\n").unwrap();
    let err = stderr_of(dir.path(), &["--config", "bad.toml", "sweep"]);
    assert!(err.contains("bad.toml"), "{err}");
}

#[test]
fn calibrate_warns_for_small_graphs_and_feeds_refs() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["--name", "c", "calibrate", "--n", "10", "--realizations", "50", "--seed", "2"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let constants = json(&dir.path().join("c.json"));
    assert_eq!(constants["small_n_warning"], true);
    assert_eq!(constants["n"], 10);
    assert!(constants["std_errors"]["rC_RGE"].as_f64().unwrap() > 0.0);
    let pe = constants["constants"]["rR_PEPET"].as_f64().unwrap();
    let rge = constants["constants"]["rR_RGERGET"].as_f64().unwrap();

    ok(
        dir.path(),
        &["--refs", "c.json", "--name", "s", "sweep", "--model", "rge", "--n", "12", "--realizations", "6", "--stats", "rR_AAT"],
    );
    let row = &rows(&dir.path().join("s.csv"))[0];
    let raw: f64 = row[4].parse().unwrap();
    let norm: f64 = row[7].parse().unwrap();
    assert!((norm - (raw - pe) / (rge - pe)).abs() < 1e-12);
    assert_eq!(json(&dir.path().join("s.run.json"))["constants"]["rR_PEPET"].as_f64().unwrap(), pe);

    let out = ok(dir.path(), &["--name", "big", "calibrate", "--n", "60", "--realizations", "4"]);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(json(&dir.path().join("big.json"))["small_n_warning"], false);

    fs::write(dir.path().join("bad.json"), r#"{"rR_PEPET": 0.6, "rR_RGERGET": 0.5, "rC_PE": 0.5, "rC_PEPET": 0.5, "rC_RGE": 0.7, "rC_RGERGET": 0.6}"#).unwrap();
    let err = stderr_of(dir.path(), &["--refs", "bad.json", "sweep", "--model", "pe", "--n", "10"]);
    assert!(err.contains("--refs"), "{err}");
}

#[test]
fn histograms_carry_overlays() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "--name", "h", "hist", "--model", "derg", "--n", "40", "--p", "0.3", "--stat", "rR_AAT,rC_A,lmin",
            "--realizations", "30", "--bins", "25",
        ],
    );
    let head = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(head("h-rR_AAT.csv"), "bin_center,density,pdf_pe,pdf_goe");
    assert_eq!(head("h-rC_A.csv"), "bin_center,density");
    assert_eq!(head("h-lmin.csv"), "bin_center,density,pdf_pe_exp");
    assert_eq!(rows(&dir.path().join("h-rR_AAT.csv")).len(), 25);
    let widths: Vec<f64> = rows(&dir.path().join("h-rR_AAT.csv")).iter().map(|r| r[1].parse::<f64>().unwrap()).collect();
    assert!((widths.iter().sum::<f64>() / 25.0 - 1.0).abs() < 1e-12);

    let err = stderr_of(dir.path(), &["hist", "--model", "derg", "--n", "40", "--rho", "0.3"]);
    assert!(err.contains("--rho"), "{err}");
    let err = stderr_of(dir.path(), &["hist", "--model", "derg", "--n", "40", "--target-rbar", "1.5"]);
    assert!(err.contains("--target-rbar"), "{err}");
}

#[test]
fn locate_writes_its_search_path() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "--name", "l", "locate", "--model", "drrg", "--n", "30", "--target", "0.5", "--tolerance", "0.1",
            "--realizations", "40",
        ],
    );
    let steps = rows(&dir.path().join("l.csv"));
    assert!(!steps.is_empty());
    let doc = json(&dir.path().join("l.run.json"));
    assert_eq!(doc["output"]["kind"], "locate");
    let last = steps.last().unwrap();
    assert_eq!(last[0].parse::<f64>().unwrap(), doc["output"]["param"].as_f64().unwrap());
    let err = stderr_of(dir.path(), &["locate", "--model", "drrg", "--n", "30", "--target", "0.5", "--bracket", "1"]);
    assert!(err.contains("--bracket"), "{err}");
}

#[test]
fn output_directory_and_format() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sweep", "--model", "pe", "--n", "10", "--realizations", "3"];

    let mut csv_only = vec!["--format", "csv", "--out-dir", "nested/out", "--name", "x"];
    csv_only.extend(base);
    ok(dir.path(), &csv_only);
    assert!(dir.path().join("nested/out/x.csv").exists());
    assert!(!dir.path().join("nested/out/x.run.json").exists());

    let out = Command::new(env!("CARGO_BIN_EXE_svslab"))
        .current_dir(dir.path())
        .env("SVSLAB_OUT_DIR", "from-env")
        .args(["--format", "json", "--name", "y"])
        .args(base)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/y.run.json").exists());
    assert!(!dir.path().join("from-env/y.csv").exists());

    fs::write(dir.path().join("blocker"), "").unwrap();
    let mut blocked = vec!["--out-dir", "blocker/sub"];
    blocked.extend(base);
    let err = stderr_of(dir.path(), &blocked);
    assert!(err.contains("blocker"), "{err}");
}

#[test]
fn replay_reproduces_a_run() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["--name", "orig", "sweep", "--model", "drrg", "--n", "20", "--rho-grid", "0.5,1", "--realizations", "8"],
    );
    let out = ok(dir.path(), &["--workers", "2", "replay", "orig.run.json", "--check"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("matches"));
    assert_eq!(
        fs::read_to_string(dir.path().join("orig.csv")).unwrap(),
        fs::read_to_string(dir.path().join("orig-replay.csv")).unwrap()
    );

    let mut doc = json(&dir.path().join("orig.run.json"));
    doc["output"]["points"][0]["rR_AAT"]["mean"] = Value::from(0.123);
    fs::write(dir.path().join("tampered.json"), doc.to_string()).unwrap();
    let err = stderr_of(dir.path(), &["replay", "tampered.json", "--check"]);
    assert!(err.contains("differs"), "{err}");

    fs::write(dir.path().join("junk.json"), "{}").unwrap();
    let err = stderr_of(dir.path(), &["replay", "junk.json"]);
    assert!(err.contains("run document"), "{err}");
}
