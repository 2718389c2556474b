use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hoszp::synth::smooth_field;
use hoszp::{deserialize, DType};
use serde_json::Value;

/// Stream size for the 500x500x100 smooth f32 field (seed 0) at eps 1e-2,
/// block length 32. Locked when the format was frozen; any change here is a
/// format or codec change.
const SMOOTH_500_BYTES: u64 = 15_906_546;
const SMOOTH_500_CR: f64 = 6.2867199453608595;

fn hoszp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoszp")).args(args).output().expect("binary runs")
}

/// Splits a command line on whitespace; temp paths contain no spaces.
fn words(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_f64(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, values.iter().flat_map(|v| v.to_le_bytes()).collect::<Vec<_>>()).unwrap();
    path
}

/// The four-value example compressed at eps 0.01, block length 4.
fn example(dir: &Path) -> PathBuf {
    let raw = write_f64(dir, "four.f64", &[-0.025, -0.025, -0.051, -0.052]);
    let out = dir.join("four.hsz");
    let o = hoszp(&words(&format!(
        "compress --input {} --dims 2x2 --dtype f64 --eps 0.01 --block-len 4 --output {}",
        s(&raw),
        s(&out)
    )));
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn stats_mean_of_example() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_f64(dir.path(), "four.f64", &[-0.025, -0.025, -0.051, -0.052]);
    let o = hoszp(&words(&format!(
        "stats mean --input {} --dims 4 --dtype f64 --eps 0.01 --block-len 4 --verify --report json",
        s(&raw)
    )));
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v[0]["value"].as_f64(), Some(-0.04));
    assert_eq!(v[0]["op"], "mean");

    let hsz = example(dir.path());
    let o = hoszp(&["stats", "mean", "--input", s(&hsz)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("-0.04"), "{}", stdout(&o));
}

#[test]
fn stats_on_example_stream() {
    let dir = tempfile::tempdir().unwrap();
    let hsz = example(dir.path());
    let value = |name: &str| {
        let o = hoszp(&["stats", name, "--input", s(&hsz), "--verify", "--report", "json"]);
        assert!(o.status.success(), "{}", stderr(&o));
        json(&o)[0]["value"].as_f64().unwrap()
    };
    assert!((value("var") - 4e-4).abs() < 1e-18);
    assert!((value("std") - 0.02).abs() < 1e-16);
}

#[test]
fn negate_verifies_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let hsz = example(dir.path());
    let out = dir.path().join("neg.hsz");
    let o = hoszp(&["op", "neg", "--input", s(&hsz), "--verify", "--output", s(&out), "--report", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v[0]["max_abs_diff"].as_f64(), Some(0.0));
    assert!(v[0]["speedup"].as_f64().unwrap() > 0.0);
    let neg = deserialize(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(neg.outliers(), &[1]);
}

#[test]
fn stream_ops_verify_on_smooth_fields() {
    let dir = tempfile::tempdir().unwrap();
    let dims = [40, 30, 20];
    let mut paths = Vec::new();
    for seed in 0..2 {
        let raw = dir.path().join(format!("f{seed}.f32"));
        std::fs::write(&raw, smooth_field(&dims, DType::F32, seed).unwrap().to_le_bytes()).unwrap();
        let hsz = dir.path().join(format!("f{seed}.hsz"));
        let o = hoszp(&["compress", "--input", s(&raw), "--dims", "40x30x20", "--eps", "1e-3", "--output", s(&hsz)]);
        assert!(o.status.success(), "{}", stderr(&o));
        paths.push(hsz);
    }
    for op in ["neg", "sadd", "ssub", "smul", "add", "sub", "mul"] {
        let mut args = vec!["op", op, "--input", s(&paths[0]), "--verify", "--report", "csv", "--scalar", "-1.25"];
        if matches!(op, "add" | "sub" | "mul") {
            args.extend(["--input2", s(&paths[1])]);
        }
        let o = hoszp(&args);
        assert!(o.status.success(), "{op}: {}", stderr(&o));
        let csv = stdout(&o);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[6], "0", "{op}: {csv}");
    }
    for op in ["mean", "var", "std", "cov", "ssim"] {
        let o = hoszp(&["stats", op, "--input", s(&paths[0]), "--input2", s(&paths[1]), "--verify"]);
        let two = matches!(op, "cov" | "ssim");
        assert_eq!(o.status.success(), two, "{op}: {}", stderr(&o));
        if !two {
            assert_eq!(o.status.code(), Some(2));
        }
    }
}

#[test]
fn compress_regression_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("smooth.f32");
    std::fs::write(&raw, smooth_field(&[500, 500, 100], DType::F32, 0).unwrap().to_le_bytes()).unwrap();
    let out = dir.path().join("smooth.hsz");
    let o = hoszp(&words(&format!(
        "compress --input {} --dims 500x500x100 --eps 1e-2 --output {} --verify --report json",
        s(&raw),
        s(&out)
    )));
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(std::fs::metadata(&out).unwrap().len(), SMOOTH_500_BYTES);
    assert_eq!(v[0]["cr"].as_f64(), Some(SMOOTH_500_CR));
    assert_eq!(v[0]["bytes_in"].as_u64(), Some(100_000_000));
    assert!(v[0]["max_abs_diff"].as_f64().unwrap() <= 1e-2 + 1e-8);

    let back = dir.path().join("back.f32");
    let o = hoszp(&["decompress", "--input", s(&out), "--output", s(&back)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::metadata(&back).unwrap().len(), 100_000_000);
}

#[test]
fn relative_bound_is_resolved_into_header() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_f64(dir.path(), "r.f64", &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0]);
    let out = dir.path().join("r.hsz");
    let o = hoszp(&words(&format!(
        "compress --input {} --dims 8 --dtype f64 --eps 1e-2 --eps-mode rel --output {}",
        s(&raw),
        s(&out)
    )));
    assert!(o.status.success(), "{}", stderr(&o));
    let stream = deserialize(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(stream.params().eps(), 0.08);
}

#[test]
fn csv_header_is_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let hsz = example(dir.path());
    let o = hoszp(&["op", "sadd", "--scalar", "0.67", "--input", s(&hsz), "--report", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("op,bytes_in,cr,t_homo_s,t_oracle_s,speedup,max_abs_diff"));
}

#[test]
fn distsim_reports_node_columns() {
    let o = hoszp(&["distsim", "--nodes", "3", "--dims", "16x16x16", "--reps", "1", "--report", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("op,bytes_in,cr,t_homo_s,t_oracle_s,speedup,max_abs_diff,node_count,eps"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "distsim-fused");
    assert_eq!(&row[7..], ["3", "0.001"]);
}

#[test]
fn bench_runs_both_paths() {
    let o = hoszp(&words("--threads 2 bench --dims 20x20x20 --reps 1 --ops neg,add,mean --report json"));
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let ops: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["op"].as_str().unwrap()).collect();
    assert_eq!(ops, ["compress", "neg", "add", "mean"]);
    assert_eq!(v[1]["max_abs_diff"].as_f64(), Some(0.0));
    assert_eq!(v[2]["max_abs_diff"].as_f64(), Some(0.0));
}

#[test]
fn exit_codes_and_error_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let hsz = example(dir.path());
    let raw = write_f64(dir.path(), "x.f64", &[1.0, 2.0, 3.0]);
    let garbage = dir.path().join("garbage.hsz");
    std::fs::write(&garbage, b"not a stream at all").unwrap();
    let truncated = dir.path().join("short.hsz");
    std::fs::write(&truncated, &std::fs::read(&hsz).unwrap()[..40]).unwrap();
    let missing = dir.path().join("missing.hsz");

    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["compress", "--nonsense"], 2, "error:"),
        (vec!["op", "bogus", "--input", s(&hsz)], 2, "error[Usage]"),
        (vec!["op", "sadd", "--input", s(&hsz)], 2, "error[Usage]"),
        (vec!["op", "add", "--input", s(&hsz)], 2, "error[Usage]"),
        (vec!["stats", "neg", "--input", s(&hsz)], 2, "error[Usage]"),
        (vec!["compress", "--input", s(&raw), "--dims", "3", "--dtype", "f64"], 2, "error[Usage]"),
        (vec!["--threads", "0", "stats", "mean", "--input", s(&hsz)], 2, "error[Usage]"),
        (vec!["op", "neg", "--input", s(&missing)], 3, "error[Io]"),
        (vec!["op", "neg", "--input", s(&garbage)], 4, "error[BadMagic]"),
        (vec!["op", "neg", "--input", s(&truncated)], 4, "error[TruncatedStream]"),
        (
            vec!["compress", "--input", s(&raw), "--dims", "4", "--dtype", "f64", "--eps", "1"],
            4,
            "error[InvalidParams]",
        ),
        (vec!["op", "sadd", "--scalar", "1e300", "--input", s(&hsz)], 4, "error[QuantOverflow]"),
    ];
    for (args, code, marker) in cases {
        let o = hoszp(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(marker), "{args:?}: {}", stderr(&o));
    }
}
