use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pairsource");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/crystals.toml");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const JSA_791: &[&str] = &[
    "--crystal",
    "KTP",
    "--temp",
    "50",
    "jsa",
    "--pump",
    "0.791",
    "--L",
    "30",
    "--tau",
    "2.5",
];

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = run(tmp.path(), &["jsa", "--pump", "0.791", "--L", "30", "--tau", "2.5"]);
    assert_eq!(code(&missing), 2);
    let stderr = String::from_utf8_lossy(&missing.stderr);
    assert!(stderr.starts_with("error: "));
    assert_eq!(stderr.trim_end().lines().count(), 1);
    assert_eq!(code(&run(tmp.path(), &["--figure", "99"])), 2);
    assert_eq!(
        code(&run(tmp.path(), &["--crystal", "KTP", "--format", "matrix", "atlas"])),
        2
    );
}

#[test]
fn validation_errors_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "--crystal",
        "XYZ",
        "jsa",
        "--pump",
        "0.791",
        "--L",
        "30",
        "--tau",
        "2.5",
    ];
    assert_eq!(code(&run(tmp.path(), &args)), 3);
    let args = ["--crystal", "KTP", "jsa", "--pump", "0.791", "--L=-1", "--tau", "2.5"];
    assert_eq!(code(&run(tmp.path(), &args)), 3);
}

#[test]
fn missing_gvm_point_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(DATA).unwrap();
    let narrowed = text.replacen("transparency_um = [0.35, 4.5]", "transparency_um = [0.35, 1.4]", 1);
    assert_ne!(text, narrowed);
    let data = tmp.path().join("narrow.toml");
    std::fs::write(&data, narrowed).unwrap();
    let out = run(
        tmp.path(),
        &["--crystal", "KTP", "--data", data.to_str().unwrap(), "gvm"],
    );
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn rerun_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["--grid", "128", "--out", "first", "--image"];
    args.extend_from_slice(JSA_791);
    args.push("--components");
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let first = tmp.path().join("first");
    let out = run(tmp.path(), &["rerun", "first/manifest.json", "--out", "second"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for entry in std::fs::read_dir(&first).unwrap() {
        let path = entry.unwrap().path();
        let twin = tmp.path().join("second").join(path.file_name().unwrap());
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&twin).unwrap(),
            "{}",
            path.display()
        );
    }
    assert!(first.join("jsi.pgm").exists());
    assert!(first.join("pump_envelope.txt").exists());
}

#[test]
fn rerun_detects_changed_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["--grid", "64", "--out", "a"];
    args.extend_from_slice(JSA_791);
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let manifest = tmp.path().join("a/manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["outputs"][0]["sha256"] = serde_json::Value::String("0".repeat(64));
    std::fs::write(&manifest, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    assert_eq!(code(&run(tmp.path(), &["rerun", "a/manifest.json", "--out", "b"])), 3);
}

#[test]
fn schmidt_number_converges_with_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let mut k = Vec::new();
    for grid in ["512", "1024"] {
        let mut args = vec!["--grid", grid, "--out", grid];
        args.extend_from_slice(JSA_791);
        assert_eq!(code(&run(tmp.path(), &args)), 0);
        k.push(report(&tmp.path().join(grid))["schmidt_number"].as_f64().unwrap());
    }
    assert!((k[0] - k[1]).abs() < 1e-3, "K {} vs {}", k[0], k[1]);
}

#[test]
fn json_tables_parse() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "--crystal",
        "KTP",
        "--temp",
        "50",
        "--grid",
        "96",
        "--format",
        "json",
        "filter",
        "--pump",
        "0.791",
        "--L",
        "30",
        "--tau",
        "2.5",
        "--fwhm",
        "2,4",
    ];
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let text = std::fs::read_to_string(tmp.path().join("out/filter.json")).unwrap();
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
}

#[test]
fn cddc_rows_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["--crystal", "KTP", "--out", "c", "cddc", "--period-samples", "40"];
    let out = run(tmp.path(), &args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("c/cddc.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (first, second) = (col("residual_first"), col("residual_second"));
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[first].parse::<f64>().unwrap().abs() < 1e-8);
        assert!(cells[second].parse::<f64>().unwrap().abs() < 1e-8);
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn bulk_locus_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "--crystal",
        "CTA",
        "--out",
        "b",
        "bulk",
        "--pump-start",
        "0.7",
        "--pump-stop",
        "0.8",
        "--pump-step",
        "0.01",
    ];
    let out = run(tmp.path(), &args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("b/locus.csv")).unwrap();
    assert!(text.starts_with("pump_um,signal_um,idler_um"));
    assert!(text.lines().count() > 1);
}

#[test]
fn figure_list_names_every_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["--list-figures"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 20);
}
