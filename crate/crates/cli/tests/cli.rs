//! End-to-end tests driving the compiled `gusheh` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gusheh");

const SHEET: &str = "\
Note,Duration,MIDI,Interval,Bend
F,2,53,0,0
G,2,55,4,0
Ab,2,56,2,0
G,2,55,-2,0
F,2,53,-4,0
G,2,55,4,0
Ab,2,56,2,0
G,2,55,-2,0
F,8,53,-4,0
";

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("failed to spawn binary")
}

fn write_sheet(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tune.csv");
    fs::write(&path, SHEET).unwrap();
    path
}

#[test]
fn parse_prints_rules_and_pai() {
    let dir = tempfile::tempdir().unwrap();
    let sheet = write_sheet(dir.path());
    let out = run(&["parse", sheet.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("p0 ->"), "missing root rule in:\n{text}");
    assert!(text.contains("PAI: "), "missing PAI line in:\n{text}");
}

#[test]
fn missing_input_exits_with_io_code() {
    let out = run(&["parse", "/no/such/file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("/no/such/file.csv"),
        "error should name the path: {err}"
    );
}

#[test]
fn malformed_sheet_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "not,a,real,header\nF,2,53,0,0\n").unwrap();
    let out = run(&["parse", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_setup_exits_with_pipeline_code() {
    let dir = tempfile::tempdir().unwrap();
    let sheet = write_sheet(dir.path());
    let out = run(&["parse", sheet.to_str().unwrap(), "--setup", "setup_9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn variation_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let sheet = write_sheet(dir.path());
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = run(&[
            "variation",
            sheet.to_str().unwrap(),
            "--setup",
            "setup_4",
            "--n",
            "8",
            "--seed",
            "42",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push((
            fs::read(out_dir.join("tune-var.csv")).unwrap(),
            fs::read(out_dir.join("tune-var.mid")).unwrap(),
            fs::read(out_dir.join("tune-var.log.jsonl")).unwrap(),
        ));
    }
    assert_eq!(
        outputs[0], outputs[1],
        "same seed must give byte-identical outputs"
    );
}

#[test]
fn variation_with_zero_mutations_preserves_the_notes() {
    let dir = tempfile::tempdir().unwrap();
    let sheet = write_sheet(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "variation",
        sheet.to_str().unwrap(),
        "--setup",
        "setup_2",
        "--n",
        "0",
        "--seed",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let variant = fs::read_to_string(out_dir.join("tune-var.csv")).unwrap();
    let notes = |text: &str| -> Vec<(String, String)> {
        text.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[2].to_string(), f[1].to_string())
            })
            .collect()
    };
    assert_eq!(notes(&variant), notes(SHEET));
}

#[test]
fn backward_setup_preserves_the_final_pitch() {
    let dir = tempfile::tempdir().unwrap();
    let sheet = write_sheet(dir.path());
    for seed in 0..5u64 {
        let out_dir = dir.path().join(format!("s{seed}"));
        let out = run(&[
            "variation",
            sheet.to_str().unwrap(),
            "--setup",
            "setup_3",
            "--n",
            "6",
            "--seed",
            &seed.to_string(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let variant = fs::read_to_string(out_dir.join("tune-var.csv")).unwrap();
        let last = variant.lines().last().unwrap();
        let midi = last.split(',').nth(2).unwrap();
        assert_eq!(
            midi, "53",
            "backward setup must keep the final pitch: {last}"
        );
    }
}

#[test]
fn experiment_writes_the_metrics_csv() {
    let dir = tempfile::tempdir().unwrap();
    write_sheet(dir.path());
    let out_path = dir.path().join("metrics.csv");
    let out = Command::new(BIN)
        .args([
            "experiment",
            "--n",
            "5",
            "--seed",
            "3",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .env("GUSHEH_CORPUS_DIR", dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tune,setup,seed,step,length,ed,pai,pai_over_length,ed_norm"
    );
    assert!(
        csv.lines().any(|l| l.contains("MEAN")),
        "missing MEAN rows:\n{csv}"
    );
}

#[test]
fn validate_flags_inconsistent_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(
        &path,
        "Note,Duration,MIDI,Interval,Bend\nF,2,53,0,0\nG,2,55,1,0\n",
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_midi_emits_a_format_zero_file() {
    let dir = tempfile::tempdir().unwrap();
    let sheet = write_sheet(dir.path());
    let mid = dir.path().join("tune.mid");
    let out = run(&[
        "export-midi",
        sheet.to_str().unwrap(),
        "--out",
        mid.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let bytes = fs::read(&mid).unwrap();
    assert_eq!(&bytes[..4], b"MThd");
    assert_eq!(&bytes[8..10], [0, 0], "expected SMF format 0");
}

#[test]
fn topology_emits_dot() {
    let dir = tempfile::tempdir().unwrap();
    let sheet = write_sheet(dir.path());
    let out = run(&["topology", sheet.to_str().unwrap(), "--setup", "setup_1"]);
    assert!(out.status.success());
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph"), "{dot}");
    assert!(dot.trim_end().ends_with('}'), "{dot}");
}
