//! End-to-end tests of the command-line surface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manner-ctc"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_then_greedy_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("c.post");
    let out = run(&["synth", "--text", "AB", "--out", path_str(&post)]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(&["decode", "greedy", path_str(&post)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "AB\n");
}

#[test]
fn synth_suppression_deletes_a_symbol_from_greedy() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("c.post");
    let out = run(&[
        "synth",
        "--text",
        "AB",
        "--suppress",
        "1,0.1",
        "--out",
        path_str(&post),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(&["decode", "greedy", path_str(&post)]);
    assert_eq!(stdout(&out), "A\n");
}

#[test]
fn synth_rejects_symbols_outside_the_alphabet() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("c.post");
    let out = run(&["synth", "--text", "AΩB", "--out", path_str(&post)]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains('Ω'),
        "diagnostic must name the symbol: {}",
        stderr(&out)
    );
    assert!(!post.exists());
}

#[test]
fn manner_decode_recovers_a_suppressed_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let chars = dir.path().join("c.post");
    let manner = dir.path().join("m.post");
    let out = run(&[
        "synth",
        "--text",
        "AB",
        "--suppress",
        "1,0.1",
        "--out",
        path_str(&chars),
        "--manner-out",
        path_str(&manner),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(&[
        "decode",
        "manner",
        "--char",
        path_str(&chars),
        "--manner",
        path_str(&manner),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "AB\n");
}

#[test]
fn manner_decode_can_derive_the_manner_stream() {
    let dir = tempfile::tempdir().unwrap();
    let chars = dir.path().join("c.post");
    let out = run(&["synth", "--text", "CAT DOG", "--out", path_str(&chars)]);
    assert!(out.status.success());

    let out = run(&[
        "decode",
        "manner",
        "--char",
        path_str(&chars),
        "--derive-manner",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "CAT>DOG\n");

    let out = run(&[
        "decode",
        "manner",
        "--char",
        path_str(&chars),
        "--derive-manner",
        "--human",
    ]);
    assert_eq!(stdout(&out), "CAT DOG\n");
}

#[test]
fn manner_decode_rejects_mismatched_frame_counts() {
    let dir = tempfile::tempdir().unwrap();
    let chars = dir.path().join("c.post");
    let manner = dir.path().join("m.post");
    run(&["synth", "--text", "AB", "--out", path_str(&chars)]);
    run(&[
        "synth",
        "--text",
        "ABC",
        "--out",
        dir.path().join("ignored.post").to_str().unwrap(),
        "--manner-out",
        path_str(&manner),
    ]);

    let out = run(&[
        "decode",
        "manner",
        "--char",
        path_str(&chars),
        "--manner",
        path_str(&manner),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("frame counts differ"), "{}", stderr(&out));
}

fn write_tiny_matrix(path: &Path) {
    fs::write(path, "#labels:<,A\n#frames:1\n0.2,0.8\n").unwrap();
}

#[test]
fn loss_prints_the_log_probability() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("t.post");
    write_tiny_matrix(&post);

    let out = run(&["loss", path_str(&post), "--target", "A"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), format!("{}", 0.8f64.ln()));
}

#[test]
fn loss_prints_minus_inf_for_unreachable_targets() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("t.post");
    write_tiny_matrix(&post);

    let out = run(&["loss", path_str(&post), "--target", "AA"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "-inf");
}

#[test]
fn loss_writes_a_gradient_file() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("t.post");
    let grad = dir.path().join("t.grad");
    write_tiny_matrix(&post);

    let out = run(&[
        "loss",
        path_str(&post),
        "--target",
        "A",
        "--grad",
        path_str(&grad),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (alphabet, rows) = manner_ctc::read_gradient(&grad).unwrap();
    assert_eq!(alphabet.len(), 2);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - (-1.25)).abs() < 1e-12);
    assert_eq!(rows[0][0], 0.0);
}

#[test]
fn map_rewrites_text() {
    let out = run(&["map", "ONE"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "VNV\n");

    let out = run(&["map", "A N"]);
    assert_eq!(stdout(&out), "V>N\n");

    let out = run(&["map", "A N", "--human"]);
    assert_eq!(stdout(&out), "V N\n");

    let out = run(&["map", "Ω"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains('Ω'));
}

#[test]
fn map_accepts_a_custom_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("map.tsv");
    fs::write(&table, "A\tN\nB\tN\n").unwrap();
    let out = run(&["map", "AB", "--manner-map", path_str(&table)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "NN\n");
}

/// Stage a two-utterance manifest: one clean, one with a suppressed symbol.
fn stage_manifest(dir: &Path) -> std::path::PathBuf {
    for (id, text, suppress) in [("clean", "CAT", None), ("weak", "DOG HOUSE", Some("2,0.1"))] {
        let chars = dir.join(format!("{id}.char.post"));
        let manner = dir.join(format!("{id}.manner.post"));
        let mut args = vec![
            "synth".to_string(),
            "--text".to_string(),
            text.to_string(),
            "--out".to_string(),
            chars.to_string_lossy().into_owned(),
            "--manner-out".to_string(),
            manner.to_string_lossy().into_owned(),
        ];
        if let Some(s) = suppress {
            args.push("--suppress".to_string());
            args.push(s.to_string());
        }
        let out = Command::new(env!("CARGO_BIN_EXE_manner-ctc"))
            .args(&args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let manifest = dir.join("set.jsonl");
    let lines = [
        format!(
            "{{\"id\":\"clean\",\"char_posteriors\":\"clean.char.post\",\"manner_posteriors\":\"clean.manner.post\",\"reference\":\"CAT\"}}"
        ),
        format!(
            "{{\"id\":\"weak\",\"char_posteriors\":\"weak.char.post\",\"manner_posteriors\":\"weak.manner.post\",\"reference\":\"DOG HOUSE\"}}"
        ),
    ];
    fs::write(&manifest, lines.join("\n") + "\n").unwrap();
    manifest
}

#[test]
fn eval_writes_a_report_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = stage_manifest(dir.path());
    let report = dir.path().join("report.csv");

    let out = run(&[
        "eval",
        "--manifest",
        path_str(&manifest),
        "--format",
        "csv",
        "--out",
        path_str(&report),
        "--mer",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    // summary table on stdout
    let summary = stdout(&out);
    assert!(summary.contains("baseline"), "{summary}");
    assert!(summary.contains("proposed"), "{summary}");

    let csv = fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("id,method,wer,cer,mer\n"));
    assert!(csv.contains("clean,baseline,0,0,0"));
    assert!(csv.contains("weak,proposed,0,0,0"));
    // the suppressed utterance hurts only the baseline
    let weak_baseline = csv
        .lines()
        .find(|l| l.starts_with("weak,baseline"))
        .unwrap();
    assert_ne!(weak_baseline, "weak,baseline,0,0,0");
}

#[test]
fn eval_handles_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("empty.jsonl");
    fs::write(&manifest, "").unwrap();
    let report = dir.path().join("report.txt");

    let out = run(&[
        "eval",
        "--manifest",
        path_str(&manifest),
        "--out",
        path_str(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text, "method\t%WER\t%CER\n\nid\tmethod\t%WER\t%CER\n");
}

#[test]
fn eval_aborts_on_a_broken_entry_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("broken.jsonl");
    fs::write(
        &manifest,
        "{\"id\":\"ghost\",\"char_posteriors\":\"missing.post\",\"reference\":\"A\"}\n",
    )
    .unwrap();
    let out = run(&["eval", "--manifest", path_str(&manifest)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("ghost"), "{}", stderr(&out));
}

#[test]
fn custom_alphabet_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let alphabet = dir.path().join("alpha.txt");
    fs::write(&alphabet, "X\nY\n>\n").unwrap();
    let post = dir.path().join("c.post");
    let out = run(&[
        "synth",
        "--text",
        "XY",
        "--alphabet",
        path_str(&alphabet),
        "--out",
        path_str(&post),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let header = fs::read_to_string(&post).unwrap();
    assert!(header.starts_with("#labels:<,X,Y,>\n"));

    let out = run(&["decode", "greedy", path_str(&post)]);
    assert_eq!(stdout(&out), "XY\n");
}
