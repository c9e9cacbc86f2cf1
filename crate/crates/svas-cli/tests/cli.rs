//! End-to-end runs of the binary: exit-status conventions, file outputs and
//! byte-determinism of stdout.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_svas"))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../corpus/{name}"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn search_writes_a_replayable_witness() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(
        dir.path(),
        "p.svas",
        "counters: x\nalphabet:\ninc x\ndec x\nhalt\n",
    );
    let wit = dir.path().join("w.wit");
    let out = run(&[
        "search",
        prog.to_str().unwrap(),
        "--witness",
        wit.to_str().unwrap(),
        "--max-configs",
        "100000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("reachable"));
    let replayed = run(&["replay", prog.to_str().unwrap(), "--witness", wit.to_str().unwrap()]);
    assert_eq!(replayed.status.code(), Some(0));
    assert!(stdout(&replayed).contains("Accepted"));
}

#[test]
fn search_reports_unreachable_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(dir.path(), "p.svas", "counters: x\nalphabet:\ninc x\nhalt\n");
    let out = run(&["search", prog.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("unreachable"));
}

#[test]
fn oracle_exit_codes_follow_the_verdict() {
    let halt = run(&["oracle", corpus("inc-dec.cp").to_str().unwrap(), "--bound", "4"]);
    assert_eq!(halt.status.code(), Some(0));
    assert!(stdout(&halt).contains("halts-within-bound"));
    let exceeds = run(&["oracle", corpus("inc-loop.cp").to_str().unwrap(), "--bound", "4"]);
    assert_eq!(exceeds.status.code(), Some(1));
    assert!(stdout(&exceeds).contains("exceeds-bound step=8 counter=x"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cp");
    let out = run(&["oracle", missing.to_str().unwrap(), "--bound", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let bad = write(dir.path(), "bad.svas", "counters: x\ninc x\n");
    let out = run(&["search", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compile_run_encode_check_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("unit");
    let compiled = run(&[
        "compile",
        corpus("inc-dec.cp").to_str().unwrap(),
        "-n",
        "1",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(compiled.status.code(), Some(0), "{compiled:?}");
    let svas = base.with_extension("svas");
    let ann = base.with_extension("ann");
    assert!(svas.exists() && ann.exists() && base.with_extension("map").exists());

    let ran = run(&[
        "run",
        svas.to_str().unwrap(),
        "--annotations",
        ann.to_str().unwrap(),
    ]);
    assert_eq!(ran.status.code(), Some(0), "{ran:?}");
    assert!(stdout(&ran).contains("Accepted"));

    let forest = dir.path().join("f.ldf");
    let encoded = run(&[
        "encode",
        svas.to_str().unwrap(),
        "--annotations",
        ann.to_str().unwrap(),
        "--out",
        forest.to_str().unwrap(),
    ]);
    assert_eq!(encoded.status.code(), Some(0));

    let checked = run(&[
        "check",
        svas.to_str().unwrap(),
        "--forest",
        forest.to_str().unwrap(),
    ]);
    assert_eq!(checked.status.code(), Some(0), "{checked:?}");
    assert!(stdout(&checked).contains("agreement=true"));

    // A mutated forest still produces formula/decoder agreement; the exit
    // status reflects satisfaction, never disagreement.
    for seed in 0..5 {
        let mutated = dir.path().join(format!("m{seed}.ldf"));
        let m = run(&[
            "mutate",
            forest.to_str().unwrap(),
            "--seed",
            &seed.to_string(),
            "--out",
            mutated.to_str().unwrap(),
        ]);
        assert_eq!(m.status.code(), Some(0));
        let checked = run(&[
            "check",
            svas.to_str().unwrap(),
            "--forest",
            mutated.to_str().unwrap(),
        ]);
        assert!(
            matches!(checked.status.code(), Some(0) | Some(1)),
            "check must stay conclusive: {checked:?}"
        );
        assert!(stdout(&checked).contains("agreement=true"));
    }
}

#[test]
fn dec_harness_exhaustive_reports_exact_totals() {
    let out = run(&[
        "dec-harness",
        "2",
        "--exhaustive",
        "--max-counter",
        "4",
        "--max-stack",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("accepting-totals=[4]"), "{text}");
    assert!(text.contains("always 4"), "{text}");
}

#[test]
fn zt_harness_search_verdicts() {
    let ok = run(&["zt-harness", "1", "--preload", "0", "--search", "--max-counter", "4"]);
    assert_eq!(ok.status.code(), Some(0));
    let no = run(&["zt-harness", "1", "--preload", "1", "--search", "--max-counter", "4"]);
    assert_eq!(no.status.code(), Some(1));
    assert!(stdout(&no).contains("unreachable"));
}

#[test]
fn sizes_reports_affine_growth() {
    let out = run(&[
        "sizes",
        corpus("test-loop.cp").to_str().unwrap(),
        "--max-level",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("affine=true"), "{text}");
    assert_eq!(text.lines().count(), 9, "8 size lines plus the verdict");
}

#[test]
fn formula_output_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(
        dir.path(),
        "p.svas",
        "counters: x\nalphabet: a\ninc x\npush a\npop a\ndec x\nhalt\n",
    );
    let out = run(&["formula", prog.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let parsed = svas::logic::parse_formula(&stdout(&out)).unwrap();
    assert!(parsed.is_sentence());
}

#[test]
fn stdout_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(
        dir.path(),
        "p.svas",
        "counters: x\nalphabet: a\nL: goto B or E\nB: inc x\npush a\npop a\ndec x\ngoto L or L\nE: halt\n",
    );
    let a = run(&["search", prog.to_str().unwrap()]);
    let b = run(&["search", prog.to_str().unwrap()]);
    assert_eq!(out_bytes(&a), out_bytes(&b), "stdout must be identical across runs");

    fn out_bytes(o: &Output) -> &[u8] {
        &o.stdout
    }
}
