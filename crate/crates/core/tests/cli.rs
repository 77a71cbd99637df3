use std::fs;
use std::path::{Path, PathBuf};

use floorsyntax::bench::{rebuild_outputs, replay, BenchReport, PROFILE_FILE, REPORT_FILE};
use floorsyntax::cli::{cli_dispatch, CHECKPOINT_FILE, GUARD_FILE, LEDGER_FILE, SCREEN_FILE};
use floorsyntax::report::{read_summary, SUMMARY_FILE};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> i32 {
    cli_dispatch(std::iter::once("floorsyntax").chain(args.iter().copied()))
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["train-ppo", "--reward-clip", "sometimes"]), 2);
}

#[test]
fn analyze_matches_the_golden_summary() {
    let out = tempfile::tempdir().unwrap();
    let plans = fixture("plans");
    assert_eq!(
        run(&[
            "analyze",
            plans.to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap()
        ]),
        0
    );
    let got = fs::read_to_string(out.path().join(SUMMARY_FILE)).unwrap();
    let golden = fs::read_to_string(fixture("plans_summary.golden.csv")).unwrap();
    assert_eq!(got, golden);
    assert!(!got.contains('\r'));
    assert!(!got.to_lowercase().contains("nan"));

    let mut lines = got.lines().skip(1);
    let width = lines.next().unwrap().split(',').count();
    assert!(lines.all(|l| l.split(',').count() == width));
    assert_eq!(read_summary(got.as_bytes()).unwrap().len(), 5);
    assert!(out.path().join(LEDGER_FILE).exists());
    assert_eq!(fs::read_dir(out.path().join("plans")).unwrap().count(), 5);
}

#[test]
fn screen_and_plot_follow_analyze() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().to_str().unwrap();
    assert_eq!(run(&["analyze", fixture("plans").to_str().unwrap(), "--out", dir]), 0);
    assert_eq!(run(&["screen", dir, "--top-k", "2"]), 0);
    let screen = fs::read_to_string(out.path().join(SCREEN_FILE)).unwrap();
    assert_eq!(screen.lines().count(), 6);
    assert_eq!(screen.lines().filter(|l| l.ends_with(",true")).count(), 2);
    assert_eq!(run(&["plot", dir]), 0);
    assert!(fs::read_to_string(out.path().join(PROFILE_FILE))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn bench_outputs_are_replayable() {
    let out = tempfile::tempdir().unwrap();
    let runs = out.path().to_str().unwrap();
    assert_eq!(
        run(&[
            "bench",
            "--seed",
            "3",
            "--samples",
            "40",
            "--run-id",
            "r",
            "--runs-dir",
            runs
        ]),
        0
    );
    let dir = out.path().join("r");
    let stored: BenchReport = serde_json::from_str(&fs::read_to_string(dir.join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(stored.validity.total, 40);
    let again = replay(&dir, stored.reference.as_ref()).unwrap();
    assert_eq!(again, stored);

    let before = fs::read(dir.join(SUMMARY_FILE)).unwrap();
    fs::remove_file(dir.join(SUMMARY_FILE)).unwrap();
    rebuild_outputs(&dir, stored.reference.as_ref()).unwrap();
    assert_eq!(fs::read(dir.join(SUMMARY_FILE)).unwrap(), before);
}

#[test]
fn condition_files_drive_the_bench() {
    let out = tempfile::tempdir().unwrap();
    let conds = out.path().join("eval.jsonl");
    let line = r#"{"id":"c0","rooms":[0,1,2,3,1,2,3,1],"adjacency":[[0,1],[0,2],[0,3],[0,4],[0,5],[0,6],[0,7]],"boundary":[-0.9,-0.85,0.9,0.8]}"#;
    fs::write(&conds, format!("# eight rooms\n{line}\n")).unwrap();
    let runs = out.path().to_str().unwrap();
    let args = [
        "bench",
        "--samples",
        "3",
        "--no-reference",
        "--run-id",
        "f",
        "--runs-dir",
        runs,
        "--conditions",
    ];
    let mut argv: Vec<&str> = args.to_vec();
    argv.push(conds.to_str().unwrap());
    assert_eq!(run(&argv), 0);
    let r: BenchReport =
        serde_json::from_str(&fs::read_to_string(out.path().join("f").join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(r.validity.total, 3);
    assert_eq!(r.d_profile, None);

    fs::write(&conds, "{not json}\n").unwrap();
    argv[7] = "g";
    assert_eq!(run(&argv), 1);
}

#[test]
fn train_iter_writes_checkpoint_log_and_guard() {
    let out = tempfile::tempdir().unwrap();
    let runs = out.path().to_str().unwrap();
    let args = [
        "train-iter",
        "--rounds",
        "2",
        "--samples",
        "32",
        "--topk",
        "16",
        "--epochs",
        "1",
        "--run-id",
        "t",
        "--runs-dir",
        runs,
    ];
    assert_eq!(run(&args), 0);
    let dir = out.path().join("t");
    let log = fs::read_to_string(dir.join("train_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 3);
    assert!(log.starts_with("round,"));
    let guard: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join(GUARD_FILE)).unwrap()).unwrap();
    assert_eq!(guard["violations"], 0);

    let ckpt = dir.join(CHECKPOINT_FILE);
    let runs2 = out.path().join("again");
    let args = [
        "train-ppo",
        "--rounds",
        "1",
        "--rollouts",
        "16",
        "--init",
        ckpt.to_str().unwrap(),
        "--run-id",
        "p",
        "--runs-dir",
        runs2.to_str().unwrap(),
    ];
    assert_eq!(run(&args), 0);
    assert!(runs2.join("p").join(CHECKPOINT_FILE).exists());
}
