//! End-to-end tests of the `tissue` binary.

use std::path::Path;
use std::process::{Command, Output};

fn tissue(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tissue"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn tissue binary")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn synth_writes_stats_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = tissue(
        &["synth", "--profile", "normal2", "--seed", "7", "-o", "n2.trace"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let stats_line = stdout(&out);
    assert!(stats_line.contains("normal2,104,"), "{stats_line}");

    let out2 = tissue(
        &["synth", "--profile", "normal2", "--seed", "7", "-o", "n2b.trace"],
        dir.path(),
    );
    assert!(out2.status.success());
    let a = std::fs::read(dir.path().join("n2.trace")).unwrap();
    let b = std::fs::read(dir.path().join("n2b.trace")).unwrap();
    assert_eq!(a, b, "same flags and seed must write identical files");
}

#[test]
fn synth_unknown_profile_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = tissue(
        &["synth", "--profile", "nosuch", "-o", "x.trace"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("nosuch"));
}

#[test]
fn experiment_with_missing_trace_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = tissue(
        &["experiment", "single-run", "--trace", "missing.trace"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("missing.trace"), "{}", stderr(&out));
}

#[test]
fn stats_of_empty_trace_prints_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.trace"), "#session empty 0\n").unwrap();
    let out = tissue(&["stats", "empty.trace"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("empty,0,0,0,0,0"));
}

#[test]
fn stats_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.trace"), "A 0 6\n").unwrap();
    let out = tissue(&["stats", "bad.trace"], dir.path());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("bad.trace"));
}

#[test]
fn replay_then_log_stats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = tissue(
        &["synth", "--profile", "normal1", "--seed", "3", "-o", "n1.trace"],
        dir.path(),
    );
    assert!(out.status.success());

    let out = tissue(
        &["replay", "--trace", "n1.trace", "--seed", "5", "--out", "n1.log"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));

    // policy read back off the log
    let out = tissue(&["stats", "n1.log", "--which", "policy"], dir.path());
    assert!(out.status.success());
    let policy = stdout(&out);
    assert!(policy.starts_with("syscall,frequency\n"));
    assert!(policy.lines().count() > 1, "no responses in log:\n{policy}");

    // rate series with the antigen column from the trace
    let out = tissue(
        &["stats", "n1.log", "--which", "rates", "--trace", "n1.trace"],
        dir.path(),
    );
    assert!(out.status.success());
    let rates = stdout(&out);
    assert!(rates.starts_with("t,antigen_rate,response_rate\n"));
    let antigen_total: u64 = rates
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(antigen_total, 447, "antigen column must cover the whole trace");
}

#[test]
fn experiment_artifacts_are_deterministic_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let out = tissue(
            &[
                "experiment",
                "freq-selectivity",
                "--seed",
                "9",
                "--runs",
                "3",
                "--out",
                sub,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = std::fs::read(dir.path().join("a/table4.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/table4.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("syscall,frequency,mean,sd,cv\n"));
    assert!(text.trim_end().lines().last().unwrap().starts_with("rho="));
}

#[test]
fn realtime_pacing_tracks_the_wall_clock() {
    use tissue_core::{parse_trace, Engine, ParameterSet, ReplayOptions};

    let trace = parse_trace("#session rt 1\nA 0 6\nA 400000 5\nA 800000 6\n").unwrap();
    let params = ParameterSet {
        num_cells_1: 2,
        num_cells_2: 1,
        ..ParameterSet::default()
    };
    let options = ReplayOptions {
        cooldown_us: 200_000,
        ..ReplayOptions::default()
    };
    let started = std::time::Instant::now();
    let virtual_log = Engine::run(params.clone(), &trace, &options).unwrap();
    let virtual_elapsed = started.elapsed();

    let started = std::time::Instant::now();
    let mut pacer = tissue_cli::pacer::SleepPacer::new();
    let realtime_log = Engine::run_with_pacer(params, &trace, &options, &mut pacer).unwrap();
    let realtime_elapsed = started.elapsed();

    // identical logs, but the paced run takes (at least) the virtual span
    assert_eq!(virtual_log.serialize(), realtime_log.serialize());
    assert!(virtual_elapsed < std::time::Duration::from_millis(300));
    assert!(realtime_elapsed >= std::time::Duration::from_millis(1200));
}

#[test]
fn parameter_file_flows_through_replay() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("small.params"),
        "# tiny population\nnum_cells_1 = 2\nnum_cells_2 = 1\nantigen_multiplier = 1\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("t.trace"),
        "#session t 1\nA 0 6\nA 500000 5\n",
    )
    .unwrap();
    let out = tissue(
        &[
            "replay",
            "--trace",
            "t.trace",
            "--params",
            "small.params",
            "--out",
            "t.log",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("2 copies injected"), "{}", stderr(&out));

    let bad = tissue(
        &["replay", "--trace", "t.trace", "--params", "nofile.params"],
        dir.path(),
    );
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("nofile.params"));
}
