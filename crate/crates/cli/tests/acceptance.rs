//! Acceptance gate, criterion 9: any binary invocation repeated with the
//! same seed yields byte-identical output, and exit codes follow the
//! usage=2 / computational=1 contract. Criteria 1-8 live in the library
//! crate's `acceptance` target.

use std::process::{Command, Output};
use std::time::Instant;

fn run(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkzeta"))
        .args(args)
        .current_dir(dir)
        .env_remove("DKZETA_TABLE_DIR")
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let mut failures: Vec<String> = Vec::new();
    let dir = tempfile::tempdir().expect("temp dir");

    // Representative invocations across every subcommand family.
    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "--seed", "11", "correlate", "--k", "2", "--x", "5e3", "--a", "1..12",
            "--mode", "fft",
        ],
        vec![
            "--seed", "11", "--format", "json", "correlate", "--k", "3", "--x", "2000",
            "--a", "0..4", "--mode", "direct",
        ],
        vec!["--seed", "11", "selberg", "--k", "2", "--x", "1200", "--h", "7.5"],
        vec!["--seed", "11", "moment", "--k", "1", "--T", "80"],
        vec![
            "--seed", "11", "gtilde", "--k", "2", "--m", "50", "--m-prime", "90",
            "--T", "9", "--grid-x", "3", "--grid-t", "4",
        ],
        vec![
            "--seed", "11", "smoothed", "--k", "1", "--m", "40", "--m-prime", "70",
            "--T", "12",
        ],
        vec!["--seed", "11", "verify", "--suite", "fejer"],
        vec!["--seed", "11", "verify", "--suite", "laurent"],
    ];

    for args in &invocations {
        let first = run(args, dir.path());
        let second = run(args, dir.path());
        if !first.status.success() {
            failures.push(format!(
                "`dkzeta {}` failed: {}",
                args.join(" "),
                String::from_utf8_lossy(&first.stderr)
            ));
            continue;
        }
        if first.stdout != second.stdout || first.stderr != second.stderr {
            failures.push(format!(
                "`dkzeta {}` is not byte-identical across runs",
                args.join(" ")
            ));
        }
        if first.status.code() != second.status.code() {
            failures.push(format!(
                "`dkzeta {}` exit code changed across runs",
                args.join(" ")
            ));
        }
    }

    // Exit-code contract: usage errors are 2, computational failures 1.
    let usage = run(&["sieve", "--k", "0", "--n", "10"], dir.path());
    if usage.status.code() != Some(2) {
        failures.push(format!(
            "sieve --k 0 exited {:?}, expected 2",
            usage.status.code()
        ));
    }
    let bad = dir.path().join("bad.dktb");
    std::fs::write(&bad, b"corrupted bytes").expect("write garbage table");
    let broken = run(
        &["verify", "--suite", "dispersion", "--table", bad.to_str().unwrap()],
        dir.path(),
    );
    if broken.status.code() != Some(1) {
        failures.push(format!(
            "verify on a corrupted table exited {:?}, expected 1",
            broken.status.code()
        ));
    }

    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "ACCEPTANCE 9 cli-byte-determinism: {} ({:.1}s)",
        verdict,
        start.elapsed().as_secs_f64()
    );
    assert!(failures.is_empty(), "criterion 9 failed: {}", failures.join("; "));
}
