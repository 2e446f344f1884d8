//! End-to-end tests of the command-line interface: validation diagnostics,
//! deterministic outputs, overwrite protection, and stream re-analysis.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trionsim"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("trionsim-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn trionsim");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Parse `name value [err n]` summary lines.
fn summary_values(text: &str) -> BTreeMap<String, f64> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("protocol"))
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            let name = parts.next()?;
            let value: f64 = parts.next()?.parse().ok()?;
            Some((name.to_string(), value))
        })
        .collect()
}

#[test]
fn validate_accepts_shipped_configs_and_rejects_bad_fields() {
    for name in ["default_6t.conf", "default_9t.conf", "experiment_timebin.conf", "ideal.conf"] {
        run_ok(bin().arg("validate").arg(repo_config(name)));
    }
    let dir = tempdir("validate");
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "purcell_factor = 0.5\n").unwrap();
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("purcellFactor must be >= 1"));

    std::fs::write(&bad, "t2star_ns = -1\n").unwrap();
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t2Star"));

    let out = bin().arg("validate").arg(dir.join("missing.conf")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runs_are_byte_identical_for_fixed_seed_and_any_thread_count() {
    let dir = tempdir("determinism");
    let run = |out: &Path, threads: &str| {
        run_ok(
            bin()
                .arg("run")
                .arg("timebin")
                .arg("--config")
                .arg(repo_config("ideal.conf"))
                .arg("--out")
                .arg(out)
                .arg("--seed")
                .arg("7")
                .arg("--reps")
                .arg("400")
                .arg("--threads")
                .arg(threads)
                .arg("--force"),
        );
    };
    let a = dir.join("a");
    let b = dir.join("b");
    run(&a, "1");
    run(&b, "4");
    for name in ["timebin.summary.txt", "timebin.stream.txt", "timebin.manifest.txt"] {
        let bytes_a = std::fs::read(a.join(name)).unwrap();
        let bytes_b = std::fs::read(b.join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs across thread counts");
    }
    // Re-running with the same seed into the same directory reproduces the
    // outputs bit-for-bit.
    let before = std::fs::read(a.join("timebin.summary.txt")).unwrap();
    run(&a, "2");
    let after = std::fs::read(a.join("timebin.summary.txt")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn ramsey_runs_reproduce_and_refuse_overwrite() {
    let dir = tempdir("ramsey");
    let mut first = bin();
    first
        .arg("run")
        .arg("ramsey")
        .arg("--config")
        .arg(repo_config("default_6t.conf"))
        .arg("--out")
        .arg(&dir)
        .arg("--seed")
        .arg("7")
        .arg("--delays")
        .arg("0:200:10");
    run_ok(&mut first);
    let summary1 = std::fs::read(dir.join("ramsey.summary.txt")).unwrap();

    // Second run without --force is refused.
    let refused = bin()
        .arg("run")
        .arg("ramsey")
        .arg("--config")
        .arg(repo_config("default_6t.conf"))
        .arg("--out")
        .arg(&dir)
        .arg("--seed")
        .arg("7")
        .arg("--delays")
        .arg("0:200:10")
        .output()
        .unwrap();
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--force"));

    // With --force the bytes reproduce.
    let mut second = bin();
    second
        .arg("run")
        .arg("ramsey")
        .arg("--config")
        .arg(repo_config("default_6t.conf"))
        .arg("--out")
        .arg(&dir)
        .arg("--seed")
        .arg("7")
        .arg("--delays")
        .arg("0:200:10")
        .arg("--force");
    run_ok(&mut second);
    let summary2 = std::fs::read(dir.join("ramsey.summary.txt")).unwrap();
    assert_eq!(summary1, summary2);
    // Manifest exists and names the outputs.
    let manifest = std::fs::read_to_string(dir.join("ramsey.manifest.txt")).unwrap();
    assert!(manifest.contains("protocol ramsey"));
    assert!(manifest.contains("output ramsey.summary.txt"));
    assert!(manifest.contains("config_begin"));
}

#[test]
fn analyze_reproduces_run_estimators_and_is_reorder_invariant() {
    let dir = tempdir("analyze");
    run_ok(
        bin()
            .arg("run")
            .arg("timebin")
            .arg("--config")
            .arg(repo_config("ideal.conf"))
            .arg("--out")
            .arg(&dir)
            .arg("--seed")
            .arg("1")
            .arg("--reps")
            .arg("500"),
    );
    let summary =
        summary_values(&std::fs::read_to_string(dir.join("timebin.summary.txt")).unwrap());
    let stream_path = dir.join("timebin.stream.txt");
    let out = run_ok(bin().arg("analyze").arg(&stream_path));
    let analyzed = summary_values(&String::from_utf8_lossy(&out.stdout));
    for (run_key, analyze_key) in [
        ("g2_1R", "g2_gen1_readout"),
        ("g2_2R", "g2_gen2_readout"),
        ("p_second_bin", "p_second_bin"),
    ] {
        let a = summary[run_key];
        let b = analyzed[analyze_key];
        assert!(
            (a - b).abs() < 1e-12,
            "{run_key}: run {a} vs analyze {b}"
        );
    }

    // Shuffling repetitions does not change the estimators.
    let text = std::fs::read_to_string(&stream_path).unwrap();
    let stream = trionsim::estimators::parse_stream(&text).unwrap();
    let mut reps: Vec<Vec<trionsim::estimators::TimeTag>> = stream.repetitions().to_vec();
    reps.rotate_left(173);
    reps.reverse();
    let shuffled = trionsim::estimators::TimeTagStream::new(
        stream.repetition_period_ps(),
        stream.windows().clone(),
        reps,
    )
    .unwrap();
    let shuffled_path = dir.join("shuffled.stream.txt");
    std::fs::write(&shuffled_path, trionsim::estimators::serialize_stream(&shuffled)).unwrap();
    let out = run_ok(bin().arg("analyze").arg(&shuffled_path));
    let reanalyzed = summary_values(&String::from_utf8_lossy(&out.stdout));
    for key in ["g2_gen1_readout", "g2_gen2_readout", "p_second_bin"] {
        assert_eq!(
            analyzed[key].to_bits(),
            reanalyzed[key].to_bits(),
            "{key} changed under repetition reordering"
        );
    }

    // Missing window names are reported with the available ones.
    let out = bin()
        .arg("analyze")
        .arg(&stream_path)
        .arg("--gen")
        .arg("nonsense")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gen1") && err.contains("readout"), "{err}");
}

#[test]
fn ghz_run_reports_fidelity_and_success() {
    let dir = tempdir("ghz");
    run_ok(
        bin()
            .arg("run")
            .arg("ghz")
            .arg("--config")
            .arg(repo_config("ideal.conf"))
            .arg("--out")
            .arg(&dir)
            .arg("--photons")
            .arg("3")
            .arg("--mode")
            .arg("ghz"),
    );
    let summary = summary_values(&std::fs::read_to_string(dir.join("ghz.summary.txt")).unwrap());
    assert!((summary["fidelity"] - 1.0).abs() < 1e-6);
    assert!(summary["success_probability"] > 0.999);
    assert!(dir.join("ghz.pattern_populations.csv").exists());
    // The pulse-sequence description ships with the run.
    let seq_text = std::fs::read_to_string(dir.join("ghz.sequence.txt")).unwrap();
    assert!(seq_text.contains("segment rotation") && seq_text.contains("window tau1"));
}

#[test]
fn incompatible_flags_are_rejected() {
    let dir = tempdir("flags");
    let out = bin()
        .arg("run")
        .arg("rabi")
        .arg("--variant")
        .arg("a")
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--variant"));
    let out = bin()
        .arg("run")
        .arg("ramsey")
        .arg("--waits")
        .arg("0:10:1")
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
