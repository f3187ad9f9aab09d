//! End-to-end CLI tests: run → verify → replay → metrics → ablate over
//! a small workload, plus the failure-path exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn proofgate(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proofgate"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_small_config(dir: &Path) -> PathBuf {
    // 1% of the full workload keeps the end-to-end tests quick.
    let spec = proofgate::harness::WorkloadSpec::full_default(7).scaled(0.01);
    let spec_path = dir.join("workload.json");
    proofgate::harness::fixtures::save_json(&spec, &spec_path).unwrap();
    let config = serde_json::json!({
        "workload_spec": "workload.json",
        "seed": 7,
        "repetitions": 1
    });
    let config_path = dir.join("config.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    config_path
}

#[test]
fn run_verify_replay_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());

    let run = proofgate(
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "out",
        ],
        dir.path(),
    );
    assert!(
        run.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("unsafe block or escalation"));
    assert!(stdout.contains("all invariant metrics at 100%"));

    let out = dir.path().join("out");
    assert!(out.join("run_0.ledger.jsonl").exists());
    assert!(out.join("key_registry.json").exists());
    assert!(out.join("metrics.json").exists());
    assert!(out.join("summary.txt").exists());

    let ledger = out.join("run_0.ledger.jsonl");
    let verify = proofgate(&["verify", "--ledger", ledger.to_str().unwrap()], dir.path());
    assert!(verify.status.success());
    assert!(String::from_utf8_lossy(&verify.stdout).contains("chain: clean"));

    let replay = proofgate(
        &[
            "replay",
            "--ledger",
            ledger.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        replay.status.success(),
        "replay failed: {}{}",
        String::from_utf8_lossy(&replay.stdout),
        String::from_utf8_lossy(&replay.stderr)
    );
    let replay_out = String::from_utf8_lossy(&replay.stdout);
    assert!(replay_out.contains("fully replayable"));
    assert!(replay_out.contains("0 with mismatches"));

    let single = proofgate(
        &[
            "replay",
            "--ledger",
            ledger.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
            "--record",
            "i-0-00000",
        ],
        dir.path(),
    );
    assert!(single.status.success());
    assert!(String::from_utf8_lossy(&single.stdout).contains("1/1 records"));

    let metrics = proofgate(
        &[
            "metrics",
            "--ledger",
            ledger.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(metrics.status.success());
    assert!(String::from_utf8_lossy(&metrics.stdout).contains("replay success"));
}

#[test]
fn tampered_ledger_fails_verify_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let run = proofgate(
        &["run", "--config", config.to_str().unwrap(), "--out", "out"],
        dir.path(),
    );
    assert!(run.status.success());

    let ledger = dir.path().join("out/run_0.ledger.jsonl");
    let mut text = std::fs::read_to_string(&ledger).unwrap();
    // Flip one byte in the middle of the file.
    let mid = text.len() / 2;
    let mut bytes = text.into_bytes();
    bytes[mid] = bytes[mid].wrapping_add(1);
    text = String::from_utf8_lossy(&bytes).into_owned();
    std::fs::write(&ledger, text).unwrap();

    let verify = proofgate(&["verify", "--ledger", ledger.to_str().unwrap()], dir.path());
    assert_eq!(verify.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&verify.stdout);
    assert!(stdout.contains("DIVERGENT at line"), "{stdout}");
}

#[test]
fn truncated_ledger_reports_orphans() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let run = proofgate(
        &["run", "--config", config.to_str().unwrap(), "--out", "out"],
        dir.path(),
    );
    assert!(run.status.success());

    let ledger = dir.path().join("out/run_0.ledger.jsonl");
    let text = std::fs::read_to_string(&ledger).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // Drop the last two events: the final intent loses its tail stages.
    let truncated = lines[..lines.len() - 2].join("\n") + "\n";
    std::fs::write(&ledger, truncated).unwrap();

    let verify = proofgate(&["verify", "--ledger", ledger.to_str().unwrap()], dir.path());
    assert_eq!(verify.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&verify.stdout);
    assert!(stdout.contains("chain: clean"), "prefix still verifies: {stdout}");
    assert!(stdout.contains("orphan"), "{stdout}");
}

#[test]
fn missing_bundle_file_fails_fast_without_partial_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        serde_json::json!({ "policy_bundle": "nope/missing.json" }).to_string(),
    )
    .unwrap();

    let run = proofgate(
        &["run", "--config", config_path.to_str().unwrap(), "--out", "out"],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("missing.json"));
    assert!(!dir.path().join("out").exists(), "no partial output tree");
}

#[test]
fn forged_decision_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let run = proofgate(
        &["run", "--config", config.to_str().unwrap(), "--out", "out"],
        dir.path(),
    );
    assert!(run.status.success());

    // Forge: flip a stored escalate decision to approve, re-sealing the
    // chain so only replay (not chain verification) can catch it.
    let ledger_path = dir.path().join("out/run_0.ledger.jsonl");
    let original = proofgate::ledger::Ledger::read_file(&ledger_path).unwrap();
    let mut forged = proofgate::ledger::Ledger::new();
    let mut target_intent = None;
    for entry in original.entries() {
        let mut payload = entry.payload.clone();
        if entry.kind == proofgate::ledger::EventKind::IdentityIssuedOrRefused
            && target_intent.is_none()
        {
            let decision = payload["decision"]["verdict"].as_str().unwrap().to_string();
            if decision != "approve" {
                payload["decision"]["verdict"] = serde_json::json!("approve");
                target_intent = Some(entry.intent_id.clone());
            }
        }
        forged
            .append(entry.kind, &entry.intent_id, &payload)
            .unwrap();
    }
    let target = target_intent.expect("workload contains a non-approve decision");
    forged.write_file(&ledger_path).unwrap();

    // The re-sealed chain is internally consistent...
    let verify = proofgate(
        &["verify", "--ledger", ledger_path.to_str().unwrap()],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&verify.stdout).contains("chain: clean"));

    // ...but replay recomputes the decision from the stored attestations
    // and catches the forgery.
    let replay = proofgate(
        &[
            "replay",
            "--ledger",
            ledger_path.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
            "--record",
            target.as_str(),
        ],
        dir.path(),
    );
    assert_eq!(replay.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&replay.stdout);
    assert!(stdout.contains("does not re-derive"), "{stdout}");
}

#[test]
fn rerunning_the_same_config_reproduces_identical_ledgers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    for out in ["out_a", "out_b"] {
        let run = proofgate(
            &["run", "--config", config.to_str().unwrap(), "--out", out],
            dir.path(),
        );
        assert!(run.status.success());
    }
    let a = std::fs::read(dir.path().join("out_a/run_0.ledger.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("out_b/run_0.ledger.jsonl")).unwrap();
    assert_eq!(a, b, "CLI outputs are pure functions of inputs and flags");
}

#[test]
fn run_with_ablation_flag_reports_pass_throughs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let run = proofgate(
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "out",
            "--ablation",
            "no_consensus",
        ],
        dir.path(),
    );
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("ablation no_consensus complete"));
    // The written report carries the malformed pass-through count.
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/metrics.json")).unwrap())
            .unwrap();
    assert!(metrics["malformed_cases_admitted"].as_u64().unwrap() > 0);
}

#[test]
fn ablate_reports_all_three_components() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let ablate = proofgate(
        &[
            "ablate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "out",
        ],
        dir.path(),
    );
    assert!(
        ablate.status.success(),
        "{}",
        String::from_utf8_lossy(&ablate.stderr)
    );
    let stdout = String::from_utf8_lossy(&ablate.stdout);
    assert!(stdout.contains("no_consensus"));
    assert!(stdout.contains("no_execution_identity"));
    assert!(stdout.contains("no_evidence_chain"));
    assert!(stdout.contains("baseline b1"));
    assert!(stdout.contains("baseline b2"));
    assert!(dir.path().join("out/ablations.json").exists());
    assert!(dir.path().join("out/baselines.json").exists());
}
