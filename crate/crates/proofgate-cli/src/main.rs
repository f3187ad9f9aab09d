//! Operator entry point for the proof-gated authorization engine.
//!
//! Subcommands:
//! - `run`     — drive the governed pipeline over a workload; write
//!               ledgers, a metrics report, and a summary.
//! - `verify`  — recompute every hash and link in a ledger file and
//!               check structural completeness.
//! - `replay`  — re-derive the authorization basis of stored records.
//! - `metrics` — recompute the aggregate metrics from ledger files.
//! - `ablate`  — run component ablations and report the deltas.
//!
//! Every output lands in the chosen out directory; nothing else is
//! written. Exit codes encode invariant health so CI can gate on `run`
//! and `verify` without parsing reports.

mod config;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use config::ResolvedSetup;
use proofgate::harness::{
    compute_metrics, generate_workload, run_ablation, run_baseline_b1, run_baseline_b2, run_dtf,
    AblationKind, RunOptions,
};
use proofgate::ledger::{
    assemble_record, completeness_check, replay, verify_chain, ArtifactStores, Ledger,
};
use proofgate::model::IntentId;

#[derive(Parser)]
#[command(
    name = "proofgate",
    about = "Proof-gated authorization engine: governed runs, evidence verification, replay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the governed pipeline over the configured workload.
    Run {
        /// Run configuration file (JSON). Built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for ledgers, metrics, and the key registry.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured workload scale factor.
        #[arg(long)]
        scale: Option<f64>,
        /// Override the configured repetition count.
        #[arg(long)]
        repetitions: Option<u32>,
        /// Run one ablation instead of the full pipeline.
        #[arg(long, value_parser = parse_ablation)]
        ablation: Option<AblationKind>,
    },
    /// Verify a ledger file: hash chain plus structural completeness.
    Verify {
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Replay records from a ledger against pinned artifacts.
    Replay {
        #[arg(long)]
        ledger: PathBuf,
        /// Run configuration file used to produce the ledger.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replay a single record instead of all of them.
        #[arg(long)]
        record: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute aggregate metrics from one or more ledger files.
    Metrics {
        #[arg(long, required = true)]
        ledger: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the three component ablations plus baselines and compare.
    Ablate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// A single ablation to run; all three when omitted.
        #[arg(long, value_parser = parse_ablation)]
        ablation: Option<AblationKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        scale: Option<f64>,
    },
}

fn parse_ablation(s: &str) -> Result<AblationKind, proofgate::Error> {
    s.parse()
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            scale,
            repetitions,
            ablation,
        } => cmd_run(config, out, seed, scale, repetitions, ablation),
        Command::Verify { ledger } => cmd_verify(ledger),
        Command::Replay {
            ledger,
            config,
            record,
            seed,
        } => cmd_replay(ledger, config, record, seed),
        Command::Metrics {
            ledger,
            config,
            seed,
        } => cmd_metrics(ledger, config, seed),
        Command::Ablate {
            config,
            out,
            ablation,
            seed,
            scale,
        } => cmd_ablate(config, out, ablation, seed, scale),
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(
    config_path: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    scale: Option<f64>,
    repetitions: Option<u32>,
    ablation: Option<AblationKind>,
) -> Result<i32> {
    let setup = ResolvedSetup::load(config_path.as_deref(), seed, scale, repetitions)?;
    let scenarios = generate_workload(&setup.workload, &setup.harness.world)?;
    let options = RunOptions {
        ablation,
        ..setup.options
    };

    let artifacts = run_dtf(&scenarios, &setup.harness, &options)?;

    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating out directory {}", out.display()))?;
    for (idx, ledger) in artifacts.ledgers.iter().enumerate() {
        ledger.write_file(&out.join(format!("run_{idx}.ledger.jsonl")))?;
    }
    proofgate::harness::fixtures::save_json(
        &artifacts.stores.keys,
        &out.join("key_registry.json"),
    )?;
    proofgate::harness::fixtures::save_json(&artifacts.report, &out.join("metrics.json"))?;
    let summary = artifacts.report.text_table();
    std::fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");

    if ablation.is_some() {
        println!("ablation {} complete; invariant gating not applied", options
            .ablation
            .map(|a| a.as_str())
            .unwrap_or("?"));
        return Ok(0);
    }
    if artifacts.report.invariants_exact() {
        println!(
            "run complete: {} records, all invariant metrics at 100%",
            artifacts.report.records
        );
        Ok(0)
    } else {
        eprintln!("run complete: invariant metrics below 100%");
        Ok(1)
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(ledger_path: PathBuf) -> Result<i32> {
    let text = std::fs::read_to_string(&ledger_path)
        .with_context(|| format!("reading {}", ledger_path.display()))?;
    let integrity = verify_chain(&text);
    match &integrity.first_divergence {
        Some(divergence) => {
            println!(
                "chain: DIVERGENT at line {}: {} ({} entries verified before divergence)",
                divergence.line, divergence.reason, integrity.entries_checked
            );
            return Ok(1);
        }
        None => println!("chain: clean ({} entries verified)", integrity.entries_checked),
    }

    let ledger = Ledger::read_file(&ledger_path)?;
    let completeness = completeness_check(&ledger);
    println!(
        "completeness: {}/{} intents complete, {} orphaned, {} duplicated",
        completeness.complete,
        completeness.total_intents,
        completeness.orphans.len(),
        completeness.duplicates.len()
    );
    for (intent, missing) in &completeness.orphans {
        println!("  orphan {intent}: missing {}", missing.join(", "));
    }
    Ok(if completeness.clean() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

fn load_stores(
    ledger_path: &std::path::Path,
    config_path: Option<&std::path::Path>,
    seed: Option<u64>,
) -> Result<ArtifactStores> {
    let setup = ResolvedSetup::load(config_path, seed, None, None)?;
    let mut stores = ArtifactStores {
        bundles: Default::default(),
        profiles: setup.harness.profiles.clone(),
        keys: Default::default(),
    };
    stores.insert_bundle(setup.harness.bundle.clone());
    // Prefer the key registry persisted next to the ledger; fall back to
    // re-deriving from the seed.
    let registry_path = ledger_path
        .parent()
        .unwrap_or_else(|| std::path::Path::new("."))
        .join("key_registry.json");
    if registry_path.exists() {
        stores.keys = proofgate::harness::fixtures::load_json(&registry_path)?;
    } else {
        let swarm = proofgate::harness::fixtures::swarm_for(
            setup.options.seed,
            &setup.harness.registrations,
            &setup.harness.bundle,
            &setup.harness.world,
            &setup.harness.queued_verdicts,
        );
        stores.keys = swarm.key_registry;
    }
    Ok(stores)
}

fn cmd_replay(
    ledger_path: PathBuf,
    config_path: Option<PathBuf>,
    record: Option<String>,
    seed: Option<u64>,
) -> Result<i32> {
    let stores = load_stores(&ledger_path, config_path.as_deref(), seed)?;
    let ledger = Ledger::read_file(&ledger_path)?;

    let ids: Vec<IntentId> = match &record {
        Some(id) => vec![IntentId::from(id.as_str())],
        None => ledger.intent_ids().cloned().collect(),
    };
    if let Some(id) = &record {
        if ledger.events_for(&IntentId::from(id.as_str())).is_empty() {
            bail!("record {id} not found in {}", ledger_path.display());
        }
    }

    let mut full = 0usize;
    let mut failed = 0usize;
    for intent_id in &ids {
        let record = assemble_record(&ledger, intent_id)?;
        let verdict = replay(&record, &stores);
        if verdict.fully_replayable() {
            full += 1;
            if ids.len() == 1 {
                println!("{intent_id}: all five audit questions answerable and consistent");
            }
        } else {
            failed += 1;
            println!("{intent_id}: REPLAY MISMATCH");
            for finding in &verdict.findings {
                if !(finding.answerable && finding.consistent) {
                    println!("  {}: {}", finding.question, finding.notes.join("; "));
                }
            }
            if let Some(blocked) = &verdict.blocked {
                println!("  blocked: {blocked}");
            }
        }
    }
    println!(
        "replay: {full}/{} records fully replayable, {failed} with mismatches",
        ids.len()
    );
    Ok(if failed == 0 { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

fn cmd_metrics(
    ledger_paths: Vec<PathBuf>,
    config_path: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<i32> {
    let stores = load_stores(&ledger_paths[0], config_path.as_deref(), seed)?;
    let mut ledgers = Vec::new();
    for path in &ledger_paths {
        ledgers.push(Ledger::read_file(path)?);
    }
    let report = compute_metrics(&ledgers, &stores)?;
    print!("{}", report.text_table());
    Ok(0)
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

fn cmd_ablate(
    config_path: Option<PathBuf>,
    out: PathBuf,
    ablation: Option<AblationKind>,
    seed: Option<u64>,
    scale: Option<f64>,
) -> Result<i32> {
    let setup = ResolvedSetup::load(config_path.as_deref(), seed, scale, None)?;
    let scenarios = generate_workload(&setup.workload, &setup.harness.world)?;

    let kinds = match ablation {
        Some(kind) => vec![kind],
        None => vec![
            AblationKind::NoConsensus,
            AblationKind::NoExecutionIdentity,
            AblationKind::NoEvidenceChain,
        ],
    };

    std::fs::create_dir_all(&out)?;
    let mut reports = Vec::new();
    for kind in kinds {
        let report = run_ablation(kind, &scenarios, &setup.harness, &setup.options)?;
        println!(
            "{}: unsafe block {:.1}%, drift executable {}/{}, malformed admitted {}, replay drop {:.1} pts",
            kind.as_str(),
            report.metrics.unsafe_block_rate * 100.0,
            report.drift_attempts_executed,
            report.drift_attempts_total,
            report.malformed_cases_admitted,
            report.replay_drop_vs_full * 100.0
        );
        reports.push(report);
    }

    let baseline_cfg = setup.baseline;
    let b1 = run_baseline_b1(&scenarios, &baseline_cfg);
    let b2 = run_baseline_b2(
        &scenarios,
        &baseline_cfg,
        &setup.harness.world,
        &setup.harness.bundle,
        &setup.harness.aliases,
    );
    println!(
        "baseline b1: unsafe block {:.1}%, replay {:.1}%, mean resources {:.1}",
        b1.unsafe_block_rate * 100.0,
        b1.replay_success * 100.0,
        b1.mean_resources_per_approval
    );
    println!(
        "baseline b2: unsafe block {:.1}%, replay {:.1}%, drift refusal {:.1}%",
        b2.unsafe_block_rate * 100.0,
        b2.replay_success * 100.0,
        b2.drift_refusal_rate * 100.0
    );

    proofgate::harness::fixtures::save_json(&reports, &out.join("ablations.json"))?;
    proofgate::harness::fixtures::save_json(&vec![b1, b2], &out.join("baselines.json"))?;
    Ok(0)
}
