//! Repeated randomized trials against one derived correspondence.
//!
//! Trial `i` reruns the base random policy with seed
//! `base_seed.wrapping_add(i)`, so any trial replays from the summary
//! line alone. A violating trial is additionally written out as a
//! counterexample manifest (plus the concrete pattern file) that
//! `spikemap check --manifest` reproduces exactly.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use spikemap_core::check::{
    check_actuator_theorem, check_firing_theorem, check_nonfiring_theorem, check_run_consistency,
    classify_cells, CheckError, Correspondence,
};
use spikemap_core::failures::GeneratorPolicy;
use spikemap_core::network::InputSchedule;
use spikemap_core::GenerateError;

use crate::files;
use crate::manifest::Manifest;

pub struct FuzzSettings {
    pub trials: u64,
    pub base_policy: GeneratorPolicy,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct TrialOutcome {
    pub trial: u64,
    pub seed: u64,
    pub detail: String,
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Default)]
pub struct FuzzOutcome {
    pub trials: u64,
    pub passed: u64,
    pub violations: Vec<TrialOutcome>,
    pub generation_failures: Vec<TrialOutcome>,
}

/// Names every broken claim of one run, or `None` when all checks pass.
fn run_verdict(
    ctx: &Correspondence,
    run: &spikemap_core::check::CorrespondingRun,
) -> Result<Option<String>, CheckError> {
    let mut problems = Vec::new();
    let firing = check_firing_theorem(run);
    if !firing.passed() {
        problems.push(format!("{} firing violations", firing.violations.len()));
    }
    let nonfiring = check_nonfiring_theorem(run);
    if !nonfiring.passed() {
        problems.push(format!("{} nonfiring violations", nonfiring.violations.len()));
    }
    if ctx.actuator().is_some() {
        let actuator = check_actuator_theorem(run)?;
        if !actuator.passed() {
            problems.push(format!("{} actuator violations", actuator.violations.len()));
        }
    }
    let classes = classify_cells(run);
    if !classes.anomalies.is_empty() {
        problems.push(format!("{} anomalies", classes.anomalies.len()));
    }
    let consistency = check_run_consistency(run);
    if !consistency.is_empty() {
        problems.push(format!("{} consistency issues", consistency.len()));
    }
    Ok(if problems.is_empty() {
        None
    } else {
        Some(problems.join(", "))
    })
}

fn write_counterexample(
    base: &Manifest,
    seed: u64,
    trial: u64,
    pattern: &spikemap_core::network::FailurePattern,
    out_dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let pattern_path = out_dir.join(format!("counterexample_trial{trial}_pattern.toml"));
    files::save_failure(&pattern_path, pattern)?;

    let mut manifest = base.clone();
    manifest.failures.seed = seed;
    manifest.output = Default::default();
    let manifest_path = out_dir.join(format!("counterexample_trial{trial}.toml"));
    manifest.save(&manifest_path)?;
    Ok(manifest_path)
}

pub fn run_trials(
    ctx: &Correspondence,
    settings: &FuzzSettings,
    schedule: &InputSchedule,
    base_manifest: &Manifest,
) -> Result<FuzzOutcome> {
    let mut outcome = FuzzOutcome {
        trials: settings.trials,
        ..FuzzOutcome::default()
    };
    let mut seed_log = String::new();

    for trial in 0..settings.trials {
        let seed = settings.base_policy.seed.wrapping_add(trial);
        let mut policy = settings.base_policy.clone();
        policy.seed = seed;
        seed_log.push_str(&format!("trial {trial}: seed {seed}\n"));

        let pattern = match ctx.generate_failure(&policy) {
            Ok(pattern) => pattern,
            Err(CheckError::Generate(GenerateError::Exhausted { attempts })) => {
                outcome.generation_failures.push(TrialOutcome {
                    trial,
                    seed,
                    detail: format!("no valid pattern after {attempts} attempts"),
                    manifest: None,
                });
                continue;
            }
            Err(other) => return Err(other.into()),
        };
        let run = ctx.run(pattern.clone(), schedule)?;
        match run_verdict(ctx, &run)? {
            None => outcome.passed += 1,
            Some(detail) => {
                let manifest = match &settings.out_dir {
                    Some(dir) => {
                        Some(write_counterexample(base_manifest, seed, trial, &pattern, dir)?)
                    }
                    None => None,
                };
                outcome.violations.push(TrialOutcome {
                    trial,
                    seed,
                    detail,
                    manifest,
                });
            }
        }
    }

    if let Some(dir) = &settings.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("seeds.log"), seed_log)
            .with_context(|| format!("writing {}", dir.join("seeds.log").display()))?;
    }
    Ok(outcome)
}
