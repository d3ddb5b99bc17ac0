//! Implementations behind the subcommands. Each returns the process
//! exit code; hard errors bubble up as `anyhow::Error` and exit with
//! the usage code.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use spikemap_core::check::{
    check_actuator_theorem, check_firing_theorem, check_nonfiring_theorem, check_run_consistency,
    classify_cells, CheckError, Correspondence, TheoremReport,
};
use spikemap_core::derive::{derive_a2, derive_d, CopiesMap, DerivationParams};
use spikemap_core::engine::execute;
use spikemap_core::network::{FailurePattern, InputSchedule, NetworkSpec, NeuronId};
use spikemap_core::oracle::{exhaustive_verify, EnumerationLimits};
use spikemap_core::rational::format_rational;

use crate::exit_codes;
use crate::files;
use crate::fuzz::{self, FuzzSettings};
use crate::manifest::{FailureSource, Manifest};
use crate::report;

/// Everything a manifest resolves to, ready to execute.
pub struct ResolvedRun {
    pub manifest: Manifest,
    pub base_dir: PathBuf,
    pub a1: NetworkSpec,
    pub params: Option<DerivationParams>,
    pub failure_source: FailureSource,
    pub schedule: InputSchedule,
    pub actuator: Option<NeuronId>,
    pub detailed: Option<(NetworkSpec, CopiesMap)>,
}

pub fn resolve_manifest(manifest: Manifest, base_dir: &Path) -> Result<ResolvedRun> {
    let a1 = manifest.network.resolve(base_dir)?;
    let params = manifest
        .derivation
        .as_ref()
        .map(|d| d.resolve())
        .transpose()?;
    let failure_source = manifest.failures.resolve(base_dir)?;
    let schedule = manifest.schedule.resolve(&a1, base_dir)?;
    let actuator = manifest.actuator.as_ref().map(|a| NeuronId::from(a.as_str()));
    let detailed = match &manifest.detailed {
        None => None,
        Some(section) => {
            let d = files::load_network(&crate::manifest::resolve_path(base_dir, &section.network))?;
            let map = files::load_copies(&crate::manifest::resolve_path(base_dir, &section.copies))?;
            Some((d, map))
        }
    };
    Ok(ResolvedRun {
        manifest,
        base_dir: base_dir.to_path_buf(),
        a1,
        params,
        failure_source,
        schedule,
        actuator,
        detailed,
    })
}

fn correspondence_for(resolved: &ResolvedRun) -> Result<(Correspondence, DerivationParams)> {
    let params = resolved
        .params
        .clone()
        .ok_or_else(|| anyhow!("this command requires derivation parameters (--m, --sv, --se)"))?;
    let ctx = match (&resolved.detailed, &resolved.actuator) {
        (Some(_), Some(_)) => {
            bail!("--actuator cannot be combined with an explicit detailed network override")
        }
        (Some((d, map)), None) => Correspondence::from_parts(
            resolved.a1.clone(),
            derive_a2(&resolved.a1, &params)?,
            d.clone(),
            map.clone(),
            params.clone(),
        )?,
        (None, Some(target)) => {
            Correspondence::with_actuator(&resolved.a1, params.clone(), target)?
        }
        (None, None) => Correspondence::new(&resolved.a1, params.clone())?,
    };
    Ok((ctx, params))
}

fn failure_for(ctx: &Correspondence, source: &FailureSource) -> Result<FailurePattern, CheckError> {
    match source {
        FailureSource::Policy(policy) => ctx.generate_failure(policy),
        FailureSource::File(pattern) => Ok(pattern.clone()),
    }
}

// ---------------------------------------------------------------------
// build

pub fn cmd_build(net: &crate::manifest::NetworkSource, out: &Path) -> Result<i32> {
    let network = net.resolve(Path::new("."))?;
    files::save_network(out, &network)?;
    println!(
        "wrote {}: {} neurons, {} edges, {} inputs",
        out.display(),
        network.neuron_count(),
        network.edge_count(),
        network.inputs().len()
    );
    Ok(exit_codes::OK)
}

// ---------------------------------------------------------------------
// derive

pub fn cmd_derive(
    net: &crate::manifest::NetworkSource,
    params: &DerivationParams,
    out_dir: &Path,
) -> Result<i32> {
    let a1 = net.resolve(Path::new("."))?;
    let a2 = derive_a2(&a1, params)?;
    let (d, map) = derive_d(&a1, params)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    files::save_network(&out_dir.join("a2.toml"), &a2)?;
    files::save_network(&out_dir.join("d.toml"), &d)?;
    files::save_copies(&out_dir.join("copies.toml"), &map)?;
    println!(
        "A2: {} neurons, {} edges -> {}",
        a2.neuron_count(),
        a2.edge_count(),
        out_dir.join("a2.toml").display()
    );
    println!(
        "D:  {} neurons, {} edges (m = {}) -> {}",
        d.neuron_count(),
        d.edge_count(),
        params.m(),
        out_dir.join("d.toml").display()
    );
    println!("copies map -> {}", out_dir.join("copies.toml").display());
    Ok(exit_codes::OK)
}

// ---------------------------------------------------------------------
// run

pub fn cmd_run(resolved: &ResolvedRun, out: Option<&Path>, raster: bool) -> Result<i32> {
    let trace = match &resolved.params {
        None => {
            // Abstract run of A1 itself; only explicit patterns (or
            // none) make sense without a derivation.
            let pattern = match &resolved.failure_source {
                FailureSource::Policy(policy)
                    if policy.kind == spikemap_core::failures::PolicyKind::None =>
                {
                    FailurePattern::empty()
                }
                FailureSource::Policy(_) => bail!(
                    "failure policies other than `none` need derivation parameters; \
                     pass --m/--sv/--se or use --failures <file>"
                ),
                FailureSource::File(pattern) => pattern.clone(),
            };
            execute(&resolved.a1, &resolved.schedule, &pattern)?
        }
        Some(_) => {
            let (ctx, _) = correspondence_for(resolved)?;
            let failure = failure_for(&ctx, &resolved.failure_source)?;
            let run = ctx.run(failure, &resolved.schedule)?;
            run.trace_d
        }
    };

    let out = out.or(resolved.manifest.output.trace.as_deref());
    match out {
        Some(path) => {
            files::save_trace_csv(path, &trace)?;
            println!(
                "wrote {} ({} firing events, horizon {})",
                path.display(),
                trace.firing_events().count(),
                trace.horizon()
            );
        }
        None => print!("{}", files::trace_to_csv(&trace)),
    }
    if raster {
        print!("{}", files::trace_to_raster(&trace));
    }
    Ok(exit_codes::OK)
}

// ---------------------------------------------------------------------
// check

pub fn cmd_check(resolved: &ResolvedRun, out: Option<&Path>) -> Result<i32> {
    let (ctx, _) = correspondence_for(resolved)?;
    let failure = failure_for(&ctx, &resolved.failure_source)?;
    let run = ctx.run(failure, &resolved.schedule)?;

    let mut reports: Vec<TheoremReport> =
        vec![check_firing_theorem(&run), check_nonfiring_theorem(&run)];
    if run.actuator.is_some() {
        reports.push(check_actuator_theorem(&run)?);
    }
    let classes = classify_cells(&run);
    let consistency = check_run_consistency(&run);

    let report_file = report::build_check_report(&run, &reports, &classes, &consistency);
    for section in &report_file.theorems {
        println!(
            "theorem {}: {} ({} violations)",
            section.theorem,
            if section.passed { "PASS" } else { "FAIL" },
            section.violations
        );
    }
    println!(
        "cells: {} fires-A1, {} silent-A2, {} middle, {} anomalies",
        classes.fires_a1,
        classes.silent_a2,
        classes.middle,
        classes.anomalies.len()
    );
    if let Some(min) = report_file.min_firing_copies {
        println!(
            "firing margin: min {} copies per firing cell (bound {})",
            min, report_file.required_firing_copies
        );
    }
    for (neuron, time) in &classes.anomalies {
        println!("anomaly: {neuron} fires in A1 but not in A2 at time {time}");
    }
    for issue in &consistency {
        println!("consistency: {issue}");
    }
    for violation in &report_file.violations {
        println!(
            "violation: {} claim broken for {} at time {} (observed {}, required {})",
            violation.claim, violation.neuron, violation.time, violation.observed,
            violation.required
        );
    }

    let out = out.or(resolved.manifest.output.report.as_deref());
    if let Some(path) = out {
        report::save_toml(path, &report_file)?;
        println!("report -> {}", path.display());
    }
    Ok(if report_file.passed {
        exit_codes::OK
    } else {
        exit_codes::VIOLATIONS
    })
}

// ---------------------------------------------------------------------
// fuzz

pub fn cmd_fuzz(resolved: &ResolvedRun, trials: u64, out_dir: Option<&Path>) -> Result<i32> {
    let (ctx, _) = correspondence_for(resolved)?;
    let FailureSource::Policy(policy) = &resolved.failure_source else {
        bail!("fuzz requires the random failure policy, not a pattern file");
    };
    if policy.kind != spikemap_core::failures::PolicyKind::RandomIid {
        bail!("fuzz requires --failures random");
    }
    let settings = FuzzSettings {
        trials,
        base_policy: policy.clone(),
        out_dir: out_dir.map(|p| p.to_path_buf()),
    };
    let outcome = fuzz::run_trials(&ctx, &settings, &resolved.schedule, &resolved.manifest)?;

    println!(
        "fuzz: {} trials, {} passed, {} violating, {} generation failures (trial seed = base seed + trial index)",
        outcome.trials,
        outcome.passed,
        outcome.violations.len(),
        outcome.generation_failures.len()
    );
    for v in &outcome.violations {
        match &v.manifest {
            Some(path) => println!(
                "violation in trial {} (seed {}): {} -> replay with check --manifest {}",
                v.trial,
                v.seed,
                v.detail,
                path.display()
            ),
            None => println!("violation in trial {} (seed {}): {}", v.trial, v.seed, v.detail),
        }
    }
    for g in &outcome.generation_failures {
        println!("generation failure in trial {} (seed {}): {}", g.trial, g.seed, g.detail);
    }

    if !outcome.violations.is_empty() {
        Ok(exit_codes::VIOLATIONS)
    } else if !outcome.generation_failures.is_empty() {
        Ok(exit_codes::USAGE)
    } else {
        Ok(exit_codes::OK)
    }
}

// ---------------------------------------------------------------------
// oracle

pub struct OracleArgs {
    pub net: crate::manifest::NetworkSource,
    pub params: DerivationParams,
    pub horizon: usize,
    pub actuator: Option<NeuronId>,
    pub max_schedules: Option<u64>,
    pub max_patterns: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<i32> {
    let a1 = args.net.resolve(Path::new("."))?;
    let mut limits = EnumerationLimits::with_horizon(args.horizon);
    if let Some(cap) = args.max_schedules {
        limits.max_schedules = cap;
    }
    if let Some(cap) = args.max_patterns {
        limits.max_patterns = cap;
    }
    let summary = exhaustive_verify(&a1, &args.params, &limits, args.actuator.as_ref())?;

    println!(
        "oracle: {} schedules x {} patterns = {} runs checked, {} violations{}{}",
        summary.schedules_enumerated,
        summary.patterns_enumerated,
        summary.runs_checked,
        summary.violation_count,
        if summary.schedules_capped { " [schedules capped]" } else { "" },
        if summary.patterns_capped { " [patterns capped]" } else { "" },
    );
    for v in summary.violations.iter().take(20) {
        println!(
            "violation: schedule {} pattern {}: {} claim broken for {} at time {} (observed {}, required {})",
            v.schedule_index,
            v.pattern_index,
            v.claim.as_str(),
            v.neuron,
            v.time,
            v.observed,
            format_rational(&v.required)
        );
    }
    if let Some(path) = &args.out {
        report::save_toml(path, &report::build_oracle_report(&summary))?;
        println!("report -> {}", path.display());
    }

    Ok(if summary.violation_count > 0 {
        exit_codes::VIOLATIONS
    } else if summary.capped() {
        exit_codes::CAPPED
    } else {
        exit_codes::OK
    })
}
