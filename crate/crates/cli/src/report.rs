//! Serializable reports for the check, fuzz and oracle commands.

use serde::{Deserialize, Serialize};

use spikemap_core::check::{
    CellClassification, ConsistencyIssue, CorrespondingRun, NeuronWitness, TheoremKind,
    TheoremReport, TheoremViolation,
};
use spikemap_core::oracle::VerifySummary;
use spikemap_core::rational::format_rational;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReportFile {
    pub passed: bool,
    pub horizon: usize,
    pub m: u32,
    pub s_v: String,
    pub s_e: String,
    pub failed_neurons: usize,
    pub failed_edges: usize,
    /// Tightest firing margin: the smallest per-cell count of firing
    /// copies over all cells where the abstract neuron fires in A1.
    /// Absent when nothing fires in A1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_firing_copies: Option<usize>,
    /// The bound those counts are compared against, `s_V * m`.
    pub required_firing_copies: String,
    #[serde(default)]
    pub consistency_issues: Vec<String>,
    pub theorems: Vec<TheoremSection>,
    pub classification: ClassificationSection,
    #[serde(default)]
    pub violations: Vec<ViolationEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremSection {
    pub theorem: String,
    pub passed: bool,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationSection {
    pub fires_a1: usize,
    pub silent_a2: usize,
    pub middle: usize,
    #[serde(default)]
    pub middle_cells: Vec<CellRef>,
    #[serde(default)]
    pub anomalies: Vec<CellRef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRef {
    pub neuron: String,
    pub time: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationEntry {
    pub claim: String,
    pub neuron: String,
    pub time: usize,
    pub observed: usize,
    pub required: String,
    #[serde(default)]
    pub witnesses: Vec<WitnessEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub neuron: String,
    pub fired: bool,
    pub survived: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    /// `neuron*weight` rendering of each firing in-neighbor over a
    /// surviving edge.
    #[serde(default)]
    pub firing_in_neighbors: Vec<String>,
}

fn theorem_name(kind: TheoremKind) -> &'static str {
    match kind {
        TheoremKind::Firing => "firing",
        TheoremKind::NonFiring => "nonfiring",
        TheoremKind::Actuator => "actuator",
    }
}

fn witness_entry(witness: &NeuronWitness) -> WitnessEntry {
    WitnessEntry {
        neuron: witness.neuron.to_string(),
        fired: witness.fired,
        survived: witness.survived,
        threshold: witness.threshold.as_ref().map(format_rational),
        potential: witness.potential.as_ref().map(format_rational),
        firing_in_neighbors: witness
            .firing_in_neighbors
            .iter()
            .map(|(n, w)| format!("{n}*{}", format_rational(w)))
            .collect(),
    }
}

fn violation_entry(violation: &TheoremViolation) -> ViolationEntry {
    ViolationEntry {
        claim: violation.claim.as_str().to_string(),
        neuron: violation.neuron.to_string(),
        time: violation.time,
        observed: violation.observed,
        required: format_rational(&violation.required),
        witnesses: violation.witnesses.iter().map(witness_entry).collect(),
    }
}

/// Smallest number of firing copies over the cells where the abstract
/// neuron fires in A1.
fn min_firing_copies(run: &CorrespondingRun) -> Option<usize> {
    let mut min = None;
    for t in 0..=run.trace_a1.horizon() {
        for (v, copies) in run.map.forward() {
            if run.trace_a1.fired(t, v) != Some(true) {
                continue;
            }
            let firing = copies
                .iter()
                .filter(|c| run.trace_d.fired(t, c) == Some(true))
                .count();
            min = Some(min.map_or(firing, |m: usize| m.min(firing)));
        }
    }
    min
}

pub fn build_check_report(
    run: &CorrespondingRun,
    theorem_reports: &[TheoremReport],
    classes: &CellClassification,
    consistency: &[ConsistencyIssue],
) -> CheckReportFile {
    let theorems: Vec<TheoremSection> = theorem_reports
        .iter()
        .map(|r| TheoremSection {
            theorem: theorem_name(r.theorem).to_string(),
            passed: r.passed(),
            violations: r.violations.len(),
        })
        .collect();
    let violations: Vec<ViolationEntry> = theorem_reports
        .iter()
        .flat_map(|r| r.violations.iter().map(violation_entry))
        .collect();
    let cell_refs = |cells: &[(spikemap_core::network::NeuronId, usize)]| {
        cells
            .iter()
            .map(|(n, t)| CellRef {
                neuron: n.to_string(),
                time: *t,
            })
            .collect::<Vec<_>>()
    };
    let passed = violations.is_empty() && classes.anomalies.is_empty() && consistency.is_empty();
    CheckReportFile {
        passed,
        horizon: run.horizon(),
        m: run.params.m(),
        s_v: format_rational(run.params.s_v()),
        s_e: format_rational(run.params.s_e()),
        failed_neurons: run.failure.failed_neurons.len(),
        failed_edges: run.failure.failed_edges.len(),
        min_firing_copies: min_firing_copies(run),
        required_firing_copies: format_rational(&run.params.required_copies()),
        consistency_issues: consistency.iter().map(|i| i.to_string()).collect(),
        theorems,
        classification: ClassificationSection {
            fires_a1: classes.fires_a1,
            silent_a2: classes.silent_a2,
            middle: classes.middle,
            middle_cells: cell_refs(&classes.middle_cells),
            anomalies: cell_refs(&classes.anomalies),
        },
        violations,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReportFile {
    pub passed: bool,
    pub capped: bool,
    pub schedules_enumerated: u64,
    pub patterns_enumerated: u64,
    pub runs_checked: u64,
    pub violation_count: u64,
    pub schedules_capped: bool,
    pub patterns_capped: bool,
    #[serde(default)]
    pub violations: Vec<OracleViolationEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleViolationEntry {
    pub schedule_index: u64,
    pub pattern_index: u64,
    pub claim: String,
    pub neuron: String,
    pub time: usize,
    pub observed: usize,
    pub required: String,
}

pub fn build_oracle_report(summary: &VerifySummary) -> OracleReportFile {
    OracleReportFile {
        passed: summary.passed(),
        capped: summary.capped(),
        schedules_enumerated: summary.schedules_enumerated,
        patterns_enumerated: summary.patterns_enumerated,
        runs_checked: summary.runs_checked,
        violation_count: summary.violation_count,
        schedules_capped: summary.schedules_capped,
        patterns_capped: summary.patterns_capped,
        violations: summary
            .violations
            .iter()
            .map(|v| OracleViolationEntry {
                schedule_index: v.schedule_index,
                pattern_index: v.pattern_index,
                claim: v.claim.as_str().to_string(),
                neuron: v.neuron.to_string(),
                time: v.time,
                observed: v.observed,
                required: format_rational(&v.required),
            })
            .collect(),
    }
}

pub fn save_toml<T: Serialize>(path: &std::path::Path, value: &T) -> anyhow::Result<()> {
    let text = toml::to_string_pretty(value)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
