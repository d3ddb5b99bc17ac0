//! Brute-force verification on tiny instances: enumerate *every* input
//! schedule and *every* constraint-satisfying failure pattern, build
//! the corresponding run for each pair, and check all three guarantees.
//!
//! Enumeration order is fixed and documented so runs are reproducible:
//!
//! - schedules count in binary over (time, input) pairs, bit index
//!   `t * |inputs| + i` with inputs sorted, counter ascending;
//! - failure patterns count in binary over the sorted neuron list
//!   (outer) and the sorted edge list (inner), yielding only pairs that
//!   satisfy both survival constraints.
//!
//! Runs are ordered schedule-major: run index = (schedule index,
//! pattern index) lexicographically.

use thiserror::Error;

use crate::check::{
    check_actuator_theorem, check_firing_theorem, check_nonfiring_theorem, CheckError, ClaimKind,
    Correspondence,
};
use crate::derive::{CopiesMap, DerivationParams};
use crate::network::{FailurePattern, InputSchedule, NetworkSpec, NeuronId};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("instance too large for exhaustive pattern enumeration: {neurons} neurons + {edges} edges exceeds {limit} failure bits")]
    InstanceTooLarge {
        neurons: usize,
        edges: usize,
        limit: usize,
    },
}

impl From<crate::engine::ModelError> for OracleError {
    fn from(err: crate::engine::ModelError) -> Self {
        OracleError::Check(CheckError::Model(err))
    }
}

/// Caps for the exhaustive sweep. Defaults allow 2^20 schedules and
/// 2^20 patterns, a desk-scale bound with deterministic abort
/// semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub horizon: usize,
    pub max_schedules: u64,
    pub max_patterns: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            horizon: 4,
            max_schedules: 1 << 20,
            max_patterns: 1 << 20,
        }
    }
}

impl EnumerationLimits {
    pub fn with_horizon(horizon: usize) -> Self {
        EnumerationLimits {
            horizon,
            ..Self::default()
        }
    }
}

/// Lazily yields all `2^(|inputs| * (horizon + 1))` input schedules of
/// `net` in counter order.
pub fn enumerate_schedules(net: &NetworkSpec, horizon: usize) -> ScheduleEnumerator {
    let inputs: Vec<NeuronId> = net.inputs().iter().cloned().collect();
    let bits = inputs.len() * (horizon + 1);
    let total = if bits >= 128 {
        None
    } else {
        Some(1u128 << bits)
    };
    ScheduleEnumerator {
        inputs,
        horizon,
        counter: 0,
        total,
    }
}

pub struct ScheduleEnumerator {
    inputs: Vec<NeuronId>,
    horizon: usize,
    counter: u128,
    total: Option<u128>,
}

impl ScheduleEnumerator {
    /// Total number of schedules, when it fits in 128 bits.
    pub fn total(&self) -> Option<u128> {
        self.total
    }
}

impl Iterator for ScheduleEnumerator {
    type Item = InputSchedule;

    fn next(&mut self) -> Option<InputSchedule> {
        if let Some(total) = self.total {
            if self.counter >= total {
                return None;
            }
        }
        let mut schedule = InputSchedule::silent(self.inputs.iter().cloned(), self.horizon);
        let n = self.inputs.len();
        for t in 0..=self.horizon {
            for (i, input) in self.inputs.iter().enumerate() {
                let bit = t * n + i;
                if self.counter >> bit & 1 == 1 {
                    schedule.set(t, input, true).expect("input in domain");
                }
            }
        }
        self.counter += 1;
        Some(schedule)
    }
}

const MAX_FAILURE_BITS: usize = 32;

/// Lazily yields every failure pattern over `d`'s neurons and edges
/// that satisfies both survival constraints, in the documented counting
/// order. Only feasible for tiny instances; larger ones are rejected
/// outright rather than scanned forever.
pub fn enumerate_failure_patterns(
    d: &NetworkSpec,
    map: &CopiesMap,
    params: &DerivationParams,
) -> Result<PatternEnumerator, OracleError> {
    let neurons: Vec<NeuronId> = d.neurons().iter().cloned().collect();
    let edges: Vec<(NeuronId, NeuronId)> = d
        .edges()
        .map(|(u, v, _)| (u.clone(), v.clone()))
        .collect();
    if neurons.len() + edges.len() > MAX_FAILURE_BITS {
        return Err(OracleError::InstanceTooLarge {
            neurons: neurons.len(),
            edges: edges.len(),
            limit: MAX_FAILURE_BITS,
        });
    }

    // Constraint structures in index space: copies of each abstract
    // neuron, and per (abstract edge, target copy) the source pairs
    // (source neuron index, edge index).
    let index_of_neuron = |id: &NeuronId| neurons.binary_search(id).expect("neuron of d");
    let copy_groups: Vec<Vec<usize>> = map
        .forward()
        .values()
        .map(|copies| copies.iter().map(&index_of_neuron).collect())
        .collect();

    let mut edge_groups: Vec<Vec<(usize, usize)>> = Vec::new();
    for (u, v) in crate::derive::abstract_edges(d, map) {
        let sources = map.copies(&u).expect("abstract source");
        for y in map.copies(&v).expect("abstract target") {
            let group = sources
                .iter()
                .map(|x| {
                    let edge_index = edges
                        .binary_search(&(x.clone(), y.clone()))
                        .expect("derived edge present");
                    (index_of_neuron(x), edge_index)
                })
                .collect();
            edge_groups.push(group);
        }
    }

    Ok(PatternEnumerator {
        neurons,
        edges,
        copy_groups,
        edge_groups,
        required_copies: params.required_copies(),
        required_edges: params.required_edges(),
        neuron_mask: 0,
        edge_mask: 0,
        neuron_mask_valid: false,
        done: false,
    })
}

pub struct PatternEnumerator {
    neurons: Vec<NeuronId>,
    edges: Vec<(NeuronId, NeuronId)>,
    copy_groups: Vec<Vec<usize>>,
    edge_groups: Vec<Vec<(usize, usize)>>,
    required_copies: Rational,
    required_edges: Rational,
    neuron_mask: u64,
    edge_mask: u64,
    neuron_mask_valid: bool,
    done: bool,
}

impl PatternEnumerator {
    fn constraint1_holds(&self, neuron_mask: u64) -> bool {
        self.copy_groups.iter().all(|copies| {
            let surviving = copies
                .iter()
                .filter(|i| neuron_mask >> **i & 1 == 0)
                .count();
            Rational::from_integer(surviving as i64) >= self.required_copies
        })
    }

    fn constraint2_holds(&self, neuron_mask: u64, edge_mask: u64) -> bool {
        self.edge_groups.iter().all(|group| {
            let qualifying = group
                .iter()
                .filter(|(src, edge)| {
                    neuron_mask >> *src & 1 == 0 && edge_mask >> *edge & 1 == 0
                })
                .count();
            Rational::from_integer(qualifying as i64) >= self.required_edges
        })
    }

    fn materialize(&self, neuron_mask: u64, edge_mask: u64) -> FailurePattern {
        let failed_neurons = self
            .neurons
            .iter()
            .enumerate()
            .filter(|(i, _)| neuron_mask >> *i & 1 == 1)
            .map(|(_, id)| id.clone())
            .collect();
        let failed_edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(j, _)| edge_mask >> *j & 1 == 1)
            .map(|(_, e)| e.clone())
            .collect();
        FailurePattern {
            failed_neurons,
            failed_edges,
        }
    }
}

impl Iterator for PatternEnumerator {
    type Item = FailurePattern;

    fn next(&mut self) -> Option<FailurePattern> {
        let neuron_space = 1u64 << self.neurons.len();
        let edge_space = 1u64 << self.edges.len();
        while !self.done {
            if !self.neuron_mask_valid {
                // Advance to the next neuron mask satisfying constraint 1.
                while self.neuron_mask < neuron_space
                    && !self.constraint1_holds(self.neuron_mask)
                {
                    self.neuron_mask += 1;
                }
                if self.neuron_mask >= neuron_space {
                    self.done = true;
                    return None;
                }
                self.neuron_mask_valid = true;
                self.edge_mask = 0;
            }
            while self.edge_mask < edge_space {
                let candidate = self.edge_mask;
                self.edge_mask += 1;
                if self.constraint2_holds(self.neuron_mask, candidate) {
                    return Some(self.materialize(self.neuron_mask, candidate));
                }
            }
            self.neuron_mask += 1;
            self.neuron_mask_valid = false;
        }
        None
    }
}

/// One theorem violation found during the sweep, tagged with the
/// enumeration indices that reproduce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleViolation {
    pub schedule_index: u64,
    pub pattern_index: u64,
    pub claim: ClaimKind,
    pub neuron: NeuronId,
    pub time: usize,
    pub observed: usize,
    pub required: Rational,
}

/// Outcome of [`exhaustive_verify`]. `violations` keeps at most
/// [`VerifySummary::MAX_STORED_VIOLATIONS`] entries (in enumeration
/// order); `violation_count` is always the full count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifySummary {
    pub schedules_enumerated: u64,
    pub patterns_enumerated: u64,
    pub runs_checked: u64,
    pub violation_count: u64,
    pub violations: Vec<OracleViolation>,
    pub schedules_capped: bool,
    pub patterns_capped: bool,
}

impl VerifySummary {
    pub const MAX_STORED_VIOLATIONS: usize = 1000;

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn capped(&self) -> bool {
        self.schedules_capped || self.patterns_capped
    }
}

/// Sweeps every (schedule, constraint-satisfying pattern) pair of the
/// instance: builds the corresponding run, checks the firing and
/// non-firing guarantees, and, when `actuator` names a neuron, the
/// actuator guarantee too.
pub fn exhaustive_verify(
    a1: &NetworkSpec,
    params: &DerivationParams,
    limits: &EnumerationLimits,
    actuator: Option<&NeuronId>,
) -> Result<VerifySummary, OracleError> {
    let ctx = match actuator {
        Some(target) => Correspondence::with_actuator(a1, params.clone(), target)?,
        None => Correspondence::new(a1, params.clone())?,
    };

    // Materialize patterns up to the cap; probe one further to learn
    // whether the cap actually bound.
    let pattern_iter = enumerate_failure_patterns(ctx.base_d(), ctx.map(), params)?;
    let mut patterns = Vec::new();
    let mut patterns_capped = false;
    for pattern in pattern_iter {
        if patterns.len() as u64 == limits.max_patterns {
            patterns_capped = true;
            break;
        }
        patterns.push(pattern);
    }

    let mut summary = VerifySummary {
        schedules_enumerated: 0,
        patterns_enumerated: patterns.len() as u64,
        runs_checked: 0,
        violation_count: 0,
        violations: Vec::new(),
        schedules_capped: false,
        patterns_capped,
    };

    let empty = FailurePattern::empty();
    let mut schedule_index = 0u64;
    for schedule in enumerate_schedules(a1, limits.horizon) {
        if schedule_index == limits.max_schedules {
            summary.schedules_capped = true;
            break;
        }
        let trace_a1 = ctx.compiled_a1().execute(&schedule, &empty)?;
        let trace_a2 = ctx.compiled_a2().execute(&schedule, &empty)?;

        for (pattern_index, pattern) in patterns.iter().enumerate() {
            let run = ctx.run_with_abstract_traces(
                pattern.clone(),
                &schedule,
                trace_a1.clone(),
                trace_a2.clone(),
            )?;
            summary.runs_checked += 1;

            let mut reports = vec![check_firing_theorem(&run), check_nonfiring_theorem(&run)];
            if ctx.actuator().is_some() {
                reports.push(check_actuator_theorem(&run)?);
            }
            for report in reports {
                for violation in report.violations {
                    summary.violation_count += 1;
                    if summary.violations.len() < VerifySummary::MAX_STORED_VIOLATIONS {
                        summary.violations.push(OracleViolation {
                            schedule_index,
                            pattern_index: pattern_index as u64,
                            claim: violation.claim,
                            neuron: violation.neuron,
                            time: violation.time,
                            observed: violation.observed,
                            required: violation.required,
                        });
                    }
                }
            }
        }
        schedule_index += 1;
        summary.schedules_enumerated = schedule_index;
    }

    Ok(summary)
}
