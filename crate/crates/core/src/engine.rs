//! The firing dynamics.
//!
//! At each step a non-input neuron `v` sums, over surviving incoming
//! edges from surviving firing neighbors, the edge weights, and fires
//! exactly when that potential is `>=` its threshold. Failed neurons
//! never fire; failed edges never transmit. Input neurons are driven by
//! the schedule, with failed inputs forced silent.
//!
//! [`execute`] is a pure function: equal arguments give equal traces.
//! [`CompiledNet`] caches the index structures so callers running many
//! executions of one network (the oracle, the fuzzer) pay the
//! compilation once.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::network::{
    validate_network, Configuration, FailurePattern, InputSchedule, NetworkSpec, NetworkViolation,
    NeuronId, NeuronOrder,
};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("network is structurally invalid: {}", format_violations(.0))]
    InvalidNetwork(Vec<NetworkViolation>),
    #[error("unknown neuron {0}")]
    UnknownNeuron(NeuronId),
    #[error("neuron {0} is an input neuron")]
    IsInput(NeuronId),
    #[error("schedule domain does not match the network's input neurons (schedule has {schedule_inputs}, network has {network_inputs})")]
    ScheduleMismatch {
        schedule_inputs: usize,
        network_inputs: usize,
    },
    #[error("inputs for the next step must cover the input neurons exactly")]
    IncompleteInputs,
    #[error("configuration domain does not match the network")]
    ConfigurationMismatch,
    #[error("failure pattern references elements outside the network")]
    PatternOutsideNetwork,
}

fn format_violations(violations: &[NetworkViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Index-compiled network, ready for repeated execution.
#[derive(Debug, Clone)]
pub struct CompiledNet {
    spec: Arc<NetworkSpec>,
    order: Arc<NeuronOrder>,
    is_input: Vec<bool>,
    thresholds: Vec<Option<Rational>>,
    initial: Vec<bool>,
    /// For each neuron, its incoming edges as (source index, weight).
    in_edges: Vec<Vec<(usize, Rational)>>,
    input_indices: Vec<usize>,
}

/// A failure pattern resolved against a compiled network.
struct CompiledFailure {
    neuron_failed: Vec<bool>,
    /// Aligned with `CompiledNet::in_edges`.
    edge_failed: Vec<Vec<bool>>,
}

impl CompiledNet {
    pub fn compile(spec: &NetworkSpec) -> Result<Self, ModelError> {
        let violations = validate_network(spec);
        if !violations.is_empty() {
            return Err(ModelError::InvalidNetwork(violations));
        }
        Ok(Self::compile_unchecked(Arc::new(spec.clone())))
    }

    pub fn compile_arc(spec: Arc<NetworkSpec>) -> Result<Self, ModelError> {
        let violations = validate_network(&spec);
        if !violations.is_empty() {
            return Err(ModelError::InvalidNetwork(violations));
        }
        Ok(Self::compile_unchecked(spec))
    }

    fn compile_unchecked(spec: Arc<NetworkSpec>) -> Self {
        let order = spec.neuron_order();
        let n = order.len();
        let mut is_input = vec![false; n];
        let mut thresholds = vec![None; n];
        let mut initial = vec![false; n];
        let mut in_edges: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        let mut input_indices = Vec::new();

        for (i, id) in order.ids().iter().enumerate() {
            if spec.is_input(id) {
                is_input[i] = true;
                input_indices.push(i);
            } else {
                thresholds[i] = spec.threshold(id).cloned();
                initial[i] = spec.initial_firing(id);
            }
        }
        for (src, dst, w) in spec.edges() {
            let si = order.index_of(src).expect("validated edge endpoint");
            let di = order.index_of(dst).expect("validated edge endpoint");
            in_edges[di].push((si, *w));
        }
        // Sorted by source index so potential sums are evaluated in a
        // fixed order.
        for edges in in_edges.iter_mut() {
            edges.sort_by_key(|(src, _)| *src);
        }

        CompiledNet {
            spec,
            order,
            is_input,
            thresholds,
            initial,
            in_edges,
            input_indices,
        }
    }

    pub fn spec(&self) -> &Arc<NetworkSpec> {
        &self.spec
    }

    pub fn order(&self) -> &Arc<NeuronOrder> {
        &self.order
    }

    fn compile_failure(&self, failure: &FailurePattern) -> Result<CompiledFailure, ModelError> {
        if !failure.subset_of(&self.spec) {
            return Err(ModelError::PatternOutsideNetwork);
        }
        let n = self.order.len();
        let mut neuron_failed = vec![false; n];
        for id in failure.failed_neurons.iter() {
            let i = self.order.index_of(id).expect("subset checked");
            neuron_failed[i] = true;
        }
        let mut edge_failed: Vec<Vec<bool>> = self
            .in_edges
            .iter()
            .map(|edges| vec![false; edges.len()])
            .collect();
        for (src, dst) in failure.failed_edges.iter() {
            let si = self.order.index_of(src).expect("subset checked");
            let di = self.order.index_of(dst).expect("subset checked");
            let pos = self.in_edges[di]
                .binary_search_by_key(&si, |(s, _)| *s)
                .expect("subset checked");
            edge_failed[di][pos] = true;
        }
        Ok(CompiledFailure {
            neuron_failed,
            edge_failed,
        })
    }

    fn potential_at(&self, prev: &[bool], failure: &CompiledFailure, index: usize) -> Rational {
        let mut pot = Rational::zero();
        for (pos, (src, weight)) in self.in_edges[index].iter().enumerate() {
            if prev[*src] && !failure.edge_failed[index][pos] {
                pot += weight;
            }
        }
        pot
    }

    fn step_rows(
        &self,
        prev: &[bool],
        inputs_next: &[bool],
        failure: &CompiledFailure,
        next: &mut Vec<bool>,
    ) {
        next.clear();
        next.resize(self.order.len(), false);
        for (pos, i) in self.input_indices.iter().enumerate() {
            next[*i] = inputs_next[pos] && !failure.neuron_failed[*i];
        }
        for (i, slot) in next.iter_mut().enumerate() {
            if self.is_input[i] || failure.neuron_failed[i] {
                continue;
            }
            let threshold = self.thresholds[i].as_ref().expect("validated non-input");
            let pot = self.potential_at(prev, failure, i);
            *slot = pot >= *threshold;
        }
    }

    /// Runs the network over the whole schedule under the failure
    /// pattern. Deterministic: identical arguments yield identical
    /// traces.
    pub fn execute(
        &self,
        schedule: &InputSchedule,
        failure: &FailurePattern,
    ) -> Result<ExecutionTrace, ModelError> {
        // The schedule must cover the network's input neurons exactly.
        let matches = schedule.inputs().len() == self.input_indices.len()
            && schedule
                .inputs()
                .iter()
                .zip(self.input_indices.iter())
                .all(|(id, i)| self.order.id(*i) == id);
        if !matches {
            return Err(ModelError::ScheduleMismatch {
                schedule_inputs: schedule.inputs().len(),
                network_inputs: self.input_indices.len(),
            });
        }
        let compiled_failure = self.compile_failure(failure)?;

        let mut rows: Vec<Vec<bool>> = Vec::with_capacity(schedule.horizon() + 1);
        let mut first = self.initial.clone();
        for (pos, i) in self.input_indices.iter().enumerate() {
            first[*i] = schedule.row(0)[pos];
        }
        for (i, failed) in compiled_failure.neuron_failed.iter().enumerate() {
            if *failed {
                first[i] = false;
            }
        }
        rows.push(first);

        let mut next = Vec::new();
        for t in 0..schedule.horizon() {
            self.step_rows(
                rows.last().expect("at least the initial row"),
                schedule.row(t + 1),
                &compiled_failure,
                &mut next,
            );
            rows.push(std::mem::take(&mut next));
        }

        Ok(ExecutionTrace {
            network: Arc::clone(&self.spec),
            failure: Arc::new(failure.clone()),
            order: Arc::clone(&self.order),
            rows,
        })
    }
}

/// The recorded configurations `C(0), ..., C(horizon)` of one
/// execution, along with the network and failure pattern in force.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    network: Arc<NetworkSpec>,
    failure: Arc<FailurePattern>,
    order: Arc<NeuronOrder>,
    rows: Vec<Vec<bool>>,
}

impl ExecutionTrace {
    /// Assembles a trace from raw firing rows without running the
    /// engine. Shape is validated; the failure-masking invariant is
    /// not, so consistency checkers can be exercised against traces
    /// that break it.
    pub fn from_rows(
        network: Arc<NetworkSpec>,
        failure: Arc<FailurePattern>,
        rows: Vec<Vec<bool>>,
    ) -> Result<Self, ModelError> {
        let order = network.neuron_order();
        if rows.is_empty() || rows.iter().any(|r| r.len() != order.len()) {
            return Err(ModelError::ConfigurationMismatch);
        }
        Ok(ExecutionTrace {
            network,
            failure,
            order,
            rows,
        })
    }

    pub fn network(&self) -> &Arc<NetworkSpec> {
        &self.network
    }

    pub fn failure(&self) -> &Arc<FailurePattern> {
        &self.failure
    }

    pub fn order(&self) -> &Arc<NeuronOrder> {
        &self.order
    }

    /// Number of recorded configurations (`horizon + 1`).
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn fired(&self, time: usize, id: &NeuronId) -> Option<bool> {
        let row = self.rows.get(time)?;
        self.order.index_of(id).map(|i| row[i])
    }

    pub(crate) fn fired_by_index(&self, time: usize, index: usize) -> bool {
        self.rows[time][index]
    }

    pub fn row(&self, time: usize) -> &[bool] {
        &self.rows[time]
    }

    pub fn config(&self, time: usize) -> Option<Configuration> {
        self.rows
            .get(time)
            .map(|row| Configuration::new(Arc::clone(&self.order), row.clone()))
    }

    pub fn configs(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.rows.len()).map(|t| self.config(t).expect("in range"))
    }

    /// All firing `(time, neuron)` events in time-major order.
    pub fn firing_events(&self) -> impl Iterator<Item = (usize, &NeuronId)> {
        self.rows.iter().enumerate().flat_map(move |(t, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, fired)| **fired)
                .map(move |(i, _)| (t, self.order.id(i)))
        })
    }
}

/// Potential incoming to non-input neuron `v` given the previous
/// configuration: the sum of `weight(u, v)` over in-neighbors `u` that
/// fired, skipping failed edges. (Failed neurons never fire, so they
/// drop out of the sum through `prev` itself; with the empty pattern
/// this is the plain abstract sum.)
pub fn incoming_potential(
    net: &NetworkSpec,
    prev: &Configuration,
    v: &NeuronId,
    failure: &FailurePattern,
) -> Result<Rational, ModelError> {
    if !net.contains(v) {
        return Err(ModelError::UnknownNeuron(v.clone()));
    }
    if net.is_input(v) {
        return Err(ModelError::IsInput(v.clone()));
    }
    if prev.order().len() != net.neuron_count() {
        return Err(ModelError::ConfigurationMismatch);
    }
    let mut pot = Rational::zero();
    for (u, weight) in net.in_neighbors(v) {
        if failure.edge_failed(u, v) {
            continue;
        }
        let fired = prev.fired(u).ok_or(ModelError::ConfigurationMismatch)?;
        if fired {
            pot += weight;
        }
    }
    Ok(pot)
}

/// One synchronous transition. Input neurons take `inputs_next` (failed
/// inputs forced silent); each non-input fires iff its incoming
/// potential meets its threshold and it has not failed.
pub fn step(
    net: &NetworkSpec,
    prev: &Configuration,
    inputs_next: &BTreeMap<NeuronId, bool>,
    failure: &FailurePattern,
) -> Result<Configuration, ModelError> {
    let compiled = CompiledNet::compile(net)?;
    if !failure.subset_of(net) {
        return Err(ModelError::PatternOutsideNetwork);
    }
    if prev.order().as_ref() != compiled.order.as_ref() {
        return Err(ModelError::ConfigurationMismatch);
    }
    if inputs_next.len() != net.inputs().len()
        || !inputs_next.keys().all(|id| net.is_input(id))
    {
        return Err(ModelError::IncompleteInputs);
    }
    let compiled_failure = compiled.compile_failure(failure)?;
    let input_row: Vec<bool> = compiled
        .input_indices
        .iter()
        .map(|i| inputs_next[compiled.order.id(*i)])
        .collect();
    let mut next = Vec::new();
    compiled.step_rows(prev.bits(), &input_row, &compiled_failure, &mut next);
    Ok(Configuration::new(Arc::clone(&compiled.order), next))
}

/// Runs `net` over the schedule under `failure`, producing the full
/// trace `C(0), ..., C(horizon)`.
pub fn execute(
    net: &NetworkSpec,
    schedule: &InputSchedule,
    failure: &FailurePattern,
) -> Result<ExecutionTrace, ModelError> {
    CompiledNet::compile(net)?.execute(schedule, failure)
}
