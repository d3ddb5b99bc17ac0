//! Network descriptions and the value types shared by every module.
//!
//! A [`NetworkSpec`] is a weighted digraph with designated input
//! neurons, per-neuron thresholds for the non-inputs, and initial
//! firing states. It is plain immutable data: construction never
//! validates, [`validate_network`] reports every structural violation,
//! and the engine refuses to compile an invalid network.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::rational::Rational;

/// Opaque neuron name, unique within one network.
///
/// Abstract networks use plain names like `"0"` or `"v_11"`; the
/// replication derivation appends `#i` for copy `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeuronId(String);

impl NeuronId {
    pub fn new(name: impl Into<String>) -> Self {
        NeuronId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NeuronId {
    fn from(s: &str) -> Self {
        NeuronId(s.to_string())
    }
}

impl From<String> for NeuronId {
    fn from(s: String) -> Self {
        NeuronId(s)
    }
}

impl Borrow<str> for NeuronId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A fixed, sorted enumeration of a network's neurons.
///
/// Traces and configurations index into this instead of carrying a map
/// per time step; lookups go through binary search so two orders built
/// from equal neuron sets behave identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronOrder {
    ids: Vec<NeuronId>,
}

impl NeuronOrder {
    pub fn from_set(set: &BTreeSet<NeuronId>) -> Self {
        NeuronOrder {
            ids: set.iter().cloned().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[NeuronId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &NeuronId {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &NeuronId) -> Option<usize> {
        self.ids.binary_search(id).ok()
    }
}

/// Firing state of every neuron at one time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    order: Arc<NeuronOrder>,
    bits: Vec<bool>,
}

impl Configuration {
    pub fn new(order: Arc<NeuronOrder>, bits: Vec<bool>) -> Self {
        assert_eq!(order.len(), bits.len(), "configuration domain mismatch");
        Configuration { order, bits }
    }

    /// All-silent configuration over the given neuron order.
    pub fn silent(order: Arc<NeuronOrder>) -> Self {
        let bits = vec![false; order.len()];
        Configuration { order, bits }
    }

    /// Builds a configuration from an explicit total map. The map's
    /// domain must equal the order's neuron set.
    pub fn from_map(
        order: Arc<NeuronOrder>,
        firing: &BTreeMap<NeuronId, bool>,
    ) -> Result<Self, ConfigurationDomainError> {
        if firing.len() != order.len() {
            return Err(ConfigurationDomainError);
        }
        let mut bits = vec![false; order.len()];
        for (id, fired) in firing {
            let Some(i) = order.index_of(id) else {
                return Err(ConfigurationDomainError);
            };
            bits[i] = *fired;
        }
        Ok(Configuration { order, bits })
    }

    pub fn order(&self) -> &Arc<NeuronOrder> {
        &self.order
    }

    pub fn fired(&self, id: &NeuronId) -> Option<bool> {
        self.order.index_of(id).map(|i| self.bits[i])
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn set(&mut self, id: &NeuronId, fired: bool) -> bool {
        match self.order.index_of(id) {
            Some(i) => {
                self.bits[i] = fired;
                true
            }
            None => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NeuronId, bool)> {
        self.order.ids().iter().zip(self.bits.iter().copied())
    }

    pub fn firing_ids(&self) -> impl Iterator<Item = &NeuronId> {
        self.iter().filter(|(_, f)| *f).map(|(id, _)| id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("configuration domain does not match the network's neuron set")]
pub struct ConfigurationDomainError;

/// Which input neurons fire at each time `0..=horizon`.
///
/// Total over its domain by construction: every `(t, input)` pair has a
/// definite value, unmentioned pairs are silent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSchedule {
    horizon: usize,
    inputs: Vec<NeuronId>,
    rows: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("neuron {0} is not in the schedule's input domain")]
    UnknownInput(NeuronId),
    #[error("time {time} exceeds the schedule horizon {horizon}")]
    BeyondHorizon { time: usize, horizon: usize },
}

impl InputSchedule {
    /// All-silent schedule over the given inputs.
    pub fn silent(inputs: impl IntoIterator<Item = NeuronId>, horizon: usize) -> Self {
        let mut inputs: Vec<NeuronId> = inputs.into_iter().collect();
        inputs.sort();
        inputs.dedup();
        let rows = vec![vec![false; inputs.len()]; horizon + 1];
        InputSchedule {
            horizon,
            inputs,
            rows,
        }
    }

    /// Every input fires at time 0 and at no other time.
    pub fn pulse_at_zero(inputs: impl IntoIterator<Item = NeuronId>, horizon: usize) -> Self {
        let mut s = Self::silent(inputs, horizon);
        if let Some(row) = s.rows.first_mut() {
            row.fill(true);
        }
        s
    }

    /// Every input fires at every time `t` with `t % k == 0`. A zero
    /// `k` yields the all-silent schedule.
    pub fn every_k(
        inputs: impl IntoIterator<Item = NeuronId>,
        horizon: usize,
        k: usize,
    ) -> Self {
        let mut s = Self::silent(inputs, horizon);
        if k == 0 {
            return s;
        }
        for (t, row) in s.rows.iter_mut().enumerate() {
            if t % k == 0 {
                row.fill(true);
            }
        }
        s
    }

    /// Sparse constructor: the listed `(time, input)` events fire,
    /// everything else is silent.
    pub fn with_events(
        inputs: impl IntoIterator<Item = NeuronId>,
        horizon: usize,
        events: &[(usize, NeuronId)],
    ) -> Result<Self, ScheduleError> {
        let mut s = Self::silent(inputs, horizon);
        for (t, id) in events {
            s.set(*t, id, true)?;
        }
        Ok(s)
    }

    pub fn set(&mut self, time: usize, id: &NeuronId, fires: bool) -> Result<(), ScheduleError> {
        if time > self.horizon {
            return Err(ScheduleError::BeyondHorizon {
                time,
                horizon: self.horizon,
            });
        }
        match self.inputs.binary_search(id) {
            Ok(i) => {
                self.rows[time][i] = fires;
                Ok(())
            }
            Err(_) => Err(ScheduleError::UnknownInput(id.clone())),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The schedule's input domain, sorted.
    pub fn inputs(&self) -> &[NeuronId] {
        &self.inputs
    }

    pub fn fires(&self, time: usize, id: &NeuronId) -> Option<bool> {
        if time > self.horizon {
            return None;
        }
        self.inputs
            .binary_search(id)
            .ok()
            .map(|i| self.rows[time][i])
    }

    pub(crate) fn row(&self, time: usize) -> &[bool] {
        &self.rows[time]
    }

    /// All firing `(time, input)` events in `(time, input index)` order.
    pub fn events(&self) -> impl Iterator<Item = (usize, &NeuronId)> {
        self.rows.iter().enumerate().flat_map(move |(t, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, f)| **f)
                .map(move |(i, _)| (t, &self.inputs[i]))
        })
    }
}

/// Initially failed neurons and edges; the empty pattern models the
/// reliable abstract case.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailurePattern {
    pub failed_neurons: BTreeSet<NeuronId>,
    pub failed_edges: BTreeSet<(NeuronId, NeuronId)>,
}

impl FailurePattern {
    pub fn empty() -> Self {
        FailurePattern::default()
    }

    pub fn is_empty(&self) -> bool {
        self.failed_neurons.is_empty() && self.failed_edges.is_empty()
    }

    pub fn neuron_failed(&self, id: &NeuronId) -> bool {
        self.failed_neurons.contains(id)
    }

    pub fn edge_failed(&self, src: &NeuronId, dst: &NeuronId) -> bool {
        self.failed_edges
            .contains(&(src.clone(), dst.clone()))
    }

    /// Checks that every referenced element exists in `net`.
    pub fn subset_of(&self, net: &NetworkSpec) -> bool {
        self.failed_neurons.iter().all(|n| net.contains(n))
            && self
                .failed_edges
                .iter()
                .all(|(u, v)| net.weight(u, v).is_some())
    }
}

/// A weighted digraph with input designation, thresholds, and initial
/// firing states. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    neurons: BTreeSet<NeuronId>,
    input_neurons: BTreeSet<NeuronId>,
    edges: BTreeMap<(NeuronId, NeuronId), Rational>,
    thresholds: BTreeMap<NeuronId, Rational>,
    initial_firing: BTreeMap<NeuronId, bool>,
}

impl NetworkSpec {
    /// Assembles a network from parts without validating; run
    /// [`validate_network`] (or compile it) to find out whether the
    /// structural rules hold.
    pub fn new(
        neurons: BTreeSet<NeuronId>,
        input_neurons: BTreeSet<NeuronId>,
        edges: BTreeMap<(NeuronId, NeuronId), Rational>,
        thresholds: BTreeMap<NeuronId, Rational>,
        initial_firing: BTreeMap<NeuronId, bool>,
    ) -> Self {
        NetworkSpec {
            neurons,
            input_neurons,
            edges,
            thresholds,
            initial_firing,
        }
    }

    pub fn neurons(&self) -> &BTreeSet<NeuronId> {
        &self.neurons
    }

    pub fn inputs(&self) -> &BTreeSet<NeuronId> {
        &self.input_neurons
    }

    pub fn contains(&self, id: &NeuronId) -> bool {
        self.neurons.contains(id)
    }

    pub fn is_input(&self, id: &NeuronId) -> bool {
        self.input_neurons.contains(id)
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, src: &NeuronId, dst: &NeuronId) -> Option<&Rational> {
        self.edges.get(&(src.clone(), dst.clone()))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&NeuronId, &NeuronId, &Rational)> {
        self.edges.iter().map(|((u, v), w)| (u, v, w))
    }

    pub fn threshold(&self, id: &NeuronId) -> Option<&Rational> {
        self.thresholds.get(id)
    }

    pub fn thresholds(&self) -> impl Iterator<Item = (&NeuronId, &Rational)> {
        self.thresholds.iter()
    }

    /// Initial firing state of a non-input neuron; unspecified defaults
    /// to silent.
    pub fn initial_firing(&self, id: &NeuronId) -> bool {
        self.initial_firing.get(id).copied().unwrap_or(false)
    }

    pub fn initial_firing_entries(&self) -> impl Iterator<Item = (&NeuronId, bool)> {
        self.initial_firing.iter().map(|(id, f)| (id, *f))
    }

    pub fn neuron_order(&self) -> Arc<NeuronOrder> {
        Arc::new(NeuronOrder::from_set(&self.neurons))
    }

    /// In-neighbors of `v` with their edge weights.
    pub fn in_neighbors<'a>(
        &'a self,
        v: &'a NeuronId,
    ) -> impl Iterator<Item = (&'a NeuronId, &'a Rational)> {
        self.edges
            .iter()
            .filter(move |((_, dst), _)| dst == v)
            .map(|((src, _), w)| (src, w))
    }
}

/// One structural rule breach found by [`validate_network`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetworkViolation {
    /// `input_neurons` names an id missing from `neurons`.
    InputNotANeuron { input: NeuronId },
    /// An edge terminates at an input neuron (inputs have no incoming
    /// edges, self-loops included).
    EdgeIntoInput { src: NeuronId, dst: NeuronId },
    /// A self-loop sits on an input neuron.
    SelfLoopOnInput { neuron: NeuronId },
    /// An edge endpoint is not in the neuron set.
    EdgeEndpointUnknown { src: NeuronId, dst: NeuronId, unknown: NeuronId },
    /// A non-input neuron has no threshold.
    MissingThreshold { neuron: NeuronId },
    /// A threshold is declared for an input neuron.
    ThresholdOnInput { neuron: NeuronId },
    /// A threshold is declared for an id outside the neuron set.
    ThresholdForUnknown { neuron: NeuronId },
    /// Initial firing is declared for an input neuron (inputs are
    /// driven externally).
    InitialFiringOnInput { neuron: NeuronId },
    /// Initial firing is declared for an id outside the neuron set.
    InitialFiringForUnknown { neuron: NeuronId },
}

impl fmt::Display for NetworkViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkViolation::InputNotANeuron { input } => {
                write!(f, "input neuron {input} is not in the neuron set")
            }
            NetworkViolation::EdgeIntoInput { src, dst } => {
                write!(f, "edge ({src}, {dst}) terminates at input neuron {dst}")
            }
            NetworkViolation::SelfLoopOnInput { neuron } => {
                write!(f, "self-loop on input neuron {neuron}")
            }
            NetworkViolation::EdgeEndpointUnknown { src, dst, unknown } => {
                write!(f, "edge ({src}, {dst}) references unknown neuron {unknown}")
            }
            NetworkViolation::MissingThreshold { neuron } => {
                write!(f, "non-input neuron {neuron} has no threshold")
            }
            NetworkViolation::ThresholdOnInput { neuron } => {
                write!(f, "threshold declared for input neuron {neuron}")
            }
            NetworkViolation::ThresholdForUnknown { neuron } => {
                write!(f, "threshold declared for unknown neuron {neuron}")
            }
            NetworkViolation::InitialFiringOnInput { neuron } => {
                write!(f, "initial firing declared for input neuron {neuron}")
            }
            NetworkViolation::InitialFiringForUnknown { neuron } => {
                write!(f, "initial firing declared for unknown neuron {neuron}")
            }
        }
    }
}

/// Reports every structural violation in `net`; an empty list means the
/// network is valid.
pub fn validate_network(net: &NetworkSpec) -> Vec<NetworkViolation> {
    let mut violations = Vec::new();

    for input in net.input_neurons.iter() {
        if !net.neurons.contains(input) {
            violations.push(NetworkViolation::InputNotANeuron {
                input: input.clone(),
            });
        }
    }

    for (src, dst) in net.edges.keys() {
        let mut endpoints_known = true;
        for endpoint in [src, dst] {
            if !net.neurons.contains(endpoint) {
                violations.push(NetworkViolation::EdgeEndpointUnknown {
                    src: src.clone(),
                    dst: dst.clone(),
                    unknown: endpoint.clone(),
                });
                endpoints_known = false;
            }
        }
        if endpoints_known && net.is_input(dst) {
            if src == dst {
                violations.push(NetworkViolation::SelfLoopOnInput {
                    neuron: dst.clone(),
                });
            } else {
                violations.push(NetworkViolation::EdgeIntoInput {
                    src: src.clone(),
                    dst: dst.clone(),
                });
            }
        }
    }

    for neuron in net.neurons.iter() {
        if !net.is_input(neuron) && !net.thresholds.contains_key(neuron) {
            violations.push(NetworkViolation::MissingThreshold {
                neuron: neuron.clone(),
            });
        }
    }
    for neuron in net.thresholds.keys() {
        if !net.neurons.contains(neuron) {
            violations.push(NetworkViolation::ThresholdForUnknown {
                neuron: neuron.clone(),
            });
        } else if net.is_input(neuron) {
            violations.push(NetworkViolation::ThresholdOnInput {
                neuron: neuron.clone(),
            });
        }
    }

    for neuron in net.initial_firing.keys() {
        if !net.neurons.contains(neuron) {
            violations.push(NetworkViolation::InitialFiringForUnknown {
                neuron: neuron.clone(),
            });
        } else if net.is_input(neuron) {
            violations.push(NetworkViolation::InitialFiringOnInput {
                neuron: neuron.clone(),
            });
        }
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_line, LinePersistence, LineParams};
    use crate::rational::rat;

    fn id(s: &str) -> NeuronId {
        NeuronId::from(s)
    }

    #[test]
    fn line_network_is_valid() {
        let net = build_line(&LineParams {
            lmax: 5,
            persistence: LinePersistence::PulseOnly,
        })
        .unwrap();
        assert!(validate_network(&net).is_empty());
    }

    #[test]
    fn edge_into_input_is_one_violation() {
        let neurons: BTreeSet<_> = [id("0"), id("1")].into();
        let inputs: BTreeSet<_> = [id("0")].into();
        let edges: BTreeMap<_, _> = [((id("1"), id("0")), rat(1, 1))].into();
        let thresholds: BTreeMap<_, _> = [(id("1"), rat(1, 1))].into();
        let net = NetworkSpec::new(neurons, inputs, edges, thresholds, BTreeMap::new());
        let violations = validate_network(&net);
        assert_eq!(
            violations,
            vec![NetworkViolation::EdgeIntoInput {
                src: id("1"),
                dst: id("0"),
            }]
        );
    }

    #[test]
    fn self_loop_on_input_is_one_violation() {
        let neurons: BTreeSet<_> = [id("0"), id("1")].into();
        let inputs: BTreeSet<_> = [id("0")].into();
        let edges: BTreeMap<_, _> = [((id("0"), id("0")), rat(1, 1))].into();
        let thresholds: BTreeMap<_, _> = [(id("1"), rat(1, 1))].into();
        let net = NetworkSpec::new(neurons, inputs, edges, thresholds, BTreeMap::new());
        let violations = validate_network(&net);
        assert_eq!(
            violations,
            vec![NetworkViolation::SelfLoopOnInput { neuron: id("0") }]
        );
    }

    #[test]
    fn missing_threshold_and_unknown_endpoints_are_reported() {
        let neurons: BTreeSet<_> = [id("0"), id("1")].into();
        let inputs: BTreeSet<_> = [id("0")].into();
        let edges: BTreeMap<_, _> = [((id("0"), id("ghost")), rat(1, 1))].into();
        let net = NetworkSpec::new(neurons, inputs, edges, BTreeMap::new(), BTreeMap::new());
        let violations = validate_network(&net);
        assert!(violations.contains(&NetworkViolation::EdgeEndpointUnknown {
            src: id("0"),
            dst: id("ghost"),
            unknown: id("ghost"),
        }));
        assert!(violations.contains(&NetworkViolation::MissingThreshold { neuron: id("1") }));
    }

    #[test]
    fn threshold_and_initial_firing_on_input_are_violations() {
        let neurons: BTreeSet<_> = [id("0"), id("1")].into();
        let inputs: BTreeSet<_> = [id("0")].into();
        let thresholds: BTreeMap<_, _> = [(id("0"), rat(1, 1)), (id("1"), rat(1, 1))].into();
        let initial: BTreeMap<_, _> = [(id("0"), true)].into();
        let net = NetworkSpec::new(neurons, inputs, BTreeMap::new(), thresholds, initial);
        let violations = validate_network(&net);
        assert!(violations.contains(&NetworkViolation::ThresholdOnInput { neuron: id("0") }));
        assert!(violations.contains(&NetworkViolation::InitialFiringOnInput { neuron: id("0") }));
    }

    #[test]
    fn schedule_events_and_lookup() {
        let mut s = InputSchedule::silent([id("a"), id("b")], 3);
        s.set(0, &id("a"), true).unwrap();
        s.set(2, &id("b"), true).unwrap();
        assert_eq!(s.fires(0, &id("a")), Some(true));
        assert_eq!(s.fires(0, &id("b")), Some(false));
        assert_eq!(s.fires(2, &id("b")), Some(true));
        assert_eq!(s.fires(4, &id("a")), None);
        assert!(s.set(0, &id("c"), true).is_err());
        assert!(s.set(4, &id("a"), true).is_err());
        let events: Vec<_> = s.events().map(|(t, n)| (t, n.clone())).collect();
        assert_eq!(events, vec![(0, id("a")), (2, id("b"))]);
    }

    #[test]
    fn every_k_schedule_matches_modulus() {
        let s = InputSchedule::every_k([id("0")], 7, 2);
        for t in 0..=7 {
            assert_eq!(s.fires(t, &id("0")), Some(t % 2 == 0), "t={t}");
        }
    }
}
