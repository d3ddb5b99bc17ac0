//! Deriving the lowered-threshold network A2 and the replicated
//! detailed network D from an abstract network A1.
//!
//! A2 keeps A1's structure and multiplies every non-input threshold by
//! `s_V * s_E`. D replaces each neuron with `m` copies, each abstract
//! edge with the complete copy-to-copy bundle at weight `w/m`, and
//! gives every non-input copy the same `s_V * s_E * h` threshold as A2.
//! A failure pattern is admissible when every abstract neuron keeps at
//! least `s_V * m` surviving copies and every copy `y` of an edge
//! target keeps at least `s_V * s_E * m` surviving edges from surviving
//! source copies. The second constraint is enforced for failed copies
//! `y` as well, which is the stricter reading of the construction.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::network::{
    validate_network, FailurePattern, InputSchedule, NetworkSpec, NetworkViolation, NeuronId,
};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("abstract network is invalid: {}", crate::derive::join_violations(.0))]
    InvalidNetwork(Vec<NetworkViolation>),
    #[error("replication factor m must be >= 1")]
    ZeroReplication,
    #[error("survival fraction {name} = {value} is outside (0, 1]")]
    SurvivalOutOfRange { name: &'static str, value: String },
    #[error("copies map does not match the detailed network: {0}")]
    MapMismatch(String),
    #[error("failure pattern references elements outside the detailed network")]
    PatternOutsideNetwork,
    #[error("schedule names {0}, which has no copies in the map")]
    UnknownScheduleNeuron(NeuronId),
}

pub(crate) fn join_violations(violations: &[NetworkViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Replication factor and survival fractions shared by A2 and D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationParams {
    m: u32,
    s_v: Rational,
    s_e: Rational,
}

impl DerivationParams {
    pub fn new(m: u32, s_v: Rational, s_e: Rational) -> Result<Self, DeriveError> {
        if m < 1 {
            return Err(DeriveError::ZeroReplication);
        }
        for (name, value) in [("s_V", &s_v), ("s_E", &s_e)] {
            if *value <= Rational::zero() || *value > Rational::from_integer(1) {
                return Err(DeriveError::SurvivalOutOfRange {
                    name,
                    value: format_rational(value),
                });
            }
        }
        Ok(DerivationParams { m, s_v, s_e })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn s_v(&self) -> &Rational {
        &self.s_v
    }

    pub fn s_e(&self) -> &Rational {
        &self.s_e
    }

    /// `s_V * s_E`, the threshold scaling factor.
    pub fn scale(&self) -> Rational {
        self.s_v * self.s_e
    }

    /// Required surviving copies per abstract neuron: `s_V * m`.
    pub fn required_copies(&self) -> Rational {
        self.s_v * Rational::from_integer(self.m as i64)
    }

    /// Required qualifying edges per copy target: `s_V * s_E * m`.
    pub fn required_edges(&self) -> Rational {
        self.scale() * Rational::from_integer(self.m as i64)
    }
}

/// Bookkeeping between abstract neurons and their detailed copies.
///
/// Copy `i` of neuron `v` is named `v#i`; the index order is the fixed
/// numbering that "highest"/"lowest"-numbered failure policies refer
/// to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopiesMap {
    m: u32,
    forward: BTreeMap<NeuronId, Vec<NeuronId>>,
    backward: BTreeMap<NeuronId, NeuronId>,
}

impl CopiesMap {
    fn build(abstract_neurons: &BTreeSet<NeuronId>, m: u32) -> Self {
        let mut forward = BTreeMap::new();
        let mut backward = BTreeMap::new();
        for v in abstract_neurons {
            let copies: Vec<NeuronId> = (0..m)
                .map(|i| NeuronId::from(format!("{v}#{i}")))
                .collect();
            for copy in &copies {
                backward.insert(copy.clone(), v.clone());
            }
            forward.insert(v.clone(), copies);
        }
        CopiesMap {
            m,
            forward,
            backward,
        }
    }

    /// Reassembles a map from its forward table, checking the CopiesMap
    /// invariants (disjoint lists of length `m`).
    pub fn from_forward(
        m: u32,
        forward: BTreeMap<NeuronId, Vec<NeuronId>>,
    ) -> Result<Self, DeriveError> {
        let mut backward = BTreeMap::new();
        for (v, copies) in &forward {
            if copies.len() != m as usize {
                return Err(DeriveError::MapMismatch(format!(
                    "copies({v}) has {} entries, expected m = {m}",
                    copies.len()
                )));
            }
            for copy in copies {
                if backward.insert(copy.clone(), v.clone()).is_some() {
                    return Err(DeriveError::MapMismatch(format!(
                        "copy {copy} is listed more than once"
                    )));
                }
            }
        }
        Ok(CopiesMap {
            m,
            forward,
            backward,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Abstract neurons in sorted order.
    pub fn abstract_neurons(&self) -> impl Iterator<Item = &NeuronId> {
        self.forward.keys()
    }

    pub fn forward(&self) -> &BTreeMap<NeuronId, Vec<NeuronId>> {
        &self.forward
    }

    pub fn copies(&self, v: &NeuronId) -> Option<&[NeuronId]> {
        self.forward.get(v).map(|c| c.as_slice())
    }

    pub fn original(&self, copy: &NeuronId) -> Option<&NeuronId> {
        self.backward.get(copy)
    }

    /// Index of `copy` within its `copies(v)` list.
    pub fn copy_index(&self, copy: &NeuronId) -> Option<usize> {
        let v = self.backward.get(copy)?;
        self.forward[v].iter().position(|c| c == copy)
    }
}

fn validated(a1: &NetworkSpec) -> Result<(), DeriveError> {
    let violations = validate_network(a1);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(DeriveError::InvalidNetwork(violations))
    }
}

/// A2: same neurons, edges, weights, inputs and initial firing as A1,
/// thresholds multiplied by `s_V * s_E`.
pub fn derive_a2(a1: &NetworkSpec, params: &DerivationParams) -> Result<NetworkSpec, DeriveError> {
    validated(a1)?;
    let scale = params.scale();
    let thresholds: BTreeMap<NeuronId, Rational> = a1
        .thresholds()
        .map(|(v, h)| (v.clone(), scale * *h))
        .collect();
    Ok(NetworkSpec::new(
        a1.neurons().clone(),
        a1.inputs().clone(),
        a1.edges()
            .map(|(u, v, w)| ((u.clone(), v.clone()), *w))
            .collect(),
        thresholds,
        a1.initial_firing_entries()
            .map(|(v, f)| (v.clone(), f))
            .collect(),
    ))
}

/// D: `m` copies per neuron (inputs map to inputs, initial firing
/// copied), the complete copy-to-copy bundle at weight `w/m` for each
/// abstract edge, and threshold `s_V * s_E * h` on every non-input
/// copy.
pub fn derive_d(
    a1: &NetworkSpec,
    params: &DerivationParams,
) -> Result<(NetworkSpec, CopiesMap), DeriveError> {
    validated(a1)?;
    let map = CopiesMap::build(a1.neurons(), params.m());
    let scale = params.scale();
    let m_rat = Rational::from_integer(params.m() as i64);

    let mut neurons = BTreeSet::new();
    let mut inputs = BTreeSet::new();
    let mut thresholds = BTreeMap::new();
    let mut initial = BTreeMap::new();
    for v in a1.neurons() {
        let copies = map.copies(v).expect("map covers every abstract neuron");
        for copy in copies {
            neurons.insert(copy.clone());
            if a1.is_input(v) {
                inputs.insert(copy.clone());
            } else {
                let h = *a1.threshold(v).expect("validated non-input");
                thresholds.insert(copy.clone(), scale * h);
                if a1.initial_firing(v) {
                    initial.insert(copy.clone(), true);
                }
            }
        }
    }

    let mut edges = BTreeMap::new();
    for (u, v, w) in a1.edges() {
        let divided = *w / m_rat;
        for x in map.copies(u).expect("known source") {
            for y in map.copies(v).expect("known target") {
                edges.insert((x.clone(), y.clone()), divided);
            }
        }
    }

    let d = NetworkSpec::new(neurons, inputs, edges, thresholds, initial);
    debug_assert!(validate_network(&d).is_empty());
    Ok((d, map))
}

/// A single breached survival constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintViolation {
    /// Constraint 1: fewer than `s_V * m` copies of `neuron` survive.
    NeuronSurvival {
        neuron: NeuronId,
        required: Rational,
        actual: usize,
    },
    /// Constraint 2: copy `target_copy` of `v` keeps fewer than
    /// `s_V * s_E * m` surviving edges from surviving copies of `u`.
    EdgeSurvival {
        edge: (NeuronId, NeuronId),
        target_copy: NeuronId,
        required: Rational,
        actual: usize,
    },
}

impl std::fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintViolation::NeuronSurvival {
                neuron,
                required,
                actual,
            } => write!(
                f,
                "constraint 1: only {actual} copies of {neuron} survive, need >= {}",
                format_rational(required)
            ),
            ConstraintViolation::EdgeSurvival {
                edge: (u, v),
                target_copy,
                required,
                actual,
            } => write!(
                f,
                "constraint 2: edge ({u}, {v}): only {actual} surviving edges from surviving copies of {u} reach {target_copy}, need >= {}",
                format_rational(required)
            ),
        }
    }
}

/// Outcome of checking both survival constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintReport {
    pub violations: Vec<ConstraintViolation>,
}

impl ConstraintReport {
    pub fn satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Derives the abstract edge relation from a detailed network by
/// folding copy-to-copy edges through the map. Edges whose endpoints
/// are not copies (e.g. actuator wiring) are ignored.
pub(crate) fn abstract_edges(
    d: &NetworkSpec,
    map: &CopiesMap,
) -> BTreeSet<(NeuronId, NeuronId)> {
    let mut edges = BTreeSet::new();
    for (x, y, _) in d.edges() {
        if let (Some(u), Some(v)) = (map.original(x), map.original(y)) {
            edges.insert((u.clone(), v.clone()));
        }
    }
    edges
}

/// Checks constraints 1 and 2 for `failure` against a derived network,
/// using exact rational comparisons (no rounding of `s_V * m`).
pub fn validate_failure_constraints(
    d: &NetworkSpec,
    map: &CopiesMap,
    params: &DerivationParams,
    failure: &FailurePattern,
) -> Result<ConstraintReport, DeriveError> {
    if map.m() != params.m() {
        return Err(DeriveError::MapMismatch(format!(
            "map was built for m = {}, params say m = {}",
            map.m(),
            params.m()
        )));
    }
    for (v, copies) in map.forward() {
        for copy in copies {
            if !d.contains(copy) {
                return Err(DeriveError::MapMismatch(format!(
                    "copy {copy} of {v} is not a neuron of the detailed network"
                )));
            }
        }
    }
    if !failure.subset_of(d) {
        return Err(DeriveError::PatternOutsideNetwork);
    }

    let required_copies = params.required_copies();
    let required_edges = params.required_edges();
    let mut violations = Vec::new();

    for (v, copies) in map.forward() {
        let surviving = copies
            .iter()
            .filter(|c| !failure.neuron_failed(c))
            .count();
        if Rational::from_integer(surviving as i64) < required_copies {
            violations.push(ConstraintViolation::NeuronSurvival {
                neuron: v.clone(),
                required: required_copies,
                actual: surviving,
            });
        }
    }

    // Constraint 2 is checked for every y in copies(v), failed or not.
    for (u, v) in abstract_edges(d, map) {
        let sources = map.copies(&u).expect("abstract edge source");
        for y in map.copies(&v).expect("abstract edge target") {
            let qualifying = sources
                .iter()
                .filter(|x| !failure.neuron_failed(x) && !failure.edge_failed(x, y))
                .count();
            if Rational::from_integer(qualifying as i64) < required_edges {
                violations.push(ConstraintViolation::EdgeSurvival {
                    edge: (u.clone(), v.clone()),
                    target_copy: y.clone(),
                    required: required_edges,
                    actual: qualifying,
                });
            }
        }
    }

    Ok(ConstraintReport { violations })
}

/// Lifts an abstract input schedule onto the copies: whenever abstract
/// input `v` fires, every surviving copy of `v` fires and failed copies
/// stay silent; when `v` is silent no copy fires. The horizon is
/// preserved.
///
/// Whether every scheduled neuron is a genuine *input* is enforced when
/// the lifted schedule meets the detailed network in `execute`, which
/// rejects any domain mismatch.
pub fn lift_input(
    schedule_a: &InputSchedule,
    map: &CopiesMap,
    failure: &FailurePattern,
) -> Result<InputSchedule, DeriveError> {
    let mut detailed_inputs = Vec::new();
    for v in schedule_a.inputs() {
        let copies = map
            .copies(v)
            .ok_or_else(|| DeriveError::UnknownScheduleNeuron(v.clone()))?;
        detailed_inputs.extend(copies.iter().cloned());
    }
    let mut lifted = InputSchedule::silent(detailed_inputs, schedule_a.horizon());
    for (t, v) in schedule_a.events() {
        for copy in map.copies(v).expect("checked above") {
            if !failure.neuron_failed(copy) {
                lifted
                    .set(t, copy, true)
                    .expect("copy is in the lifted domain");
            }
        }
    }
    Ok(lifted)
}
