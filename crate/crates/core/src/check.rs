//! Corresponding executions of A1, A2 and D, and the checkers for the
//! three mapping guarantees:
//!
//! 1. firing: whenever `v` fires in A1, at least `s_V * m` of its
//!    copies fire in D at the same time;
//! 2. non-firing: whenever `v` is silent in A2, none of its copies fire
//!    in D;
//! 3. actuator: a reliable threshold-`s_V` actuator attached to `v`
//!    (weight 1 from `v`, weight `1/m` from each copy) fires in D^a
//!    whenever it fires in A1^a, and stays silent in D^a whenever it is
//!    silent in A2^a, for every time `t >= 1`.
//!
//! Violations carry the local witness (the copy's potential, threshold
//! and firing in-neighbors over surviving edges) so a counterexample is
//! actionable. Checks never mutate anything; a [`Correspondence`] can
//! be reused across many failure patterns and schedules.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::derive::{
    derive_a2, derive_d, lift_input, validate_failure_constraints, ConstraintReport, CopiesMap,
    DerivationParams, DeriveError,
};
use crate::engine::{CompiledNet, ExecutionTrace, ModelError};
use crate::failures::{generate, GenerateError, GeneratorPolicy};
use crate::network::{FailurePattern, InputSchedule, NetworkSpec, NeuronId};
use crate::rational::Rational;

/// The reserved actuator neuron name.
pub const ACTUATOR_ID: &str = "a";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("failure pattern violates the survival constraints: {first}")]
    ConstraintViolated {
        first: String,
        report: ConstraintReport,
    },
    #[error("network already contains a neuron named {ACTUATOR_ID}; cannot attach an actuator")]
    ActuatorIdTaken,
    #[error("actuator target {0} is not a neuron of the network")]
    ActuatorTargetUnknown(NeuronId),
    #[error("actuator target {0} is an input neuron")]
    ActuatorTargetIsInput(NeuronId),
    #[error("actuator target {0} has no copies in the map")]
    ActuatorTargetUnmapped(NeuronId),
    #[error("this run carries no actuator")]
    NoActuator,
}

/// Attaches the reliable actuator `a` (threshold `s_V`, initial firing
/// 0) to `v`. Abstract networks get one weight-1 edge `(v, a)`;
/// detailed networks (pass the copies map) get a weight-`1/m` edge from
/// every copy of `v`. The actuator and its edges are never part of a
/// failure pattern: patterns are generated against the base detailed
/// network, which does not contain them.
pub fn attach_actuator(
    net: &NetworkSpec,
    v: &NeuronId,
    params: &DerivationParams,
    map: Option<&CopiesMap>,
) -> Result<NetworkSpec, CheckError> {
    let actuator = NeuronId::from(ACTUATOR_ID);
    if net.contains(&actuator) {
        return Err(CheckError::ActuatorIdTaken);
    }

    let sources: Vec<(NeuronId, Rational)> = match map {
        None => {
            if !net.contains(v) {
                return Err(CheckError::ActuatorTargetUnknown(v.clone()));
            }
            if net.is_input(v) {
                return Err(CheckError::ActuatorTargetIsInput(v.clone()));
            }
            vec![(v.clone(), Rational::one())]
        }
        Some(map) => {
            let copies = map
                .copies(v)
                .ok_or_else(|| CheckError::ActuatorTargetUnmapped(v.clone()))?;
            let weight = Rational::one() / Rational::from_integer(map.m() as i64);
            for copy in copies {
                if !net.contains(copy) {
                    return Err(CheckError::ActuatorTargetUnknown(copy.clone()));
                }
                if net.is_input(copy) {
                    return Err(CheckError::ActuatorTargetIsInput(v.clone()));
                }
            }
            copies.iter().map(|c| (c.clone(), weight)).collect()
        }
    };

    let mut neurons = net.neurons().clone();
    neurons.insert(actuator.clone());
    let mut edges: BTreeMap<(NeuronId, NeuronId), Rational> = net
        .edges()
        .map(|(u, w, weight)| ((u.clone(), w.clone()), *weight))
        .collect();
    for (source, weight) in sources {
        edges.insert((source, actuator.clone()), weight);
    }
    let mut thresholds: BTreeMap<NeuronId, Rational> = net
        .thresholds()
        .map(|(n, h)| (n.clone(), *h))
        .collect();
    thresholds.insert(actuator, *params.s_v());

    Ok(NetworkSpec::new(
        neurons,
        net.inputs().clone(),
        edges,
        thresholds,
        net.initial_firing_entries()
            .map(|(n, f)| (n.clone(), f))
            .collect(),
    ))
}

/// The derived trio A1/A2/D (or their actuator-extended versions),
/// compiled and ready to run against many (failure, schedule) pairs.
#[derive(Debug, Clone)]
pub struct Correspondence {
    a1: Arc<NetworkSpec>,
    a2: Arc<NetworkSpec>,
    d: Arc<NetworkSpec>,
    /// The detailed network *without* the actuator; failure patterns
    /// are generated, validated and enumerated against this one.
    base_d: Arc<NetworkSpec>,
    map: Arc<CopiesMap>,
    params: DerivationParams,
    actuator: Option<NeuronId>,
    compiled_a1: CompiledNet,
    compiled_a2: CompiledNet,
    compiled_d: CompiledNet,
}

impl Correspondence {
    /// Derives A2 and D from A1 and compiles all three.
    pub fn new(a1: &NetworkSpec, params: DerivationParams) -> Result<Self, CheckError> {
        let a2 = derive_a2(a1, &params)?;
        let (d, map) = derive_d(a1, &params)?;
        Self::assemble(a1.clone(), a2, d, map, params, None)
    }

    /// Like [`Correspondence::new`], but attaches the actuator to
    /// `target` in all three networks after deriving. Deriving first
    /// matters: the actuator threshold stays `s_V` in A2^a (it is not
    /// rescaled) and the actuator is not replicated in D^a.
    pub fn with_actuator(
        a1: &NetworkSpec,
        params: DerivationParams,
        target: &NeuronId,
    ) -> Result<Self, CheckError> {
        let a2 = derive_a2(a1, &params)?;
        let (d, map) = derive_d(a1, &params)?;
        let a1a = attach_actuator(a1, target, &params, None)?;
        let a2a = attach_actuator(&a2, target, &params, None)?;
        let da = attach_actuator(&d, target, &params, Some(&map))?;
        let base_d = Arc::new(d);
        let mut built = Self::assemble(a1a, a2a, da, map, params, Some(NeuronId::from(ACTUATOR_ID)))?;
        built.base_d = base_d;
        Ok(built)
    }

    /// Assembles a correspondence from externally supplied parts
    /// (typically a detailed network loaded from disk). Only structural
    /// consistency is checked: an explicit D exists so the theorem
    /// checkers can judge networks that do not conform to the
    /// derivation.
    pub fn from_parts(
        a1: NetworkSpec,
        a2: NetworkSpec,
        d: NetworkSpec,
        map: CopiesMap,
        params: DerivationParams,
    ) -> Result<Self, CheckError> {
        if map.m() != params.m() {
            return Err(CheckError::Derive(DeriveError::MapMismatch(format!(
                "map was built for m = {}, params say m = {}",
                map.m(),
                params.m()
            ))));
        }
        for (v, copies) in map.forward() {
            for copy in copies {
                if !d.contains(copy) {
                    return Err(CheckError::Derive(DeriveError::MapMismatch(format!(
                        "copy {copy} of {v} is not a neuron of the detailed network"
                    ))));
                }
            }
        }
        Self::assemble(a1, a2, d, map, params, None)
    }

    fn assemble(
        a1: NetworkSpec,
        a2: NetworkSpec,
        d: NetworkSpec,
        map: CopiesMap,
        params: DerivationParams,
        actuator: Option<NeuronId>,
    ) -> Result<Self, CheckError> {
        let a1 = Arc::new(a1);
        let a2 = Arc::new(a2);
        let d = Arc::new(d);
        let compiled_a1 = CompiledNet::compile_arc(Arc::clone(&a1))?;
        let compiled_a2 = CompiledNet::compile_arc(Arc::clone(&a2))?;
        let compiled_d = CompiledNet::compile_arc(Arc::clone(&d))?;
        Ok(Correspondence {
            a1,
            a2,
            base_d: Arc::clone(&d),
            d,
            map: Arc::new(map),
            params,
            actuator,
            compiled_a1,
            compiled_a2,
            compiled_d,
        })
    }

    pub fn a1(&self) -> &Arc<NetworkSpec> {
        &self.a1
    }

    pub fn a2(&self) -> &Arc<NetworkSpec> {
        &self.a2
    }

    pub fn d(&self) -> &Arc<NetworkSpec> {
        &self.d
    }

    pub fn base_d(&self) -> &Arc<NetworkSpec> {
        &self.base_d
    }

    pub fn map(&self) -> &Arc<CopiesMap> {
        &self.map
    }

    pub fn params(&self) -> &DerivationParams {
        &self.params
    }

    pub fn actuator(&self) -> Option<&NeuronId> {
        self.actuator.as_ref()
    }

    pub(crate) fn compiled_a1(&self) -> &CompiledNet {
        &self.compiled_a1
    }

    pub(crate) fn compiled_a2(&self) -> &CompiledNet {
        &self.compiled_a2
    }

    /// Generates a failure pattern against the base detailed network.
    pub fn generate_failure(&self, policy: &GeneratorPolicy) -> Result<FailurePattern, CheckError> {
        Ok(generate(&self.base_d, &self.map, &self.params, policy)?)
    }

    /// Executes all three networks on corresponding inputs: A1 and A2
    /// on the abstract schedule with no failures, D on the lifted
    /// schedule under `failure`. The pattern must satisfy the survival
    /// constraints.
    pub fn run(
        &self,
        failure: FailurePattern,
        schedule_a: &InputSchedule,
    ) -> Result<CorrespondingRun, CheckError> {
        let no_failure = FailurePattern::empty();
        let trace_a1 = self.compiled_a1.execute(schedule_a, &no_failure)?;
        let trace_a2 = self.compiled_a2.execute(schedule_a, &no_failure)?;
        self.run_with_abstract_traces(failure, schedule_a, trace_a1, trace_a2)
    }

    /// Same as [`Correspondence::run`] but reuses already-computed A1
    /// and A2 traces. The exhaustive oracle executes the abstract
    /// networks once per schedule instead of once per (schedule,
    /// pattern) pair.
    pub(crate) fn run_with_abstract_traces(
        &self,
        failure: FailurePattern,
        schedule_a: &InputSchedule,
        trace_a1: ExecutionTrace,
        trace_a2: ExecutionTrace,
    ) -> Result<CorrespondingRun, CheckError> {
        let report =
            validate_failure_constraints(&self.base_d, &self.map, &self.params, &failure)?;
        if !report.satisfied() {
            return Err(CheckError::ConstraintViolated {
                first: report.violations[0].to_string(),
                report,
            });
        }
        let lifted = lift_input(schedule_a, &self.map, &failure)?;
        let trace_d = self.compiled_d.execute(&lifted, &failure)?;
        Ok(CorrespondingRun {
            a1: Arc::clone(&self.a1),
            a2: Arc::clone(&self.a2),
            d: Arc::clone(&self.d),
            map: Arc::clone(&self.map),
            params: self.params.clone(),
            failure: Arc::new(failure),
            schedule_a: schedule_a.clone(),
            trace_a1,
            trace_a2,
            trace_d,
            actuator: self.actuator.clone(),
        })
    }
}

/// Executions of A1, A2 and D on corresponding inputs under one fixed
/// failure pattern, plus everything needed to audit them.
#[derive(Debug, Clone)]
pub struct CorrespondingRun {
    pub a1: Arc<NetworkSpec>,
    pub a2: Arc<NetworkSpec>,
    pub d: Arc<NetworkSpec>,
    pub map: Arc<CopiesMap>,
    pub params: DerivationParams,
    pub failure: Arc<FailurePattern>,
    pub schedule_a: InputSchedule,
    pub trace_a1: ExecutionTrace,
    pub trace_a2: ExecutionTrace,
    pub trace_d: ExecutionTrace,
    /// Set when the three networks carry the actuator.
    pub actuator: Option<NeuronId>,
}

impl CorrespondingRun {
    pub fn horizon(&self) -> usize {
        self.schedule_a.horizon()
    }
}

/// Builds A2 and D, generates a failure pattern with `policy`, lifts
/// the inputs, and executes all three networks.
pub fn make_corresponding_run(
    a1: &NetworkSpec,
    params: DerivationParams,
    policy: &GeneratorPolicy,
    schedule_a: &InputSchedule,
) -> Result<CorrespondingRun, CheckError> {
    let ctx = Correspondence::new(a1, params)?;
    let failure = ctx.generate_failure(policy)?;
    ctx.run(failure, schedule_a)
}

/// Actuator-run variant of [`make_corresponding_run`]: attaches the
/// actuator to `target` in all three networks.
pub fn make_actuator_run(
    a1: &NetworkSpec,
    params: DerivationParams,
    policy: &GeneratorPolicy,
    schedule_a: &InputSchedule,
    target: &NeuronId,
) -> Result<CorrespondingRun, CheckError> {
    let ctx = Correspondence::with_actuator(a1, params, target)?;
    let failure = ctx.generate_failure(policy)?;
    ctx.run(failure, schedule_a)
}

/// Which theorem a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremKind {
    Firing,
    NonFiring,
    Actuator,
}

/// The specific broken claim inside a violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimKind {
    /// `v` fired in A1 but fewer than `s_V * m` copies fired in D.
    Firing,
    /// `v` was silent in A2 but some copy fired in D.
    NonFiring,
    /// The actuator fired in A1^a but not in D^a.
    ActuatorFires,
    /// The actuator was silent in A2^a but fired in D^a.
    ActuatorSilent,
}

impl ClaimKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimKind::Firing => "firing",
            ClaimKind::NonFiring => "nonfiring",
            ClaimKind::ActuatorFires => "actuator_fires",
            ClaimKind::ActuatorSilent => "actuator_silent",
        }
    }
}

/// Local evidence for one detailed neuron at the violation time: what
/// potential it saw over surviving edges and from whom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronWitness {
    pub neuron: NeuronId,
    pub fired: bool,
    pub survived: bool,
    pub threshold: Option<Rational>,
    /// Potential incoming for this time; `None` at time 0, where firing
    /// is fixed by inputs and initial state.
    pub potential: Option<Rational>,
    /// In-neighbors that fired at `time - 1` and reach this neuron over
    /// a surviving edge, with the edge weight.
    pub firing_in_neighbors: Vec<(NeuronId, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremViolation {
    pub claim: ClaimKind,
    /// The abstract neuron (or the actuator) whose guarantee broke.
    pub neuron: NeuronId,
    pub time: usize,
    /// Copies observed doing the wrong thing (firing count for the
    /// copy theorems, 0/1 for the actuator).
    pub observed: usize,
    /// The exact bound the observation is compared against.
    pub required: Rational,
    pub witnesses: Vec<NeuronWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    pub theorem: TheoremKind,
    pub violations: Vec<TheoremViolation>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn witness_for(
    net: &NetworkSpec,
    trace: &ExecutionTrace,
    failure: &FailurePattern,
    neuron: &NeuronId,
    time: usize,
) -> NeuronWitness {
    let fired = trace.fired(time, neuron).unwrap_or(false);
    let survived = !failure.neuron_failed(neuron);
    let threshold = net.threshold(neuron).cloned();
    if time == 0 {
        return NeuronWitness {
            neuron: neuron.clone(),
            fired,
            survived,
            threshold,
            potential: None,
            firing_in_neighbors: Vec::new(),
        };
    }
    let mut potential = Rational::zero();
    let mut firing_in_neighbors = Vec::new();
    for (u, weight) in net.in_neighbors(neuron) {
        if failure.edge_failed(u, neuron) || failure.neuron_failed(u) {
            continue;
        }
        if trace.fired(time - 1, u) == Some(true) {
            potential += weight;
            firing_in_neighbors.push((u.clone(), *weight));
        }
    }
    NeuronWitness {
        neuron: neuron.clone(),
        fired,
        survived,
        threshold,
        potential: Some(potential),
        firing_in_neighbors,
    }
}

/// Index bundle for walking the (abstract neuron, time) grid quickly.
struct RunIndex {
    /// (abstract neuron, index into trace_a1/trace_a2 rows, copy
    /// indices into trace_d rows).
    neurons: Vec<(NeuronId, usize, Vec<usize>)>,
}

impl RunIndex {
    fn build(run: &CorrespondingRun) -> Self {
        let a_order = run.trace_a1.order();
        let d_order = run.trace_d.order();
        let neurons = run
            .map
            .forward()
            .iter()
            .map(|(v, copies)| {
                let ai = a_order.index_of(v).expect("abstract neuron in A1");
                let copy_indices = copies
                    .iter()
                    .map(|c| d_order.index_of(c).expect("copy in D"))
                    .collect();
                (v.clone(), ai, copy_indices)
            })
            .collect();
        RunIndex { neurons }
    }
}

/// Theorem 1: whenever `v` fires in A1, at least `s_V * m` of its
/// copies fire in D at the same time (exact rational comparison).
pub fn check_firing_theorem(run: &CorrespondingRun) -> TheoremReport {
    let index = RunIndex::build(run);
    let required = run.params.required_copies();
    let mut violations = Vec::new();
    for t in 0..=run.trace_a1.horizon() {
        for (v, ai, copies) in &index.neurons {
            if !run.trace_a1.fired_by_index(t, *ai) {
                continue;
            }
            let firing = copies
                .iter()
                .filter(|ci| run.trace_d.fired_by_index(t, **ci))
                .count();
            if Rational::from_integer(firing as i64) < required {
                let witnesses = run
                    .map
                    .copies(v)
                    .expect("known abstract neuron")
                    .iter()
                    .filter(|c| {
                        !run.failure.neuron_failed(c)
                            && run.trace_d.fired(t, c) != Some(true)
                    })
                    .map(|c| witness_for(&run.d, &run.trace_d, &run.failure, c, t))
                    .collect();
                violations.push(TheoremViolation {
                    claim: ClaimKind::Firing,
                    neuron: v.clone(),
                    time: t,
                    observed: firing,
                    required,
                    witnesses,
                });
            }
        }
    }
    TheoremReport {
        theorem: TheoremKind::Firing,
        violations,
    }
}

/// Theorem 2: whenever `v` is silent in A2, none of its copies fire in
/// D at the same time.
pub fn check_nonfiring_theorem(run: &CorrespondingRun) -> TheoremReport {
    let index = RunIndex::build(run);
    let mut violations = Vec::new();
    for t in 0..=run.trace_a2.horizon() {
        for (v, ai, copies) in &index.neurons {
            if run.trace_a2.fired_by_index(t, *ai) {
                continue;
            }
            let firing = copies
                .iter()
                .filter(|ci| run.trace_d.fired_by_index(t, **ci))
                .count();
            if firing > 0 {
                let witnesses = run
                    .map
                    .copies(v)
                    .expect("known abstract neuron")
                    .iter()
                    .filter(|c| run.trace_d.fired(t, c) == Some(true))
                    .map(|c| witness_for(&run.d, &run.trace_d, &run.failure, c, t))
                    .collect();
                violations.push(TheoremViolation {
                    claim: ClaimKind::NonFiring,
                    neuron: v.clone(),
                    time: t,
                    observed: firing,
                    required: Rational::zero(),
                    witnesses,
                });
            }
        }
    }
    TheoremReport {
        theorem: TheoremKind::NonFiring,
        violations,
    }
}

/// Theorem 3 over an actuator run, from time 1 (at time 0 the actuator
/// is silent everywhere by construction): firing in A1^a must appear in
/// D^a, silence in A2^a must persist in D^a.
pub fn check_actuator_theorem(run: &CorrespondingRun) -> Result<TheoremReport, CheckError> {
    let actuator = run.actuator.clone().ok_or(CheckError::NoActuator)?;
    let mut violations = Vec::new();
    for t in 1..=run.trace_a1.horizon() {
        let in_a1 = run.trace_a1.fired(t, &actuator) == Some(true);
        let in_a2 = run.trace_a2.fired(t, &actuator) == Some(true);
        let in_d = run.trace_d.fired(t, &actuator) == Some(true);
        if in_a1 && !in_d {
            violations.push(TheoremViolation {
                claim: ClaimKind::ActuatorFires,
                neuron: actuator.clone(),
                time: t,
                observed: 0,
                required: Rational::one(),
                witnesses: vec![witness_for(&run.d, &run.trace_d, &run.failure, &actuator, t)],
            });
        }
        if !in_a2 && in_d {
            violations.push(TheoremViolation {
                claim: ClaimKind::ActuatorSilent,
                neuron: actuator.clone(),
                time: t,
                observed: 1,
                required: Rational::zero(),
                witnesses: vec![witness_for(&run.d, &run.trace_d, &run.failure, &actuator, t)],
            });
        }
    }
    Ok(TheoremReport {
        theorem: TheoremKind::Actuator,
        violations,
    })
}

/// Classification of one (abstract neuron, time) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    /// Fires in A1 (so the firing guarantee applies).
    FiresA1,
    /// Silent in A2 (so the non-firing guarantee applies).
    SilentA2,
    /// Silent in A1 but firing in A2: no guarantee covers D here.
    Middle,
}

/// Per-cell classes with summary counts. The fourth combination, firing
/// in A1 while silent in A2 on identical inputs, is not assigned a
/// class of its own: those cells classify as `FiresA1` and are listed
/// as anomalies, since threshold lowering does not obviously preserve
/// firing once inhibitory weights are in play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellClassification {
    pub cells: BTreeMap<NeuronId, Vec<CellClass>>,
    pub fires_a1: usize,
    pub silent_a2: usize,
    pub middle: usize,
    pub middle_cells: Vec<(NeuronId, usize)>,
    pub anomalies: Vec<(NeuronId, usize)>,
}

impl CellClassification {
    pub fn class(&self, v: &NeuronId, time: usize) -> Option<CellClass> {
        self.cells.get(v).and_then(|row| row.get(time)).copied()
    }
}

/// Classifies every (abstract neuron, time) cell of the run.
pub fn classify_cells(run: &CorrespondingRun) -> CellClassification {
    let order = run.trace_a1.order();
    let horizon = run.trace_a1.horizon();
    let mut cells = BTreeMap::new();
    let (mut fires_a1, mut silent_a2, mut middle) = (0usize, 0usize, 0usize);
    let mut middle_cells = Vec::new();
    let mut anomalies = Vec::new();

    for (i, v) in order.ids().iter().enumerate() {
        let mut row = Vec::with_capacity(horizon + 1);
        for t in 0..=horizon {
            let in_a1 = run.trace_a1.fired_by_index(t, i);
            let in_a2 = run.trace_a2.fired_by_index(t, i);
            let class = if in_a1 {
                if !in_a2 {
                    anomalies.push((v.clone(), t));
                }
                fires_a1 += 1;
                CellClass::FiresA1
            } else if in_a2 {
                middle += 1;
                middle_cells.push((v.clone(), t));
                CellClass::Middle
            } else {
                silent_a2 += 1;
                CellClass::SilentA2
            };
            row.push(class);
        }
        cells.insert(v.clone(), row);
    }

    CellClassification {
        cells,
        fires_a1,
        silent_a2,
        middle,
        middle_cells,
        anomalies,
    }
}

/// A breach of the run's own wellformedness, as opposed to a theorem
/// violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConsistencyIssue {
    /// A neuron in the failure set fired anyway in the detailed trace.
    FailedNeuronFired { neuron: NeuronId, time: usize },
    /// The three traces do not share the schedule horizon.
    HorizonMismatch {
        schedule: usize,
        a1: usize,
        a2: usize,
        d: usize,
    },
}

impl std::fmt::Display for ConsistencyIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConsistencyIssue::FailedNeuronFired { neuron, time } => {
                write!(f, "failed neuron {neuron} fired at time {time}")
            }
            ConsistencyIssue::HorizonMismatch { schedule, a1, a2, d } => write!(
                f,
                "trace horizons diverge: schedule {schedule}, A1 {a1}, A2 {a2}, D {d}"
            ),
        }
    }
}

/// Audits the run record itself: failed neurons must be silent at every
/// time in the detailed trace, and all traces must share the schedule's
/// horizon. Engine-produced runs always pass; this exists to catch
/// hand-assembled or corrupted run data.
pub fn check_run_consistency(run: &CorrespondingRun) -> Vec<ConsistencyIssue> {
    let mut issues = Vec::new();
    let horizon = run.schedule_a.horizon();
    if run.trace_a1.horizon() != horizon
        || run.trace_a2.horizon() != horizon
        || run.trace_d.horizon() != horizon
    {
        issues.push(ConsistencyIssue::HorizonMismatch {
            schedule: horizon,
            a1: run.trace_a1.horizon(),
            a2: run.trace_a2.horizon(),
            d: run.trace_d.horizon(),
        });
    }
    for neuron in run.failure.failed_neurons.iter() {
        for t in 0..run.trace_d.len() {
            if run.trace_d.fired(t, neuron) == Some(true) {
                issues.push(ConsistencyIssue::FailedNeuronFired {
                    neuron: neuron.clone(),
                    time: t,
                });
            }
        }
    }
    issues
}
