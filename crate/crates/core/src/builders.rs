//! Constructors for the three example network families: a line, a
//! ring, and a complete k-ary hierarchy with upward edges.
//!
//! All built networks pass [`validate_network`]. Naming: line and ring
//! neurons are `"0"..="lmax"` with `"0"` the input; hierarchy neurons
//! are `v_<path>` where the path walks down from the root (`v_λ`, path
//! empty) one digit per level, so the leaves of a three-level ternary
//! tree are `v_111 ..= v_333`. For branching factors above 9 the path
//! segments are dot-separated to keep names unambiguous.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::network::{validate_network, NetworkSpec, NeuronId};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("line networks need lmax >= 1 (got {0})")]
    LineTooShort(u32),
    #[error("ring networks need lmax >= 2 (got {0}); lmax = 1 degenerates to a self-loop")]
    RingTooShort(u32),
    #[error("hierarchy networks need lmax >= 1 (got {0})")]
    HierarchyTooShallow(u32),
    #[error("hierarchy branching factor must be >= 1 (got {0})")]
    BranchingTooSmall(u32),
    #[error("hierarchy fraction r must satisfy 0 < r <= 1 (got {0})")]
    FractionOutOfRange(String),
}

/// Whether the line carries the persistence self-loop on neuron 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinePersistence {
    #[default]
    PulseOnly,
    SelfLoopOn1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineParams {
    pub lmax: u32,
    pub persistence: LinePersistence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingParams {
    pub lmax: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyParams {
    /// Number of non-leaf levels; the tree has `k^lmax` leaves.
    pub lmax: u32,
    pub k: u32,
    /// A non-input neuron fires when at least an `r`-fraction of its
    /// children fired; its threshold is `r * k`.
    pub r: Rational,
    /// Adds weight `r*k` self-loops on the level-1 neurons so that one
    /// input pulse keeps them firing. Off by default; no guarantee
    /// example uses it.
    pub level1_self_loops: bool,
}

impl HierarchyParams {
    pub fn new(lmax: u32, k: u32, r: Rational) -> Self {
        HierarchyParams {
            lmax,
            k,
            r,
            level1_self_loops: false,
        }
    }
}

fn numbered(v: u32) -> NeuronId {
    NeuronId::from(v.to_string())
}

/// Line of `lmax + 1` neurons `0..=lmax`, input `0`, unit weights and
/// thresholds, edges `(v, v+1)`.
pub fn build_line(p: &LineParams) -> Result<NetworkSpec, BuildError> {
    if p.lmax < 1 {
        return Err(BuildError::LineTooShort(p.lmax));
    }
    let one = Rational::from_integer(1);
    let neurons: BTreeSet<_> = (0..=p.lmax).map(numbered).collect();
    let inputs: BTreeSet<_> = [numbered(0)].into();
    let mut edges: BTreeMap<_, _> = (0..p.lmax)
        .map(|v| ((numbered(v), numbered(v + 1)), one))
        .collect();
    if p.persistence == LinePersistence::SelfLoopOn1 {
        edges.insert((numbered(1), numbered(1)), one);
    }
    let thresholds: BTreeMap<_, _> = (1..=p.lmax).map(|v| (numbered(v), one)).collect();
    let net = NetworkSpec::new(neurons, inputs, edges, thresholds, BTreeMap::new());
    debug_assert!(validate_network(&net).is_empty());
    Ok(net)
}

/// Input `0` feeding a one-directional ring `1, ..., lmax, 1`: edges
/// `(v, v+1)` for `0 <= v < lmax` plus `(lmax, 1)`, unit weights and
/// thresholds.
pub fn build_ring(p: &RingParams) -> Result<NetworkSpec, BuildError> {
    if p.lmax < 2 {
        return Err(BuildError::RingTooShort(p.lmax));
    }
    let one = Rational::from_integer(1);
    let neurons: BTreeSet<_> = (0..=p.lmax).map(numbered).collect();
    let inputs: BTreeSet<_> = [numbered(0)].into();
    let mut edges: BTreeMap<_, _> = (0..p.lmax)
        .map(|v| ((numbered(v), numbered(v + 1)), one))
        .collect();
    edges.insert((numbered(p.lmax), numbered(1)), one);
    let thresholds: BTreeMap<_, _> = (1..=p.lmax).map(|v| (numbered(v), one)).collect();
    let net = NetworkSpec::new(neurons, inputs, edges, thresholds, BTreeMap::new());
    debug_assert!(validate_network(&net).is_empty());
    Ok(net)
}

/// Name of the hierarchy neuron reached by `path` (child indices from
/// the root, each in `1..=k`). The root's path is empty: `v_λ`.
pub fn hierarchy_neuron_name(path: &[u32], k: u32) -> NeuronId {
    if path.is_empty() {
        return NeuronId::from("v_λ");
    }
    let sep = if k <= 9 { "" } else { "." };
    let joined = path
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(sep);
    NeuronId::from(format!("v_{joined}"))
}

/// Complete k-ary tree with `lmax + 1` levels, leaves at level 0 as the
/// inputs, child-to-parent unit-weight edges, and threshold `r * k` on
/// every non-input neuron.
pub fn build_hierarchy(p: &HierarchyParams) -> Result<NetworkSpec, BuildError> {
    if p.lmax < 1 {
        return Err(BuildError::HierarchyTooShallow(p.lmax));
    }
    if p.k < 1 {
        return Err(BuildError::BranchingTooSmall(p.k));
    }
    if p.r <= Rational::zero() || p.r > Rational::from_integer(1) {
        return Err(BuildError::FractionOutOfRange(format_rational(&p.r)));
    }
    let threshold = p.r * Rational::from_integer(p.k as i64);
    let one = Rational::from_integer(1);

    let mut neurons = BTreeSet::new();
    let mut inputs = BTreeSet::new();
    let mut edges = BTreeMap::new();
    let mut thresholds = BTreeMap::new();

    // Walk every path of depth <= lmax; depth lmax means leaf.
    let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
    while let Some(path) = stack.pop() {
        let name = hierarchy_neuron_name(&path, p.k);
        neurons.insert(name.clone());
        if path.len() == p.lmax as usize {
            inputs.insert(name);
            continue;
        }
        thresholds.insert(name.clone(), threshold);
        for child in 1..=p.k {
            let mut child_path = path.clone();
            child_path.push(child);
            let child_name = hierarchy_neuron_name(&child_path, p.k);
            edges.insert((child_name, name.clone()), one);
            stack.push(child_path);
        }
    }

    if p.level1_self_loops {
        // Level 1 = parents of leaves, i.e. paths of depth lmax - 1.
        for path in paths_of_depth(p.k, p.lmax - 1) {
            let name = hierarchy_neuron_name(&path, p.k);
            edges.insert((name.clone(), name), threshold);
        }
    }

    let net = NetworkSpec::new(neurons, inputs, edges, thresholds, BTreeMap::new());
    debug_assert!(validate_network(&net).is_empty());
    Ok(net)
}

fn paths_of_depth(k: u32, depth: u32) -> Vec<Vec<u32>> {
    let mut paths = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(paths.len() * k as usize);
        for path in paths {
            for child in 1..=k {
                let mut p = path.clone();
                p.push(child);
                next.push(p);
            }
        }
        paths = next;
    }
    paths
}

/// Leaf neurons of a hierarchy built with these parameters, in name
/// order. Useful for addressing input subsets.
pub fn hierarchy_leaves(p: &HierarchyParams) -> Vec<NeuronId> {
    let mut leaves: Vec<NeuronId> = paths_of_depth(p.k, p.lmax)
        .into_iter()
        .map(|path| hierarchy_neuron_name(&path, p.k))
        .collect();
    leaves.sort();
    leaves
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    

    use super::*;
    use crate::engine::execute;
    use crate::network::{FailurePattern, InputSchedule};
    use crate::rational::rat;

    fn id(s: &str) -> NeuronId {
        NeuronId::from(s)
    }

    #[test]
    fn line_counts_and_validity() {
        let net = build_line(&LineParams {
            lmax: 5,
            persistence: LinePersistence::PulseOnly,
        })
        .unwrap();
        assert_eq!(net.neuron_count(), 6);
        assert_eq!(net.edge_count(), 5);
        assert!(validate_network(&net).is_empty());

        let tiny = build_line(&LineParams {
            lmax: 1,
            persistence: LinePersistence::PulseOnly,
        })
        .unwrap();
        assert_eq!(tiny.neuron_count(), 2);
        assert_eq!(tiny.edge_count(), 1);

        assert!(build_line(&LineParams {
            lmax: 0,
            persistence: LinePersistence::PulseOnly,
        })
        .is_err());
    }

    #[test]
    fn line_self_loop_variant_gives_persistent_firing() {
        let net = build_line(&LineParams {
            lmax: 5,
            persistence: LinePersistence::SelfLoopOn1,
        })
        .unwrap();
        let schedule = InputSchedule::pulse_at_zero(net.inputs().iter().cloned(), 8);
        let trace = execute(&net, &schedule, &FailurePattern::empty()).unwrap();
        // At each time t, exactly the non-input neurons numbered <= t fire.
        for t in 1..=8usize {
            let firing: BTreeSet<String> = trace
                .firing_events()
                .filter(|(tt, _)| *tt == t)
                .map(|(_, n)| n.to_string())
                .collect();
            let expected: BTreeSet<String> = (1..=5u32)
                .filter(|v| *v as usize <= t)
                .map(|v| v.to_string())
                .collect();
            assert_eq!(firing, expected, "time {t}");
        }
    }

    #[test]
    fn ring_counts_and_minimum_size() {
        let net = build_ring(&RingParams { lmax: 5 }).unwrap();
        assert_eq!(net.neuron_count(), 6);
        assert_eq!(net.edge_count(), 6);
        assert!(validate_network(&net).is_empty());
        assert!(build_ring(&RingParams { lmax: 1 }).is_err());
    }

    #[test]
    fn smallest_ring_rotates_with_period_two() {
        let net = build_ring(&RingParams { lmax: 2 }).unwrap();
        let schedule = InputSchedule::pulse_at_zero(net.inputs().iter().cloned(), 8);
        let trace = execute(&net, &schedule, &FailurePattern::empty()).unwrap();
        for t in 1..=8usize {
            assert_eq!(trace.fired(t, &id("1")), Some(t % 2 == 1), "neuron 1 at {t}");
            assert_eq!(trace.fired(t, &id("2")), Some(t % 2 == 0), "neuron 2 at {t}");
        }
    }

    #[test]
    fn hierarchy_counts_thresholds_and_naming() {
        let p = HierarchyParams::new(3, 3, rat(2, 3));
        let net = build_hierarchy(&p).unwrap();
        // 1 + 3 + 9 + 27
        assert_eq!(net.neuron_count(), 40);
        assert_eq!(net.inputs().len(), 27);
        assert_eq!(net.edge_count(), 39);
        assert!(validate_network(&net).is_empty());
        for (_, threshold) in net.thresholds() {
            assert_eq!(*threshold, rat(2, 1));
        }
        assert!(net.contains(&id("v_λ")));
        assert!(net.contains(&id("v_111")));
        assert!(net.is_input(&id("v_111")));
        assert!(!net.is_input(&id("v_11")));
        assert_eq!(net.weight(&id("v_111"), &id("v_11")), Some(&rat(1, 1)));
        assert_eq!(hierarchy_leaves(&p).len(), 27);
    }

    #[test]
    fn hierarchy_eight_leaf_set_fires_the_root_at_three() {
        let net = build_hierarchy(&HierarchyParams::new(3, 3, rat(2, 3))).unwrap();
        let b = [
            "v_111", "v_112", "v_121", "v_122", "v_211", "v_212", "v_221", "v_222",
        ];
        let events: Vec<(usize, NeuronId)> = b.iter().map(|n| (0usize, id(n))).collect();
        let schedule =
            InputSchedule::with_events(net.inputs().iter().cloned(), 4, &events).unwrap();
        let trace = execute(&net, &schedule, &FailurePattern::empty()).unwrap();
        assert_eq!(trace.fired(3, &id("v_λ")), Some(true));
        for (name, t) in [
            ("v_11", 1),
            ("v_12", 1),
            ("v_21", 1),
            ("v_22", 1),
            ("v_1", 2),
            ("v_2", 2),
        ] {
            assert_eq!(trace.fired(t, &id(name)), Some(true), "{name} at {t}");
        }
        assert_eq!(trace.fired(1, &id("v_13")), Some(false));
    }

    #[test]
    fn hierarchy_nineteen_leaf_set_misses_the_root() {
        let net = build_hierarchy(&HierarchyParams::new(3, 3, rat(2, 3))).unwrap();
        let b = [
            "v_111", "v_112", "v_113", "v_121", "v_122", "v_123", "v_131", "v_132", "v_133",
            "v_211", "v_212", "v_213", "v_221", "v_231", "v_311", "v_312", "v_313", "v_321",
            "v_331",
        ];
        assert_eq!(b.len(), 19);
        let events: Vec<(usize, NeuronId)> = b.iter().map(|n| (0usize, id(n))).collect();
        let schedule =
            InputSchedule::with_events(net.inputs().iter().cloned(), 6, &events).unwrap();
        let trace = execute(&net, &schedule, &FailurePattern::empty()).unwrap();

        let fired_non_leaves: BTreeSet<String> = trace
            .firing_events()
            .filter(|(_, n)| !net.is_input(n))
            .map(|(_, n)| n.to_string())
            .collect();
        let expected: BTreeSet<String> = ["v_11", "v_12", "v_13", "v_21", "v_31", "v_1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(fired_non_leaves, expected);
        for t in 0..=6 {
            assert_eq!(trace.fired(t, &id("v_λ")), Some(false), "root at {t}");
        }
    }

    #[test]
    fn hierarchy_neuron_total_matches_geometric_sum() {
        for (lmax, k) in [(1u32, 2u32), (2, 3), (3, 2), (2, 5)] {
            let net = build_hierarchy(&HierarchyParams::new(lmax, k, rat(1, 2))).unwrap();
            let expected: usize = (0..=lmax).map(|l| (k as usize).pow(l)).sum();
            assert_eq!(net.neuron_count(), expected, "lmax={lmax} k={k}");
            assert_eq!(net.inputs().len(), (k as usize).pow(lmax));
        }
    }

    #[test]
    fn wide_hierarchy_names_stay_unambiguous() {
        let net = build_hierarchy(&HierarchyParams::new(2, 11, rat(1, 2))).unwrap();
        assert_eq!(net.neuron_count(), 1 + 11 + 121);
        assert!(net.contains(&id("v_1.11")));
        assert!(net.contains(&id("v_11.1")));
        assert!(validate_network(&net).is_empty());
    }

    #[test]
    fn level1_self_loops_make_one_pulse_persistent() {
        let mut p = HierarchyParams::new(2, 2, rat(1, 1));
        p.level1_self_loops = true;
        let net = build_hierarchy(&p).unwrap();
        assert_eq!(net.weight(&id("v_1"), &id("v_1")), Some(&rat(2, 1)));
        let events = vec![(0usize, id("v_11")), (0, id("v_12"))];
        let schedule =
            InputSchedule::with_events(net.inputs().iter().cloned(), 5, &events).unwrap();
        let trace = execute(&net, &schedule, &FailurePattern::empty()).unwrap();
        for t in 1..=5 {
            assert_eq!(trace.fired(t, &id("v_1")), Some(true), "v_1 at {t}");
        }
    }

    #[test]
    fn hierarchy_rejects_bad_params() {
        assert!(build_hierarchy(&HierarchyParams::new(0, 3, rat(1, 2))).is_err());
        assert!(build_hierarchy(&HierarchyParams::new(2, 0, rat(1, 2))).is_err());
        assert!(build_hierarchy(&HierarchyParams::new(2, 3, rat(0, 1))).is_err());
        assert!(build_hierarchy(&HierarchyParams::new(2, 3, rat(3, 2))).is_err());
    }
}
