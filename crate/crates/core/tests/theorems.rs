//! End-to-end reproductions of the worked guarantee examples on the
//! three network families, plus checker-sensitivity cases that corrupt
//! a derived network and expect a detected violation.

use std::collections::BTreeMap;

use spikemap_core::builders::{
    build_hierarchy, build_line, build_ring, hierarchy_leaves, HierarchyParams, LinePersistence,
    LineParams, RingParams,
};
use spikemap_core::check::{
    check_actuator_theorem, check_firing_theorem, check_nonfiring_theorem, classify_cells,
    make_actuator_run, make_corresponding_run, ClaimKind, Correspondence,
};
use spikemap_core::derive::{derive_a2, derive_d, DerivationParams};
use spikemap_core::failures::{GeneratorPolicy, Xorshift64Star};
use spikemap_core::network::{InputSchedule, NetworkSpec, NeuronId};
use spikemap_core::rational::{rat, Rational};

fn id(s: &str) -> NeuronId {
    NeuronId::from(s)
}

fn line(lmax: u32) -> NetworkSpec {
    build_line(&LineParams {
        lmax,
        persistence: LinePersistence::PulseOnly,
    })
    .unwrap()
}

fn params(m: u32, sv: Rational, se: Rational) -> DerivationParams {
    DerivationParams::new(m, sv, se).unwrap()
}

const EIGHT_LEAVES: [&str; 8] = [
    "v_111", "v_112", "v_121", "v_122", "v_211", "v_212", "v_221", "v_222",
];

#[test]
fn firing_guarantee_on_the_line_under_even_pulses() {
    let a1 = line(5);
    let schedule = InputSchedule::every_k(a1.inputs().iter().cloned(), 7, 2);
    let run = make_corresponding_run(
        &a1,
        params(4, rat(3, 4), rat(2, 3)),
        &GeneratorPolicy::paper_adversarial(),
        &schedule,
    )
    .unwrap();
    assert!(check_firing_theorem(&run).passed());
    assert!(check_nonfiring_theorem(&run).passed());

    // Every abstract firing cell has exactly 3 of 4 copies firing: the
    // adversarial pattern sits on the s_V * m = 3 boundary.
    for t in 0..=7usize {
        for v in a1.neurons() {
            if run.trace_a1.fired(t, v) != Some(true) {
                continue;
            }
            let firing = run
                .map
                .copies(v)
                .unwrap()
                .iter()
                .filter(|c| run.trace_d.fired(t, c) == Some(true))
                .count();
            assert_eq!(firing, 3, "{v} at {t}");
        }
    }
}

#[test]
fn firing_guarantee_on_the_replicated_hierarchy_with_thirty_two_copies() {
    let a1 = build_hierarchy(&HierarchyParams::new(3, 3, rat(2, 3))).unwrap();
    let events: Vec<(usize, NeuronId)> = EIGHT_LEAVES.iter().map(|n| (0usize, id(n))).collect();
    let schedule = InputSchedule::with_events(a1.inputs().iter().cloned(), 3, &events).unwrap();
    let run = make_corresponding_run(
        &a1,
        params(32, rat(15, 16), rat(14, 15)),
        &GeneratorPolicy::paper_adversarial(),
        &schedule,
    )
    .unwrap();
    assert!(check_firing_theorem(&run).passed());
    assert!(check_nonfiring_theorem(&run).passed());

    assert_eq!(run.trace_a1.fired(3, &id("v_λ")), Some(true));
    let firing_root_copies = run
        .map
        .copies(&id("v_λ"))
        .unwrap()
        .iter()
        .filter(|c| run.trace_d.fired(3, c) == Some(true))
        .count();
    // The bound is s_V * m = 30; the adversarial pattern leaves 31.
    assert!(firing_root_copies >= 30);
    assert_eq!(firing_root_copies, 31);
}

#[test]
fn nonfiring_guarantee_with_vacuous_claim_at_the_root() {
    // No failures, single input v_111, s_V * s_E = 1/2: all four root
    // copies fire while A2's root fires too, so the guarantee holds but
    // claims nothing there.
    let a1 = build_hierarchy(&HierarchyParams::new(3, 3, rat(2, 3))).unwrap();
    let schedule =
        InputSchedule::with_events(a1.inputs().iter().cloned(), 3, &[(0, id("v_111"))]).unwrap();
    let run = make_corresponding_run(
        &a1,
        params(4, rat(3, 4), rat(2, 3)),
        &GeneratorPolicy::none(),
        &schedule,
    )
    .unwrap();
    assert!(check_nonfiring_theorem(&run).passed());
    assert_eq!(run.trace_a2.fired(3, &id("v_λ")), Some(true));
    for copy in run.map.copies(&id("v_λ")).unwrap() {
        assert_eq!(run.trace_d.fired(3, copy), Some(true));
    }
}

#[test]
fn lowered_thresholds_change_nothing_when_no_integer_fits_between() {
    // Thresholds 4 vs 7/2: a neuron with an integer number of firing
    // children crosses both or neither, so A1 and A2 agree on every
    // input pattern.
    let a1 = build_hierarchy(&HierarchyParams::new(2, 5, rat(4, 5))).unwrap();
    let p = params(16, rat(15, 16), rat(14, 15));
    let a2 = derive_a2(&a1, &p).unwrap();
    for (_, h) in a2.thresholds() {
        assert_eq!(*h, rat(7, 2));
    }

    let ctx = Correspondence::new(&a1, p).unwrap();
    let leaves = hierarchy_leaves(&HierarchyParams::new(2, 5, rat(4, 5)));
    let mut rng = Xorshift64Star::new(2024);
    for _ in 0..20 {
        let mut schedule = InputSchedule::silent(a1.inputs().iter().cloned(), 4);
        for t in 0..=4usize {
            for leaf in &leaves {
                if rng.bernoulli(&rat(1, 2)) {
                    schedule.set(t, leaf, true).unwrap();
                }
            }
        }
        let run = ctx.run(spikemap_core::network::FailurePattern::empty(), &schedule).unwrap();
        for t in 0..=4 {
            assert_eq!(run.trace_a1.row(t), run.trace_a2.row(t), "time {t}");
        }
    }
}

#[test]
fn combined_claim_when_no_middle_ground_exists() {
    // Where classification shows zero middle cells and no anomalies,
    // the two guarantees combine: firing in A1 forces >= s_V * m firing
    // copies, silence in A1 forces zero firing copies.
    let a1 = build_hierarchy(&HierarchyParams::new(2, 5, rat(4, 5))).unwrap();
    let p = params(16, rat(15, 16), rat(14, 15));
    let required = p.required_copies();
    let leaves = hierarchy_leaves(&HierarchyParams::new(2, 5, rat(4, 5)));

    let mut events = Vec::new();
    // Fire 4 of 5 children of the first three level-1 parents, and all
    // leaves under the rest.
    for (i, leaf) in leaves.iter().enumerate() {
        if i % 5 != 4 || i >= 15 {
            events.push((0usize, leaf.clone()));
        }
    }
    let schedule = InputSchedule::with_events(a1.inputs().iter().cloned(), 3, &events).unwrap();
    let run = make_corresponding_run(&a1, p, &GeneratorPolicy::paper_adversarial(), &schedule)
        .unwrap();

    let classes = classify_cells(&run);
    assert_eq!(classes.middle, 0);
    assert!(classes.anomalies.is_empty());
    assert!(check_firing_theorem(&run).passed());
    assert!(check_nonfiring_theorem(&run).passed());

    for t in 0..=3usize {
        for v in a1.neurons() {
            let firing = run
                .map
                .copies(v)
                .unwrap()
                .iter()
                .filter(|c| run.trace_d.fired(t, c) == Some(true))
                .count();
            if run.trace_a1.fired(t, v) == Some(true) {
                assert!(
                    Rational::from_integer(firing as i64) >= required,
                    "{v} at {t}: {firing} copies"
                );
            } else {
                assert_eq!(firing, 0, "{v} at {t}");
            }
        }
    }
}

#[test]
fn actuator_follows_the_root_of_the_full_hierarchy() {
    let hp = HierarchyParams::new(3, 5, rat(4, 5));
    let a1 = build_hierarchy(&hp).unwrap();
    let schedule = InputSchedule::pulse_at_zero(a1.inputs().iter().cloned(), 5);
    let run = make_actuator_run(
        &a1,
        params(32, rat(15, 16), rat(14, 15)),
        &GeneratorPolicy::paper_adversarial(),
        &schedule,
        &id("v_λ"),
    )
    .unwrap();

    let report = check_actuator_theorem(&run).unwrap();
    assert!(report.passed(), "violations: {:?}", report.violations);
    for t in 0..=5usize {
        let expect = t == 4;
        assert_eq!(run.trace_a1.fired(t, &id("a")), Some(expect), "A1^a at {t}");
        assert_eq!(run.trace_a2.fired(t, &id("a")), Some(expect), "A2^a at {t}");
        assert_eq!(run.trace_d.fired(t, &id("a")), Some(expect), "D^a at {t}");
    }
}

#[test]
fn ring_actuator_fires_periodically() {
    let a1 = build_ring(&RingParams { lmax: 5 }).unwrap();
    let schedule = InputSchedule::pulse_at_zero(a1.inputs().iter().cloned(), 12);
    let run = make_actuator_run(
        &a1,
        params(4, rat(3, 4), rat(2, 3)),
        &GeneratorPolicy::paper_adversarial(),
        &schedule,
        &id("3"),
    )
    .unwrap();
    assert!(check_actuator_theorem(&run).unwrap().passed());
    // Neuron 3 fires at 3 and 8; the actuator echoes one step later.
    for t in 1..=12usize {
        assert_eq!(
            run.trace_d.fired(t, &id("a")),
            Some(t == 4 || t == 9),
            "actuator at {t}"
        );
    }
}

fn with_lowered_copy_threshold(d: &NetworkSpec, copy: &NeuronId, new: Rational) -> NetworkSpec {
    let thresholds: BTreeMap<NeuronId, Rational> = d
        .thresholds()
        .map(|(n, h)| {
            let h = if n == copy { new } else { *h };
            (n.clone(), h)
        })
        .collect();
    NetworkSpec::new(
        d.neurons().clone(),
        d.inputs().clone(),
        d.edges()
            .map(|(u, v, w)| ((u.clone(), v.clone()), *w))
            .collect(),
        thresholds,
        d.initial_firing_entries()
            .map(|(n, f)| (n.clone(), f))
            .collect(),
    )
}

#[test]
fn corrupted_copy_threshold_is_flagged_as_a_nonfiring_violation() {
    // s_V * s_E = 7/8 keeps A2's thresholds at 7/4, above the potential
    // 1 that a single firing input produces, so everything beyond the
    // leaves stays silent. Lowering one copy's threshold below 1 makes
    // that copy fire anyway, which the non-firing checker must catch.
    let a1 = build_hierarchy(&HierarchyParams::new(3, 3, rat(2, 3))).unwrap();
    let p = params(4, rat(15, 16), rat(14, 15));
    let a2 = derive_a2(&a1, &p).unwrap();
    let (d, map) = derive_d(&a1, &p).unwrap();
    let victim = map.copies(&id("v_11")).unwrap()[0].clone();
    let corrupted = with_lowered_copy_threshold(&d, &victim, rat(1, 2));

    let ctx = Correspondence::from_parts(a1.clone(), a2, corrupted, map, p).unwrap();
    let schedule =
        InputSchedule::with_events(a1.inputs().iter().cloned(), 3, &[(0, id("v_111"))]).unwrap();
    let run = ctx
        .run(spikemap_core::network::FailurePattern::empty(), &schedule)
        .unwrap();

    let report = check_nonfiring_theorem(&run);
    assert!(!report.passed());
    let violation = &report.violations[0];
    assert_eq!(violation.claim, ClaimKind::NonFiring);
    assert_eq!(violation.neuron, id("v_11"));
    assert_eq!(violation.time, 1);
    assert_eq!(violation.observed, 1);
    let witness = &violation.witnesses[0];
    assert_eq!(witness.neuron, victim);
    assert!(witness.fired);
    assert_eq!(witness.potential, Some(rat(1, 1)));
    assert_eq!(witness.threshold, Some(rat(1, 2)));
    assert_eq!(witness.firing_in_neighbors.len(), 4);

    // The intact derivation passes on the same schedule.
    let clean = make_corresponding_run(
        &a1,
        params(4, rat(15, 16), rat(14, 15)),
        &GeneratorPolicy::none(),
        &schedule,
    )
    .unwrap();
    assert!(check_nonfiring_theorem(&clean).passed());
}

#[test]
fn raised_stakes_boundary_fires_exactly_at_the_threshold() {
    // Maximal failures drive every potential to exactly the bound
    // s_V * s_E * h; the >= comparison must still fire the copies.
    let a1 = line(4);
    let schedule = InputSchedule::pulse_at_zero(a1.inputs().iter().cloned(), 6);
    let run = make_corresponding_run(
        &a1,
        params(4, rat(3, 4), rat(2, 3)),
        &GeneratorPolicy::maximal(),
        &schedule,
    )
    .unwrap();
    assert!(check_firing_theorem(&run).passed());
    assert!(check_nonfiring_theorem(&run).passed());
    // Surviving copies of neuron t fire at time t with potential
    // exactly 2 * 1/4 = 1/2 = threshold.
    let copies = run.map.copies(&id("2")).unwrap();
    let surviving_firing = copies
        .iter()
        .filter(|c| run.trace_d.fired(2, c) == Some(true))
        .count();
    assert_eq!(surviving_firing, 3);
}

#[test]
fn silent_abstract_neurons_keep_every_copy_silent_across_policies() {
    let a1 = build_ring(&RingParams { lmax: 3 }).unwrap();
    let schedule = InputSchedule::with_events(
        a1.inputs().iter().cloned(),
        6,
        &[(0, id("0")), (3, id("0"))],
    )
    .unwrap();
    for policy in [
        GeneratorPolicy::none(),
        GeneratorPolicy::paper_adversarial(),
        GeneratorPolicy::maximal(),
        GeneratorPolicy::random_iid(rat(1, 10), rat(1, 10), 99, 500),
    ] {
        let run =
            make_corresponding_run(&a1, params(4, rat(1, 2), rat(1, 2)), &policy, &schedule)
                .unwrap();
        assert!(check_firing_theorem(&run).passed(), "{:?}", policy.kind);
        assert!(check_nonfiring_theorem(&run).passed(), "{:?}", policy.kind);
    }
}

#[test]
fn a_failing_input_copy_still_meets_the_firing_bound() {
    // Random failures may hit input copies; the firing guarantee for
    // input neurons comes straight from constraint 1 plus lifting.
    let a1 = line(2);
    let schedule = InputSchedule::every_k(a1.inputs().iter().cloned(), 5, 1);
    let mut seen_failed_input = false;
    for seed in 0..20u64 {
        let run = make_corresponding_run(
            &a1,
            params(3, rat(1, 3), rat(1, 3)),
            &GeneratorPolicy::random_iid(rat(1, 4), rat(1, 4), seed, 500),
            &schedule,
        )
        .unwrap();
        seen_failed_input |= run
            .failure
            .failed_neurons
            .iter()
            .any(|n| run.d.is_input(n));
        assert!(check_firing_theorem(&run).passed(), "seed {seed}");
        assert!(check_nonfiring_theorem(&run).passed(), "seed {seed}");
    }
    assert!(seen_failed_input, "no sampled pattern ever hit an input copy");
}
