//! Deterministic discrete-time spiking-network simulation with exact
//! rational arithmetic, plus the machinery to derive lowered-threshold
//! and replicated failure-prone networks from an abstract one and to
//! check the firing/non-firing/actuator mapping guarantees between
//! their corresponding executions.
//!
//! Module map:
//!
//! - [`network`]: network descriptions, configurations, input schedules,
//!   failure patterns, structural validation.
//! - [`engine`]: the firing dynamics (`incoming_potential`, `step`,
//!   `execute`) and execution traces.
//! - [`builders`]: the line / ring / hierarchy example families.
//! - [`mod@derive`]: threshold lowering (A2), replication (D), failure
//!   constraints, input lifting.
//! - [`failures`]: deterministic and seeded-random failure-pattern
//!   generators, always validated against the survival constraints.
//! - [`check`]: corresponding runs of A1/A2/D and the three mapping
//!   guarantee checkers, with counterexample witnesses.
//! - [`oracle`]: exhaustive small-scope enumeration of schedules and
//!   failure patterns, checking every pair.

pub mod builders;
pub mod check;
pub mod derive;
pub mod engine;
pub mod failures;
pub mod network;
pub mod oracle;
pub mod rational;

pub use check::{
    attach_actuator, check_actuator_theorem, check_firing_theorem, check_nonfiring_theorem,
    check_run_consistency, classify_cells, make_actuator_run, make_corresponding_run, CellClass,
    CellClassification, CheckError, ClaimKind, ConsistencyIssue, Correspondence, CorrespondingRun,
    NeuronWitness, TheoremKind, TheoremReport, TheoremViolation, ACTUATOR_ID,
};
pub use derive::{
    derive_a2, derive_d, lift_input, validate_failure_constraints, ConstraintReport,
    ConstraintViolation, CopiesMap, DerivationParams, DeriveError,
};
pub use engine::{execute, incoming_potential, step, CompiledNet, ExecutionTrace, ModelError};
pub use failures::{
    generate, reproducibility_check, GenerateError, GeneratorPolicy, PolicyKind, Xorshift64Star,
};
pub use network::{
    validate_network, Configuration, FailurePattern, InputSchedule, NetworkSpec, NetworkViolation,
    NeuronId, NeuronOrder,
};
pub use oracle::{
    enumerate_failure_patterns, enumerate_schedules, exhaustive_verify, EnumerationLimits,
    OracleError, OracleViolation, VerifySummary,
};
pub use rational::{format_rational, parse_rational, rat, ParseRationalError, Rational};
