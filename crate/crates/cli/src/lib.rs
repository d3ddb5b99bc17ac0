//! File formats, manifests, reports and command implementations behind
//! the `spikemap` binary.
//!
//! All on-disk formats are TOML with exact fractions written as
//! `p` / `p/q` strings; decimal floats are rejected on load so rational
//! values survive round trips bit-exactly. Traces are written as sparse
//! CSV (`time,neuron,fired` with only firing rows) plus a trailing
//! `# horizon=N` comment.

pub mod commands;
pub mod files;
pub mod fuzz;
pub mod manifest;
pub mod report;

/// Process exit codes shared by every subcommand.
pub mod exit_codes {
    /// Everything ran and every check passed.
    pub const OK: i32 = 0;
    /// Checks ran and found violations or anomalies.
    pub const VIOLATIONS: i32 = 1;
    /// Usage, file or validation error.
    pub const USAGE: i32 = 2;
    /// The exhaustive oracle hit an enumeration cap.
    pub const CAPPED: i32 = 3;
}
