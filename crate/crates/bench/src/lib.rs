//! Shared instance constructors for the benchmarks.

use spikemap_core::builders::{
    build_hierarchy, build_line, HierarchyParams, LinePersistence, LineParams,
};
use spikemap_core::derive::DerivationParams;
use spikemap_core::network::{InputSchedule, NetworkSpec};
use spikemap_core::rational::rat;

pub fn line(lmax: u32) -> NetworkSpec {
    build_line(&LineParams {
        lmax,
        persistence: LinePersistence::PulseOnly,
    })
    .expect("valid line")
}

pub fn ternary_hierarchy(lmax: u32) -> NetworkSpec {
    build_hierarchy(&HierarchyParams::new(lmax, 3, rat(2, 3))).expect("valid hierarchy")
}

pub fn standard_params(m: u32) -> DerivationParams {
    DerivationParams::new(m, rat(3, 4), rat(2, 3)).expect("valid params")
}

pub fn pulse(net: &NetworkSpec, horizon: usize) -> InputSchedule {
    InputSchedule::pulse_at_zero(net.inputs().iter().cloned(), horizon)
}
