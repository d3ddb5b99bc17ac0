//! On-disk formats for networks, schedules, failure patterns and
//! copies maps, plus the trace CSV and raster renderings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use spikemap_core::derive::CopiesMap;
use spikemap_core::engine::ExecutionTrace;
use spikemap_core::network::{
    validate_network, FailurePattern, InputSchedule, NetworkSpec, NeuronId,
};
use spikemap_core::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("duplicate neuron {0} in neuron list")]
    DuplicateNeuron(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),
    #[error("invalid rational for {context}: {message}")]
    BadRational { context: String, message: String },
    #[error("initial firing for {neuron} must be 0 or 1 (got {value})")]
    BadInitialFiring { neuron: String, value: i64 },
    #[error("network is structurally invalid:\n{0}")]
    InvalidNetwork(String),
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("copies map error: {0}")]
    CopiesMap(String),
}

fn read_path(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_path(path: &Path, contents: &str) -> Result<(), FileError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| FileError::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    std::fs::write(path, contents).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, FileError> {
    toml::from_str(text).map_err(|e| FileError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn rational_field(context: &str, value: &str) -> Result<Rational, FileError> {
    parse_rational(value).map_err(|e| FileError::BadRational {
        context: context.to_string(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------
// Network files

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub neurons: Vec<String>,
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial_firing: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub src: String,
    pub dst: String,
    pub weight: String,
}

impl NetworkFile {
    pub fn from_network(net: &NetworkSpec) -> Self {
        NetworkFile {
            neurons: net.neurons().iter().map(|n| n.to_string()).collect(),
            inputs: net.inputs().iter().map(|n| n.to_string()).collect(),
            edges: net
                .edges()
                .map(|(src, dst, w)| EdgeEntry {
                    src: src.to_string(),
                    dst: dst.to_string(),
                    weight: format_rational(w),
                })
                .collect(),
            thresholds: net
                .thresholds()
                .map(|(n, h)| (n.to_string(), format_rational(h)))
                .collect(),
            initial_firing: net
                .initial_firing_entries()
                .filter(|(_, fires)| *fires)
                .map(|(n, _)| (n.to_string(), 1))
                .collect(),
        }
    }

    pub fn into_network(self) -> Result<NetworkSpec, FileError> {
        let mut neurons = BTreeSet::new();
        for name in &self.neurons {
            if !neurons.insert(NeuronId::from(name.as_str())) {
                return Err(FileError::DuplicateNeuron(name.clone()));
            }
        }
        let inputs: BTreeSet<NeuronId> =
            self.inputs.iter().map(|n| NeuronId::from(n.as_str())).collect();

        let mut edges = BTreeMap::new();
        for entry in &self.edges {
            let weight = rational_field(
                &format!("edge ({}, {}) weight", entry.src, entry.dst),
                &entry.weight,
            )?;
            let key = (
                NeuronId::from(entry.src.as_str()),
                NeuronId::from(entry.dst.as_str()),
            );
            if edges.insert(key, weight).is_some() {
                return Err(FileError::DuplicateEdge(entry.src.clone(), entry.dst.clone()));
            }
        }

        let mut thresholds = BTreeMap::new();
        for (neuron, value) in &self.thresholds {
            let h = rational_field(&format!("threshold of {neuron}"), value)?;
            thresholds.insert(NeuronId::from(neuron.as_str()), h);
        }

        let mut initial = BTreeMap::new();
        for (neuron, value) in &self.initial_firing {
            match value {
                0 => {}
                1 => {
                    initial.insert(NeuronId::from(neuron.as_str()), true);
                }
                other => {
                    return Err(FileError::BadInitialFiring {
                        neuron: neuron.clone(),
                        value: *other,
                    })
                }
            }
        }

        let net = NetworkSpec::new(neurons, inputs, edges, thresholds, initial);
        let violations = validate_network(&net);
        if !violations.is_empty() {
            let listing = violations
                .iter()
                .map(|v| format!("  - {v}"))
                .collect::<Vec<_>>()
                .join("\n");
            return Err(FileError::InvalidNetwork(listing));
        }
        Ok(net)
    }
}

pub fn network_to_toml(net: &NetworkSpec) -> String {
    toml::to_string_pretty(&NetworkFile::from_network(net)).expect("network serializes")
}

pub fn network_from_toml(path: &Path, text: &str) -> Result<NetworkSpec, FileError> {
    parse_toml::<NetworkFile>(path, text)?.into_network()
}

pub fn save_network(path: &Path, net: &NetworkSpec) -> Result<(), FileError> {
    write_path(path, &network_to_toml(net))
}

pub fn load_network(path: &Path) -> Result<NetworkSpec, FileError> {
    network_from_toml(path, &read_path(path)?)
}

// ---------------------------------------------------------------------
// Schedule files

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub horizon: usize,
    #[serde(default)]
    pub fires: Vec<FireEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FireEntry {
    pub t: usize,
    pub neuron: String,
}

impl ScheduleFile {
    pub fn from_schedule(schedule: &InputSchedule) -> Self {
        ScheduleFile {
            horizon: schedule.horizon(),
            fires: schedule
                .events()
                .map(|(t, neuron)| FireEntry {
                    t,
                    neuron: neuron.to_string(),
                })
                .collect(),
        }
    }

    /// Binds the sparse event list to a network's input neurons.
    pub fn into_schedule(self, net: &NetworkSpec) -> Result<InputSchedule, FileError> {
        let events: Vec<(usize, NeuronId)> = self
            .fires
            .iter()
            .map(|e| (e.t, NeuronId::from(e.neuron.as_str())))
            .collect();
        InputSchedule::with_events(net.inputs().iter().cloned(), self.horizon, &events)
            .map_err(|e| FileError::Schedule(e.to_string()))
    }
}

pub fn schedule_to_toml(schedule: &InputSchedule) -> String {
    toml::to_string_pretty(&ScheduleFile::from_schedule(schedule)).expect("schedule serializes")
}

pub fn load_schedule(path: &Path, net: &NetworkSpec) -> Result<InputSchedule, FileError> {
    parse_toml::<ScheduleFile>(path, &read_path(path)?)?.into_schedule(net)
}

pub fn save_schedule(path: &Path, schedule: &InputSchedule) -> Result<(), FileError> {
    write_path(path, &schedule_to_toml(schedule))
}

// ---------------------------------------------------------------------
// Failure pattern files

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureFile {
    #[serde(default)]
    pub failed_neurons: Vec<String>,
    #[serde(default)]
    pub failed_edges: Vec<(String, String)>,
}

impl FailureFile {
    pub fn from_pattern(pattern: &FailurePattern) -> Self {
        FailureFile {
            failed_neurons: pattern.failed_neurons.iter().map(|n| n.to_string()).collect(),
            failed_edges: pattern
                .failed_edges
                .iter()
                .map(|(u, v)| (u.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn into_pattern(self) -> FailurePattern {
        FailurePattern {
            failed_neurons: self
                .failed_neurons
                .into_iter()
                .map(NeuronId::from)
                .collect(),
            failed_edges: self
                .failed_edges
                .into_iter()
                .map(|(u, v)| (NeuronId::from(u), NeuronId::from(v)))
                .collect(),
        }
    }
}

pub fn failure_to_toml(pattern: &FailurePattern) -> String {
    toml::to_string_pretty(&FailureFile::from_pattern(pattern)).expect("pattern serializes")
}

pub fn load_failure(path: &Path) -> Result<FailurePattern, FileError> {
    Ok(parse_toml::<FailureFile>(path, &read_path(path)?)?.into_pattern())
}

pub fn save_failure(path: &Path, pattern: &FailurePattern) -> Result<(), FileError> {
    write_path(path, &failure_to_toml(pattern))
}

// ---------------------------------------------------------------------
// Copies map files

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CopiesFile {
    pub m: u32,
    pub forward: BTreeMap<String, Vec<String>>,
}

impl CopiesFile {
    pub fn from_map(map: &CopiesMap) -> Self {
        CopiesFile {
            m: map.m(),
            forward: map
                .forward()
                .iter()
                .map(|(v, copies)| {
                    (
                        v.to_string(),
                        copies.iter().map(|c| c.to_string()).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn into_map(self) -> Result<CopiesMap, FileError> {
        let forward: BTreeMap<NeuronId, Vec<NeuronId>> = self
            .forward
            .into_iter()
            .map(|(v, copies)| {
                (
                    NeuronId::from(v),
                    copies.into_iter().map(NeuronId::from).collect(),
                )
            })
            .collect();
        CopiesMap::from_forward(self.m, forward).map_err(|e| FileError::CopiesMap(e.to_string()))
    }
}

pub fn copies_to_toml(map: &CopiesMap) -> String {
    toml::to_string_pretty(&CopiesFile::from_map(map)).expect("map serializes")
}

pub fn load_copies(path: &Path) -> Result<CopiesMap, FileError> {
    parse_toml::<CopiesFile>(path, &read_path(path)?)?.into_map()
}

pub fn save_copies(path: &Path, map: &CopiesMap) -> Result<(), FileError> {
    write_path(path, &copies_to_toml(map))
}

// ---------------------------------------------------------------------
// Trace output

/// Sparse CSV: header, one row per firing event in time-major order,
/// and a trailing comment pinning the horizon so an empty body still
/// identifies the run length.
pub fn trace_to_csv(trace: &ExecutionTrace) -> String {
    let mut out = String::from("time,neuron,fired\n");
    for (t, neuron) in trace.firing_events() {
        out.push_str(&format!("{t},{neuron},1\n"));
    }
    out.push_str(&format!("# horizon={}\n", trace.horizon()));
    out
}

pub fn save_trace_csv(path: &Path, trace: &ExecutionTrace) -> Result<(), FileError> {
    write_path(path, &trace_to_csv(trace))
}

/// Text raster for eyeballing: one row per neuron, one column per time
/// step, `#` firing and `.` silent.
pub fn trace_to_raster(trace: &ExecutionTrace) -> String {
    let width = trace
        .order()
        .ids()
        .iter()
        .map(|n| n.as_str().chars().count())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (i, neuron) in trace.order().ids().iter().enumerate() {
        let cells: String = (0..trace.len())
            .map(|t| if trace.row(t)[i] { '#' } else { '.' })
            .collect();
        let name = neuron.as_str();
        let pad = width.saturating_sub(name.chars().count());
        out.push_str(&format!("{}{} {}\n", " ".repeat(pad), name, cells));
    }
    out
}
