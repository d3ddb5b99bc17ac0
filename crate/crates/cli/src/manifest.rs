//! Run manifests: one TOML document (or the equivalent set of command
//! line flags) describing the network source, derivation parameters,
//! failure policy, schedule, optional actuator, and output paths. Fuzz
//! counterexamples are emitted as manifests so a failing trial replays
//! with `spikemap check --manifest <file>`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use spikemap_core::builders::{
    build_hierarchy, build_line, build_ring, HierarchyParams, LinePersistence, LineParams,
    RingParams,
};
use spikemap_core::derive::DerivationParams;
use spikemap_core::failures::GeneratorPolicy;
use spikemap_core::network::{FailurePattern, InputSchedule, NetworkSpec, NeuronId};
use spikemap_core::rational::{format_rational, parse_rational};

use crate::files;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub network: NetworkSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<DerivationSection>,
    #[serde(default, skip_serializing_if = "FailureSection::is_default")]
    pub failures: FailureSection,
    pub schedule: ScheduleSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actuator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detailed: Option<DetailedSection>,
    #[serde(default, skip_serializing_if = "OutputSection::is_default")]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NetworkSource {
    /// Builder family: line | ring | hierarchy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builder: Option<String>,
    /// Network file path; exactly one of `builder` / `file`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lmax: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Fraction `r` for the hierarchy, `p/q` syntax.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    /// Line variant: persistence self-loop on neuron 1.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub self_loop_on_1: bool,
    /// Hierarchy variant: self-loops on the level-1 neurons.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub persistent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivationSection {
    pub m: u32,
    pub s_v: String,
    pub s_e: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FailureSection {
    /// none | paper | random | maximal | file.
    pub policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_neuron: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_edge: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

fn default_max_attempts() -> u32 {
    100
}

impl Default for FailureSection {
    fn default() -> Self {
        FailureSection {
            policy: "none".to_string(),
            p_neuron: None,
            p_edge: None,
            seed: 0,
            max_attempts: default_max_attempts(),
            file: None,
        }
    }
}

impl FailureSection {
    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScheduleSection {
    /// `pulse0` | `every:<k>` | a schedule file path.
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetailedSection {
    pub network: PathBuf,
    pub copies: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

impl OutputSection {
    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let manifest: Manifest = toml::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).context("serializing manifest")?;
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
        }
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Parses the `--net` flag: either a path to a network file or a
/// builder expression such as `line:lmax=5`, `line:lmax=5,loop1`,
/// `ring:lmax=4`, `hierarchy:lmax=3,k=3,r=2/3` (optionally
/// `,persistent`).
pub fn parse_network_flag(value: &str) -> Result<NetworkSource> {
    let Some((family, args)) = value.split_once(':') else {
        if ["line", "ring", "hierarchy"].contains(&value) {
            bail!("builder `{value}` needs parameters, e.g. `{value}:lmax=5`");
        }
        return Ok(NetworkSource {
            file: Some(PathBuf::from(value)),
            ..NetworkSource::default()
        });
    };
    if !["line", "ring", "hierarchy"].contains(&family) {
        // Not a known family; treat the whole value as a path (paths
        // may contain colons).
        return Ok(NetworkSource {
            file: Some(PathBuf::from(value)),
            ..NetworkSource::default()
        });
    }
    let mut source = NetworkSource {
        builder: Some(family.to_string()),
        ..NetworkSource::default()
    };
    for part in args.split(',').filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some(("lmax", v)) => source.lmax = Some(v.parse().context("parsing lmax")?),
            Some(("k", v)) => source.k = Some(v.parse().context("parsing k")?),
            Some(("r", v)) => source.r = Some(v.to_string()),
            None if part == "loop1" => source.self_loop_on_1 = true,
            None if part == "persistent" => source.persistent = true,
            _ => bail!("unrecognized builder argument `{part}` in `{value}`"),
        }
    }
    Ok(source)
}

impl NetworkSource {
    /// Builds or loads the abstract network. Relative file paths are
    /// resolved against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<NetworkSpec> {
        match (&self.builder, &self.file) {
            (Some(_), Some(_)) => bail!("network source has both a builder and a file"),
            (None, None) => bail!("network source is empty; give a builder or a file"),
            (None, Some(file)) => {
                let path = resolve_path(base_dir, file);
                Ok(files::load_network(&path)?)
            }
            (Some(builder), None) => {
                let lmax = self
                    .lmax
                    .ok_or_else(|| anyhow!("builder `{builder}` requires lmax"))?;
                match builder.as_str() {
                    "line" => {
                        let persistence = if self.self_loop_on_1 {
                            LinePersistence::SelfLoopOn1
                        } else {
                            LinePersistence::PulseOnly
                        };
                        Ok(build_line(&LineParams { lmax, persistence })?)
                    }
                    "ring" => Ok(build_ring(&RingParams { lmax })?),
                    "hierarchy" => {
                        let k = self.k.ok_or_else(|| anyhow!("hierarchy requires k"))?;
                        let r_text =
                            self.r.as_ref().ok_or_else(|| anyhow!("hierarchy requires r"))?;
                        let r = parse_rational(r_text).context("parsing r")?;
                        let mut params = HierarchyParams::new(lmax, k, r);
                        params.level1_self_loops = self.persistent;
                        Ok(build_hierarchy(&params)?)
                    }
                    other => bail!("unknown builder family `{other}`"),
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match (&self.builder, &self.file) {
            (Some(builder), _) => {
                let mut parts = vec![format!("lmax={}", self.lmax.unwrap_or(0))];
                if let Some(k) = self.k {
                    parts.push(format!("k={k}"));
                }
                if let Some(r) = &self.r {
                    parts.push(format!("r={r}"));
                }
                format!("{builder}:{}", parts.join(","))
            }
            (None, Some(file)) => file.display().to_string(),
            (None, None) => "<unset>".to_string(),
        }
    }
}

impl DerivationSection {
    pub fn resolve(&self) -> Result<DerivationParams> {
        let s_v = parse_rational(&self.s_v).context("parsing s_V")?;
        let s_e = parse_rational(&self.s_e).context("parsing s_E")?;
        Ok(DerivationParams::new(self.m, s_v, s_e)?)
    }

    pub fn from_params(params: &DerivationParams) -> Self {
        DerivationSection {
            m: params.m(),
            s_v: format_rational(params.s_v()),
            s_e: format_rational(params.s_e()),
        }
    }
}

/// Where the failures of a run come from: a generator policy or an
/// explicit pattern file.
#[derive(Debug, Clone)]
pub enum FailureSource {
    Policy(GeneratorPolicy),
    File(FailurePattern),
}

impl FailureSection {
    pub fn resolve(&self, base_dir: &Path) -> Result<FailureSource> {
        match self.policy.as_str() {
            "none" => Ok(FailureSource::Policy(GeneratorPolicy::none())),
            "paper" => Ok(FailureSource::Policy(GeneratorPolicy::paper_adversarial())),
            "maximal" => Ok(FailureSource::Policy(GeneratorPolicy::maximal())),
            "random" => {
                let p_neuron = self
                    .p_neuron
                    .as_ref()
                    .ok_or_else(|| anyhow!("random failures require p_neuron (no default)"))?;
                let p_edge = self
                    .p_edge
                    .as_ref()
                    .ok_or_else(|| anyhow!("random failures require p_edge (no default)"))?;
                Ok(FailureSource::Policy(GeneratorPolicy::random_iid(
                    parse_rational(p_neuron).context("parsing p_neuron")?,
                    parse_rational(p_edge).context("parsing p_edge")?,
                    self.seed,
                    self.max_attempts,
                )))
            }
            "file" => {
                let file = self
                    .file
                    .as_ref()
                    .ok_or_else(|| anyhow!("failure policy `file` requires a file path"))?;
                let path = resolve_path(base_dir, file);
                Ok(FailureSource::File(files::load_failure(&path)?))
            }
            other => bail!("unknown failure policy `{other}` (expected none|paper|random|maximal|file)"),
        }
    }

    /// Interprets the `--failures` flag value: a known policy keyword
    /// or a pattern file path. The bare keyword `file` resolves to an
    /// error asking for the path.
    pub fn from_flag(value: &str) -> FailureSection {
        match value {
            "none" | "paper" | "random" | "maximal" | "file" => FailureSection {
                policy: value.to_string(),
                ..FailureSection::default()
            },
            path => FailureSection {
                policy: "file".to_string(),
                file: Some(PathBuf::from(path)),
                ..FailureSection::default()
            },
        }
    }
}

impl ScheduleSection {
    /// Builds the concrete schedule over `net`'s input neurons.
    pub fn resolve(&self, net: &NetworkSpec, base_dir: &Path) -> Result<InputSchedule> {
        let inputs: BTreeSet<NeuronId> = net.inputs().clone();
        if self.source == "pulse0" {
            let horizon = self
                .horizon
                .ok_or_else(|| anyhow!("schedule `pulse0` requires a horizon"))?;
            return Ok(InputSchedule::pulse_at_zero(inputs, horizon));
        }
        if let Some(k_text) = self.source.strip_prefix("every:") {
            let k: usize = k_text.parse().context("parsing every:<k>")?;
            if k == 0 {
                bail!("every:<k> requires k >= 1");
            }
            let horizon = self
                .horizon
                .ok_or_else(|| anyhow!("schedule `every:<k>` requires a horizon"))?;
            return Ok(InputSchedule::every_k(inputs, horizon, k));
        }
        let path = resolve_path(base_dir, Path::new(&self.source));
        let schedule = files::load_schedule(&path, net)?;
        if let Some(h) = self.horizon {
            if h != schedule.horizon() {
                bail!(
                    "horizon {h} conflicts with schedule file horizon {}",
                    schedule.horizon()
                );
            }
        }
        Ok(schedule)
    }
}

pub fn resolve_path(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_flag_parsing() {
        let s = parse_network_flag("line:lmax=5").unwrap();
        assert_eq!(s.builder.as_deref(), Some("line"));
        assert_eq!(s.lmax, Some(5));
        assert!(!s.self_loop_on_1);

        let s = parse_network_flag("line:lmax=3,loop1").unwrap();
        assert!(s.self_loop_on_1);

        let s = parse_network_flag("hierarchy:lmax=3,k=3,r=2/3").unwrap();
        assert_eq!(s.k, Some(3));
        assert_eq!(s.r.as_deref(), Some("2/3"));

        let s = parse_network_flag("nets/a1.toml").unwrap();
        assert_eq!(s.file, Some(PathBuf::from("nets/a1.toml")));

        assert!(parse_network_flag("line").is_err());
        assert!(parse_network_flag("line:bogus=1").is_err());
    }

    #[test]
    fn builders_resolve_to_expected_sizes() {
        let s = parse_network_flag("hierarchy:lmax=3,k=3,r=2/3").unwrap();
        let net = s.resolve(Path::new(".")).unwrap();
        assert_eq!(net.neuron_count(), 40);

        let s = parse_network_flag("ring:lmax=5").unwrap();
        let net = s.resolve(Path::new(".")).unwrap();
        assert_eq!(net.edge_count(), 6);
    }

    #[test]
    fn failure_flag_interpretation() {
        assert_eq!(FailureSection::from_flag("paper").policy, "paper");
        let section = FailureSection::from_flag("patterns/f.toml");
        assert_eq!(section.policy, "file");
        assert_eq!(section.file, Some(PathBuf::from("patterns/f.toml")));
    }

    #[test]
    fn random_policy_requires_probabilities() {
        let section = FailureSection {
            policy: "random".to_string(),
            ..FailureSection::default()
        };
        assert!(section.resolve(Path::new(".")).is_err());
    }

    #[test]
    fn schedule_sources_resolve() {
        let net = parse_network_flag("line:lmax=2")
            .unwrap()
            .resolve(Path::new("."))
            .unwrap();
        let pulse = ScheduleSection {
            source: "pulse0".to_string(),
            horizon: Some(4),
        }
        .resolve(&net, Path::new("."))
        .unwrap();
        assert_eq!(pulse.fires(0, &NeuronId::from("0")), Some(true));
        assert_eq!(pulse.fires(1, &NeuronId::from("0")), Some(false));

        let every = ScheduleSection {
            source: "every:2".to_string(),
            horizon: Some(4),
        }
        .resolve(&net, Path::new("."))
        .unwrap();
        assert_eq!(every.fires(2, &NeuronId::from("0")), Some(true));
        assert_eq!(every.fires(3, &NeuronId::from("0")), Some(false));

        let missing_horizon = ScheduleSection {
            source: "pulse0".to_string(),
            horizon: None,
        };
        assert!(missing_horizon.resolve(&net, Path::new(".")).is_err());
    }

    #[test]
    fn manifest_round_trips_through_toml() {
        let manifest = Manifest {
            network: parse_network_flag("line:lmax=5").unwrap(),
            derivation: Some(DerivationSection {
                m: 4,
                s_v: "3/4".to_string(),
                s_e: "2/3".to_string(),
            }),
            failures: FailureSection {
                policy: "random".to_string(),
                p_neuron: Some("1/8".to_string()),
                p_edge: Some("1/8".to_string()),
                seed: 17,
                max_attempts: 100,
                file: None,
            },
            schedule: ScheduleSection {
                source: "pulse0".to_string(),
                horizon: Some(8),
            },
            actuator: Some("5".to_string()),
            detailed: None,
            output: OutputSection::default(),
        };
        let text = toml::to_string_pretty(&manifest).unwrap();
        let back: Manifest = toml::from_str(&text).unwrap();
        assert_eq!(back.network.builder.as_deref(), Some("line"));
        assert_eq!(back.derivation.as_ref().unwrap().m, 4);
        assert_eq!(back.failures.seed, 17);
        assert_eq!(back.schedule.horizon, Some(8));
        assert_eq!(back.actuator.as_deref(), Some("5"));
    }
}
