//! Scenario files: constellation, ground sites, task template and
//! scheduling options in one JSON document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constellation::{self, ConstellationConfig, GroundSite, SatelliteElement, SiteRole};
use crate::error::{Error, Result};
use crate::fl_task::{catalog_model, ClientSpec, FlTask, ModelSpec};
use crate::ids::{ClientId, NodeId};
use crate::scheduler::{ChannelModel, SchedulerConfig};
use crate::temporal_graph::{PathMetric, TemporalGraph};

/// Major version written to and accepted from every file format.
pub const FORMAT_VERSION: u32 = 1;

pub(crate) fn check_version(found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::FormatVersion { found, expected: FORMAT_VERSION });
    }
    Ok(())
}

/// Parses JSON, reporting the dotted path of the offending field on error.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "document".to_string() } else { path };
        Error::invalid(field, e.into_inner().to_string())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub role: SiteRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Named(String),
    Inline {
        #[serde(default = "custom_name")]
        name: String,
        size_mb: f64,
        training_time_s: f64,
    },
}

fn custom_name() -> String {
    "custom".into()
}

impl ModelRef {
    pub fn resolve(&self) -> Result<ModelSpec> {
        match self {
            ModelRef::Named(name) => {
                catalog_model(name).ok_or_else(|| Error::invalid("task.model", format!("unknown model `{name}`")))
            }
            ModelRef::Inline { name, size_mb, training_time_s } => ModelSpec::new(name.clone(), *size_mb, *training_time_s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskTemplate {
    pub model: ModelRef,
    pub server_site: String,
    pub client_sites: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub multipliers: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulingOptions {
    #[serde(default)]
    pub channel: ChannelModel,
    #[serde(default)]
    pub path_metric: PathMetric,
    #[serde(default = "default_window")]
    pub window_length_s: f64,
    pub horizon_windows: u32,
    #[serde(default)]
    pub include_propagation_delay: bool,
    #[serde(default)]
    pub strict_windows: bool,
}

fn default_window() -> f64 {
    10.0
}

impl SchedulingOptions {
    pub fn scheduler_config(&self) -> SchedulerConfig {
        SchedulerConfig {
            channel: self.channel,
            path_metric: self.path_metric,
            include_propagation_delay: self.include_propagation_delay,
            strict_windows: self.strict_windows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub constellation: ConstellationConfig,
    pub sites: Vec<SiteEntry>,
    pub task: TaskTemplate,
    pub scheduling: SchedulingOptions,
}

/// Validated scenario with node ids assigned: satellites first
/// (`plane * slots + slot`), then sites in file order.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub elements: Vec<SatelliteElement>,
    pub sites: Vec<GroundSite>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_file(parse_json(text)?)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        check_version(file.format_version)?;
        file.constellation.validate()?;
        let elements = file.constellation.walker_delta()?;
        let base = file.constellation.num_satellites;
        let sites: Vec<GroundSite> = file
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| GroundSite {
                id: NodeId(base + i as u32),
                name: s.name.clone(),
                latitude_deg: s.lat,
                longitude_deg: s.lon,
                role: s.role,
            })
            .collect();
        for s in &sites {
            s.validate()?;
        }
        let mut names: Vec<&str> = sites.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("sites", "site names must be unique"));
        }
        let servers: Vec<&GroundSite> = sites.iter().filter(|s| s.role == SiteRole::Server).collect();
        if servers.len() != 1 {
            return Err(Error::invalid("sites", format!("exactly one server site required, found {}", servers.len())));
        }
        if servers[0].name != file.task.server_site {
            return Err(Error::invalid("task.server_site", format!("`{}` is not the server site", file.task.server_site)));
        }
        if !(file.scheduling.window_length_s > 0.0) {
            return Err(Error::invalid("scheduling.window_length_s", "must be positive"));
        }
        if file.scheduling.horizon_windows < 1 {
            return Err(Error::invalid("scheduling.horizon_windows", "must be at least 1"));
        }
        let scenario = Self { file, elements, sites };
        scenario.task()?;
        Ok(scenario)
    }

    pub fn site(&self, name: &str) -> Option<&GroundSite> {
        self.sites.iter().find(|s| s.name == name)
    }

    pub fn scheduler_config(&self) -> SchedulerConfig {
        self.file.scheduling.scheduler_config()
    }

    pub fn model(&self) -> Result<ModelSpec> {
        self.file.task.model.resolve()
    }

    /// Task over all listed client sites.
    pub fn task(&self) -> Result<FlTask> {
        self.task_for(self.file.task.client_sites.len(), self.model()?)
    }

    /// Task over the first `clients` listed client sites with `model`.
    pub fn task_for(&self, clients: usize, model: ModelSpec) -> Result<FlTask> {
        let t = &self.file.task;
        if clients > t.client_sites.len() {
            return Err(Error::invalid(
                "task.client_sites",
                format!("{clients} clients requested, {} listed", t.client_sites.len()),
            ));
        }
        let server = self
            .site(&t.server_site)
            .ok_or_else(|| Error::invalid("task.server_site", format!("unknown site `{}`", t.server_site)))?
            .id;
        for name in t.multipliers.keys() {
            if !t.client_sites.contains(name) {
                return Err(Error::invalid("task.multipliers", format!("`{name}` is not a client site")));
            }
        }
        let specs = t.client_sites[..clients]
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let site = self
                    .site(name)
                    .ok_or_else(|| Error::invalid("task.client_sites", format!("unknown site `{name}`")))?;
                Ok(ClientSpec {
                    id: ClientId(i as u32 + 1),
                    site: site.id,
                    training_multiplier: t.multipliers.get(name).copied().unwrap_or(1.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FlTask::new(server, specs, model)
    }

    /// Copy with a different bandwidth seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.file.constellation.rng_seed = seed;
        out
    }

    pub fn build_temporal_graph(&self) -> Result<TemporalGraph> {
        self.build_temporal_graph_with(self.file.scheduling.horizon_windows)
    }

    pub fn build_temporal_graph_with(&self, num_windows: u32) -> Result<TemporalGraph> {
        constellation::build_temporal_graph(
            &self.file.constellation,
            &self.elements,
            &self.sites,
            num_windows,
            self.file.scheduling.window_length_s,
        )
    }

    /// SHA-256 of the canonical JSON form of the scenario.
    pub fn config_hash(&self) -> String {
        canonical_hash(&self.file)
    }
}

pub fn canonical_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}
