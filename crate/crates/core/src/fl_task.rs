//! Federated-learning task: server, clients and the model being trained.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ClientId, NodeId};

/// Megabits per megabyte (1 MB = 10^6 bytes).
pub const MEGABITS_PER_MB: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub size_mb: f64,
    pub training_time_s: f64,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, size_mb: f64, training_time_s: f64) -> Result<Self> {
        let spec = Self { name: name.into(), size_mb, training_time_s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.size_mb > 0.0) || !self.size_mb.is_finite() {
            return Err(Error::invalid("model.size_mb", "must be positive"));
        }
        if !(self.training_time_s > 0.0) || !self.training_time_s.is_finite() {
            return Err(Error::invalid("model.training_time_s", "must be positive"));
        }
        Ok(())
    }

    pub fn size_megabits(&self) -> f64 {
        self.size_mb * MEGABITS_PER_MB
    }
}

/// The five evaluation models, in ascending order of size.
pub fn model_catalog() -> Vec<ModelSpec> {
    [
        ("LeNet-5", 0.3, 25.0),
        ("MobileNetV2", 13.4, 180.0),
        ("EfficientNet-B0", 20.3, 300.0),
        ("ResNet-18", 44.7, 480.0),
        ("ResNet-34", 83.6, 950.0),
    ]
    .into_iter()
    .map(|(name, size_mb, training_time_s)| ModelSpec { name: name.into(), size_mb, training_time_s })
    .collect()
}

/// Case-sensitive lookup in [`model_catalog`].
pub fn catalog_model(name: &str) -> Option<ModelSpec> {
    model_catalog().into_iter().find(|m| m.name == name)
}

/// Seconds needed to push `size_mb` megabytes through a path whose
/// bottleneck is `bottleneck_mbps`.
pub fn transmission_time(size_mb: f64, bottleneck_mbps: f64) -> Result<f64> {
    if !(bottleneck_mbps > 0.0) {
        return Err(Error::ZeroBandwidth(bottleneck_mbps));
    }
    if !(size_mb >= 0.0) {
        return Err(Error::invalid("size_mb", "must be non-negative"));
    }
    Ok(size_mb * MEGABITS_PER_MB / bottleneck_mbps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientSpec {
    pub id: ClientId,
    pub site: NodeId,
    pub training_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlTask {
    pub server: NodeId,
    pub clients: Vec<ClientSpec>,
    pub model: ModelSpec,
}

impl FlTask {
    pub fn new(server: NodeId, clients: Vec<ClientSpec>, model: ModelSpec) -> Result<Self> {
        let task = Self { server, clients, model };
        task.validate()?;
        Ok(task)
    }

    /// Convenience constructor: clients `C1..Cn` at the given sites, all
    /// with multiplier 1.
    pub fn homogeneous(server: NodeId, sites: &[NodeId], model: ModelSpec) -> Result<Self> {
        let clients = sites
            .iter()
            .enumerate()
            .map(|(i, &site)| ClientSpec { id: ClientId(i as u32 + 1), site, training_multiplier: 1.0 })
            .collect();
        Self::new(server, clients, model)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.clients.is_empty() {
            return Err(Error::invalid("clients", "task needs at least one client"));
        }
        let mut ids: Vec<_> = self.clients.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("clients", "client ids must be distinct"));
        }
        for c in &self.clients {
            if c.site == self.server {
                return Err(Error::invalid("clients", format!("client {} sits on the server node", c.id)));
            }
            if !(c.training_multiplier >= 0.0) || !c.training_multiplier.is_finite() {
                return Err(Error::invalid("multipliers", format!("client {} multiplier must be >= 0", c.id)));
            }
        }
        Ok(())
    }

    pub fn client(&self, id: ClientId) -> Result<&ClientSpec> {
        self.clients.iter().find(|c| c.id == id).ok_or(Error::UnknownClient(id))
    }

    /// Local training duration of one client.
    pub fn training_time(&self, id: ClientId) -> Result<f64> {
        Ok(self.model.training_time_s * self.client(id)?.training_multiplier)
    }

    /// Copy whose multipliers are scaled by independent draws from
    /// `U[1 - fraction, 1 + fraction]`.
    pub fn jittered(&self, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::invalid("jitter", "fraction must lie in [0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for c in &mut out.clients {
            let f = if fraction == 0.0 { 1.0 } else { rng.random_range(1.0 - fraction..=1.0 + fraction) };
            c.training_multiplier *= f;
        }
        Ok(out)
    }
}
