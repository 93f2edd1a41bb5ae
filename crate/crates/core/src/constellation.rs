//! Walker-delta LEO shell on a spherical Earth, ground sites, and the
//! per-window connectivity derived from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::NodeId;
use crate::temporal_graph::{Edge, SnapshotGraph, TemporalGraph};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const EARTH_MU_KM3_S2: f64 = 398_600.4418;
/// Sidereal rotation rate.
pub const EARTH_ROTATION_DEG_S: f64 = 360.0 / 86_164.0;
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteElement {
    pub id: NodeId,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub plane_index: u32,
    pub slot_index: u32,
    pub raan_deg: f64,
    pub phase_deg: f64,
}

impl SatelliteElement {
    pub fn validate(&self) -> Result<()> {
        if !(300.0..=2000.0).contains(&self.altitude_km) {
            return Err(Error::invalid("altitude_km", "must lie in [300, 2000] km"));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::invalid("inclination_deg", "must lie in [0, 180]"));
        }
        if !(0.0..360.0).contains(&self.raan_deg) || !(0.0..360.0).contains(&self.phase_deg) {
            return Err(Error::invalid("raan_deg/phase_deg", "must lie in [0, 360)"));
        }
        Ok(())
    }

    pub fn orbit_radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    pub fn period_s(&self) -> f64 {
        let a = self.orbit_radius_km();
        2.0 * std::f64::consts::PI * (a * a * a / EARTH_MU_KM3_S2).sqrt()
    }

    /// Earth-centred inertial position at `epoch_s`; equals ECEF at epoch 0.
    pub fn inertial_position(&self, epoch_s: f64) -> Vec3 {
        let a = self.orbit_radius_km();
        let mean_motion_deg = 360.0 / self.period_s();
        let u = (self.phase_deg + mean_motion_deg * epoch_s).to_radians();
        let raan = self.raan_deg.to_radians();
        let inc = self.inclination_deg.to_radians();
        let (su, cu) = u.sin_cos();
        let (so, co) = raan.sin_cos();
        let (si, ci) = inc.sin_cos();
        [
            a * (co * cu - so * su * ci),
            a * (so * cu + co * su * ci),
            a * (su * si),
        ]
    }
}

/// Rotates an inertial vector into the Earth-fixed frame at `epoch_s`.
pub fn inertial_to_ecef(p: Vec3, epoch_s: f64) -> Vec3 {
    let theta = (EARTH_ROTATION_DEG_S * epoch_s).to_radians();
    let (s, c) = theta.sin_cos();
    [c * p[0] + s * p[1], -s * p[0] + c * p[1], p[2]]
}

/// ECEF positions (km) of every satellite at `epoch_s`.
pub fn propagate(elements: &[SatelliteElement], epoch_s: f64) -> Vec<(NodeId, Vec3)> {
    elements
        .iter()
        .map(|e| (e.id, inertial_to_ecef(e.inertial_position(epoch_s), epoch_s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteRole {
    Server,
    Client,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSite {
    pub id: NodeId,
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub role: SiteRole,
}

impl GroundSite {
    pub fn ecef(&self) -> Vec3 {
        let lat = self.latitude_deg.to_radians();
        let lon = self.longitude_deg.to_radians();
        let (slat, clat) = lat.sin_cos();
        let (slon, clon) = lon.sin_cos();
        [
            EARTH_RADIUS_KM * clat * clon,
            EARTH_RADIUS_KM * clat * slon,
            EARTH_RADIUS_KM * slat,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::invalid(format!("sites[{}].lat", self.name), "must lie in [-90, 90]"));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::invalid(format!("sites[{}].lon", self.name), "must lie in [-180, 180]"));
        }
        Ok(())
    }
}

/// Elevation angle (degrees) of `sat_pos` seen from `site`.
pub fn elevation_deg(sat_pos: Vec3, site: &GroundSite) -> f64 {
    let g = site.ecef();
    let los = sub(sat_pos, g);
    let up = dot(los, g) / (norm(los) * norm(g));
    up.clamp(-1.0, 1.0).asin().to_degrees()
}

pub fn visible(sat_pos: Vec3, site: &GroundSite, elevation_mask_deg: f64) -> bool {
    elevation_deg(sat_pos, site) >= elevation_mask_deg
}

/// True when the segment `a`–`b` clears the Earth sphere.
pub fn line_of_sight(a: Vec3, b: Vec3) -> bool {
    let d = sub(b, a);
    let len2 = dot(d, d);
    if len2 == 0.0 {
        return true;
    }
    let t = (-dot(a, d) / len2).clamp(0.0, 1.0);
    let closest = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
    norm(closest) > EARTH_RADIUS_KM
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IslPattern {
    /// Two intra-plane plus two adjacent-plane neighbours.
    #[default]
    GridPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthDist {
    pub min_mbps: f64,
    pub max_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationConfig {
    pub num_satellites: u32,
    pub num_planes: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    #[serde(default)]
    pub isl_pattern: IslPattern,
    pub elevation_mask_deg: f64,
    pub bandwidth_dist: BandwidthDist,
    pub rng_seed: u64,
    /// Walker-delta phasing factor F.
    #[serde(default = "default_phasing")]
    pub phasing: u32,
}

fn default_phasing() -> u32 {
    1
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            num_satellites: 1000,
            num_planes: 25,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            isl_pattern: IslPattern::GridPlus,
            elevation_mask_deg: 25.0,
            bandwidth_dist: BandwidthDist { min_mbps: 10.0, max_mbps: 30.0 },
            rng_seed: 0,
            phasing: 1,
        }
    }
}

impl ConstellationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_satellites == 0 || self.num_planes == 0 {
            return Err(Error::invalid("num_satellites", "constellation must not be empty"));
        }
        if !self.num_satellites.is_multiple_of(self.num_planes) {
            return Err(Error::invalid("num_satellites", "must be divisible by num_planes"));
        }
        let bw = self.bandwidth_dist;
        if !(bw.min_mbps > 0.0 && bw.min_mbps <= bw.max_mbps && bw.max_mbps.is_finite()) {
            return Err(Error::invalid("bandwidth_dist", "need 0 < min_mbps <= max_mbps"));
        }
        if !(-90.0..90.0).contains(&self.elevation_mask_deg) {
            return Err(Error::invalid("elevation_mask_deg", "must lie in (-90, 90)"));
        }
        Ok(())
    }

    pub fn slots_per_plane(&self) -> u32 {
        self.num_satellites / self.num_planes
    }

    /// Walker-delta i:T/P/F elements; satellite ids are `plane * slots + slot`.
    pub fn walker_delta(&self) -> Result<Vec<SatelliteElement>> {
        self.validate()?;
        let planes = self.num_planes;
        let slots = self.slots_per_plane();
        let total = self.num_satellites as f64;
        let mut out = Vec::with_capacity(self.num_satellites as usize);
        for p in 0..planes {
            for s in 0..slots {
                let raan = 360.0 * p as f64 / planes as f64;
                let phase = (360.0 * s as f64 / slots as f64
                    + 360.0 * self.phasing as f64 * p as f64 / total)
                    .rem_euclid(360.0);
                let el = SatelliteElement {
                    id: NodeId(p * slots + s),
                    altitude_km: self.altitude_km,
                    inclination_deg: self.inclination_deg,
                    plane_index: p,
                    slot_index: s,
                    raan_deg: raan,
                    phase_deg: phase,
                };
                el.validate()?;
                out.push(el);
            }
        }
        Ok(out)
    }
}

/// Candidate ISL endpoints for the grid-plus pattern, each unordered pair once.
pub fn grid_plus_pairs(elements: &[SatelliteElement]) -> Vec<(NodeId, NodeId)> {
    let planes = elements.iter().map(|e| e.plane_index).max().map_or(0, |m| m + 1);
    let slots = elements.iter().map(|e| e.slot_index).max().map_or(0, |m| m + 1);
    let mut grid = vec![None; (planes * slots) as usize];
    for e in elements {
        grid[(e.plane_index * slots + e.slot_index) as usize] = Some(e.id);
    }
    let at = |p: u32, s: u32| grid[(p * slots + s) as usize];
    let mut pairs = Vec::new();
    for e in elements {
        let (p, s) = (e.plane_index, e.slot_index);
        let neighbours = [(p, (s + 1) % slots), ((p + 1) % planes, s)];
        for (np, ns) in neighbours {
            if let Some(other) = at(np, ns) {
                if other != e.id {
                    let pair = if e.id < other { (e.id, other) } else { (other, e.id) };
                    pairs.push(pair);
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Mixes the sampling key into a 64-bit stream seed (splitmix64 finalizer).
fn stream_seed(rng_seed: u64, window_index: u32, a: NodeId, b: NodeId) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut h = mix(rng_seed);
    h = mix(h ^ window_index as u64);
    h = mix(h ^ ((lo.0 as u64) << 32 | hi.0 as u64));
    h
}

/// Bandwidth for one undirected edge in one window. Independent of the
/// order in which edges are generated.
pub fn sample_bandwidth(dist: BandwidthDist, rng_seed: u64, window_index: u32, a: NodeId, b: NodeId) -> f64 {
    if dist.min_mbps == dist.max_mbps {
        return dist.min_mbps;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(rng_seed, window_index, a, b));
    rng.random_range(dist.min_mbps..=dist.max_mbps)
}

fn delay_ms(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b)) / SPEED_OF_LIGHT_KM_S * 1e3
}

/// Connectivity of one window evaluated at its start epoch.
pub fn build_snapshot(
    config: &ConstellationConfig,
    elements: &[SatelliteElement],
    sites: &[GroundSite],
    window_index: u32,
    window_length_s: f64,
) -> Result<SnapshotGraph> {
    config.validate()?;
    let epoch = window_index as f64 * window_length_s;
    let positions = propagate(elements, epoch);
    let pos_of: std::collections::HashMap<NodeId, Vec3> = positions.iter().copied().collect();
    let dist = config.bandwidth_dist;

    let mut edges = Vec::new();
    let candidates = match config.isl_pattern {
        IslPattern::GridPlus => grid_plus_pairs(elements),
    };
    for (a, b) in candidates {
        let (pa, pb) = (pos_of[&a], pos_of[&b]);
        if line_of_sight(pa, pb) {
            let bw = sample_bandwidth(dist, config.rng_seed, window_index, a, b);
            edges.push(Edge::new(a, b, bw, delay_ms(pa, pb)));
        }
    }
    for site in sites {
        let g = site.ecef();
        for &(sat, p) in &positions {
            if visible(p, site, config.elevation_mask_deg) {
                let bw = sample_bandwidth(dist, config.rng_seed, window_index, sat, site.id);
                edges.push(Edge::new(sat, site.id, bw, delay_ms(p, g)));
            }
        }
    }
    let vertices = elements.iter().map(|e| e.id).chain(sites.iter().map(|s| s.id)).collect();
    SnapshotGraph::new(
        window_index,
        epoch,
        window_length_s,
        vertices,
        edges,
    )
}

/// Builds `num_windows` consecutive snapshots in parallel.
pub fn build_temporal_graph(
    config: &ConstellationConfig,
    elements: &[SatelliteElement],
    sites: &[GroundSite],
    num_windows: u32,
    window_length_s: f64,
) -> Result<TemporalGraph> {
    use rayon::prelude::*;
    let snapshots = (0..num_windows)
        .into_par_iter()
        .map(|w| build_snapshot(config, elements, sites, w, window_length_s))
        .collect::<Result<Vec<_>>>()?;
    TemporalGraph::new(snapshots)
}
