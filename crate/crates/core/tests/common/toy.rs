pub const SCENARIO: &str = r#"{
  "format_version": 1,
  "constellation": {
    "num_satellites": 400, "num_planes": 20, "altitude_km": 550, "inclination_deg": 53,
    "isl_pattern": "grid_plus", "elevation_mask_deg": 10,
    "bandwidth_dist": {"min_mbps": 10, "max_mbps": 30}, "rng_seed": 3
  },
  "sites": [
    {"name": "Singapore", "lat": 1.35, "lon": 103.82, "role": "server"},
    {"name": "Jakarta", "lat": -6.21, "lon": 106.85, "role": "client"},
    {"name": "Bangkok", "lat": 13.76, "lon": 100.5, "role": "client"},
    {"name": "Manila", "lat": 14.6, "lon": 120.98, "role": "client"}
  ],
  "task": {"model": "LeNet-5", "server_site": "Singapore", "client_sites": ["Jakarta", "Bangkok", "Manila"]},
  "scheduling": {"window_length_s": 10, "horizon_windows": 8}
}"#;

pub fn plan(sweep: &str, policies: &str, seeds: &str) -> String {
    format!(
        r#"{{"format_version": 1, "scenario": {SCENARIO}, "sweep": {sweep}, "policies": {policies}, "seeds": {seeds}, "channel": "per_direction"}}"#
    )
}
