use thiserror::Error;

use crate::ids::{ClientId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no route from {src} to {dst} in window {window}")]
    NoRoute { src: NodeId, dst: NodeId, window: u32 },

    /// Several clients could not be reached; used by the schedulers so that
    /// callers can list every offender at once.
    #[error("unreachable clients in window {window}: {}", format_clients(.clients))]
    Unreachable { clients: Vec<ClientId>, window: u32 },

    #[error("time {time_s} s lies outside the temporal graph horizon [0, {horizon_s}) s")]
    OutOfHorizon { time_s: f64, horizon_s: f64 },

    #[error("transmission for client {client} overruns window {window} (ends at {end_s} s)")]
    WindowOverrun { client: ClientId, window: u32, end_s: f64 },

    #[error("path has no edges")]
    EmptyPath,

    #[error("bandwidth must be positive, got {0} Mbps")]
    ZeroBandwidth(f64),

    #[error("unknown client {0}")]
    UnknownClient(ClientId),

    #[error("exhaustive search supports at most {limit} clients, got {count}")]
    TooManyClients { count: usize, limit: usize },

    #[error("sweep result has no rows for policy {0}")]
    MissingPolicy(String),

    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("unsupported format_version {found} (expected major {expected})")]
    FormatVersion { found: u32, expected: u32 },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), reason: reason.into() }
    }
}

fn format_clients(clients: &[ClientId]) -> String {
    clients.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}
