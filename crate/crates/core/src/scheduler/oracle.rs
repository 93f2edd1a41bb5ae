use super::serial::SerialRound;
use super::{Policy, RoundSchedule, SchedulerConfig};
use crate::error::{Error, Result};
use crate::fl_task::FlTask;
use crate::temporal_graph::TemporalGraph;

/// Largest client count the exhaustive search accepts.
pub const ORACLE_CLIENT_LIMIT: usize = 8;

/// Minimum-makespan serial schedule over every (download order, upload
/// order) pair.
///
/// Pairs are visited in lexicographic order of client indices and only a
/// strictly better makespan replaces the incumbent, so the lexicographically
/// first optimum is returned. Branches whose partial makespan already
/// reaches the incumbent are pruned.
pub fn oracle_schedule(tg: &TemporalGraph, task: &FlTask, config: &SchedulerConfig, t0: f64) -> Result<RoundSchedule> {
    if task.clients.len() > ORACLE_CLIENT_LIMIT {
        return Err(Error::TooManyClients { count: task.clients.len(), limit: ORACLE_CLIENT_LIMIT });
    }
    let round = SerialRound::new(tg, task, config, t0)?;
    let n = round.len();

    let mut search = Search {
        round: &round,
        best: f64::INFINITY,
        best_orders: None,
        first_error: None,
        prefix: Vec::with_capacity(n),
        used: vec![false; n],
    };
    let mut download_order: Vec<usize> = (0..n).collect();
    loop {
        let downloads = round.download_timeline(&download_order);
        let train_end = round.train_ends(&downloads);
        let floor = round.upload_floor(&downloads);
        let latest_train = train_end.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if latest_train < search.best {
            search.uploads(&download_order, &train_end, floor, f64::NEG_INFINITY);
        }
        if !next_permutation(&mut download_order) {
            break;
        }
    }

    match search.best_orders {
        Some((dl, ul)) => round.build(Policy::OracleOptimal, &dl, &ul),
        None => Err(search.first_error.unwrap_or(Error::invalid("clients", "no feasible ordering"))),
    }
}

struct Search<'r, 'a> {
    round: &'r SerialRound<'a>,
    best: f64,
    best_orders: Option<(Vec<usize>, Vec<usize>)>,
    first_error: Option<Error>,
    prefix: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_, '_> {
    /// Depth-first over upload orders; `free` is when the uplink frees up
    /// and `span` the latest upload end placed so far.
    fn uploads(&mut self, download_order: &[usize], train_end: &[f64], free: f64, span: f64) {
        let n = self.used.len();
        if self.prefix.len() == n {
            if span < self.best {
                self.best = span;
                self.best_orders = Some((download_order.to_vec(), self.prefix.clone()));
            }
            return;
        }
        for i in 0..n {
            if self.used[i] {
                continue;
            }
            let start = free.max(train_end[i]);
            let up = match self.round.upload(i, start) {
                Ok(up) => up,
                Err(e) => {
                    self.first_error.get_or_insert(e);
                    continue;
                }
            };
            let end = start + up.duration_s;
            let span = span.max(end);
            if span >= self.best {
                continue;
            }
            self.used[i] = true;
            self.prefix.push(i);
            self.uploads(download_order, train_end, end, span);
            self.prefix.pop();
            self.used[i] = false;
        }
    }
}

/// Advances to the next lexicographic permutation; false after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
