//! Vertex sets that keep themselves firing forever, and stimulus schedules
//! that start such a cascade.

use std::collections::{BTreeMap, BTreeSet};

use crate::cascade::{activation_closure, stv, StimulusSet};
use crate::error::{Error, Result};
use crate::graph::{Network, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistenceSchedule {
    /// End of every activation window.
    pub m: u32,
    /// `n -> (M - m_n, M)`.
    pub windows: BTreeMap<VertexId, (u32, u32)>,
    pub stimuli: StimulusSet,
}

/// Worst-case input to `n` while every vertex of `set` is active: all edges
/// from `set`, plus the inhibitory edges from outside it.
fn guaranteed_input(network: &Network, set: &BTreeSet<VertexId>, n: VertexId) -> i64 {
    network
        .incoming(n)
        .map(|e| {
            if set.contains(&e.src) {
                e.intensity as i64
            } else {
                (e.intensity as i64).min(0)
            }
        })
        .sum()
}

fn first_failure(network: &Network, set: &BTreeSet<VertexId>) -> Option<VertexId> {
    set.iter()
        .copied()
        .find(|&n| guaranteed_input(network, set, n) < network.threshold(n) as i64)
}

fn check_members(network: &Network, set: &BTreeSet<VertexId>) -> Result<()> {
    match set.iter().find(|v| !network.contains(**v)) {
        Some(&v) => Err(Error::UnknownVertex(v)),
        None => Ok(()),
    }
}

/// Every vertex of `set` receives at least its threshold from in-edges
/// whose sources lie in `set`.
pub fn check_sufficient_conditions(network: &Network, set: &BTreeSet<VertexId>) -> bool {
    set.iter().all(|v| network.contains(*v)) && first_failure(network, set).is_none()
}

fn window_lengths(network: &Network, set: &BTreeSet<VertexId>) -> Result<BTreeMap<VertexId, u32>> {
    check_members(network, set)?;
    if let Some(n) = first_failure(network, set) {
        return Err(Error::Precondition(format!(
            "vertex {n} gets {} from the set, below its threshold {}",
            guaranteed_input(network, set, n),
            network.threshold(n)
        )));
    }
    Ok(set
        .iter()
        .map(|&n| {
            let m = network
                .outgoing(n)
                .filter(|e| set.contains(&e.dst))
                .map(|e| e.travel_time)
                .max()
                .unwrap_or(0);
            (n, m)
        })
        .collect())
}

/// `m_n` is the longest travel time from `n` into the set and `M` the
/// largest `m_n`; each `n` is stimulated at every time of `[M - m_n, M]`.
pub fn schedule_infinite(
    network: &Network,
    set: &BTreeSet<VertexId>,
) -> Result<PersistenceSchedule> {
    let lens = window_lengths(network, set)?;
    let m = lens.values().copied().max().unwrap_or(0);
    let mut windows = BTreeMap::new();
    let mut stimuli = StimulusSet::new();
    for (&n, &mn) in &lens {
        let start = m.checked_sub(mn).expect("M is the largest window");
        windows.insert(n, (start, m));
        stimuli.extend((start..=m).map(|t| stv(n, t)));
    }
    Ok(PersistenceSchedule {
        m,
        windows,
        stimuli,
    })
}

/// The whole set at every time of `[0, M]`.
pub fn synfire_schedule(network: &Network, set: &BTreeSet<VertexId>) -> Result<StimulusSet> {
    let m = schedule_infinite(network, set)?.m;
    Ok(synfire_window(set, m))
}

/// The whole set at every time of `[0, last]`.
pub fn synfire_window(set: &BTreeSet<VertexId>, last: u32) -> StimulusSet {
    set.iter()
        .flat_map(|&n| (0..=last).map(move |t| stv(n, t)))
        .collect()
}

/// Whether every vertex of `set` is active at every time from the last
/// stimulus up to `horizon`.
pub fn verify_persistence(
    network: &Network,
    stimuli: &StimulusSet,
    set: &BTreeSet<VertexId>,
    horizon: u32,
) -> Result<bool> {
    check_members(network, set)?;
    if set.is_empty() {
        return Ok(true);
    }
    let Some(m) = stimuli.iter().map(|s| s.time).max() else {
        return Ok(false);
    };
    if horizon <= m {
        return Err(Error::Precondition(format!(
            "horizon {horizon} must exceed the last stimulus time {m}"
        )));
    }
    let d = activation_closure(network, stimuli, horizon)?;
    Ok((m..=horizon).all(|t| set.iter().all(|&n| d.is_active(stv(n, t)))))
}

/// `10 (M + 1) + 100`.
pub fn default_horizon(m: u32) -> u32 {
    10 * (m + 1) + 100
}
