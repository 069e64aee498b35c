//! Activation closures under the coincidence-threshold firing rule, and the
//! classification of the resulting diagrams.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, VertexId};

/// A space-time vertex. Ordered by time first, then vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(VertexId, u32)", into = "(VertexId, u32)")]
pub struct Stv {
    pub vertex: VertexId,
    pub time: u32,
}

pub fn stv(vertex: VertexId, time: u32) -> Stv {
    Stv { vertex, time }
}

impl From<(VertexId, u32)> for Stv {
    fn from((vertex, time): (VertexId, u32)) -> Self {
        Stv { vertex, time }
    }
}

impl From<Stv> for (VertexId, u32) {
    fn from(s: Stv) -> Self {
        (s.vertex, s.time)
    }
}

impl Ord for Stv {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.vertex).cmp(&(other.time, other.vertex))
    }
}

impl PartialOrd for Stv {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Stv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.vertex, self.time)
    }
}

pub type StimulusSet = BTreeSet<Stv>;

/// Parses `[[vertex,time],...]`.
pub fn parse_stimuli(s: &str) -> Result<StimulusSet> {
    let v: Vec<Stv> = serde_json::from_str(s).map_err(|e| Error::Parse(format!("stimuli: {e}")))?;
    Ok(v.into_iter().collect())
}

pub fn stimuli_to_json(s: &StimulusSet) -> serde_json::Value {
    serde_json::to_value(s.iter().collect::<Vec<_>>()).expect("stimuli serialize")
}

/// Default horizon: max primary time + network size + 1.
pub fn default_horizon(network: &Network, primaries: &StimulusSet) -> u32 {
    let top = primaries.iter().map(|s| s.time).max().unwrap_or(0);
    top + network.len() as u32 + 1
}

/// A network with its primaries and the computed closure up to `horizon`.
/// Redundant primaries stay in `primaries` and are listed separately; they
/// never appear among the secondaries.
#[derive(Debug, Clone)]
pub struct ActivationDiagram {
    network: Network,
    primaries: StimulusSet,
    horizon: u32,
    secondaries: BTreeSet<Stv>,
    redundant: BTreeSet<Stv>,
}

/// Computes the closure. A vertex fires at `t` when the summed intensity of
/// in-edges whose source was active at `t - travel` reaches its threshold.
pub fn activation_closure(
    network: &Network,
    primaries: &StimulusSet,
    horizon: u32,
) -> Result<ActivationDiagram> {
    for p in primaries {
        if !network.contains(p.vertex) {
            return Err(Error::UnknownVertex(p.vertex));
        }
        if p.time > horizon {
            return Err(Error::Precondition(format!(
                "primary {p} lies beyond horizon {horizon}"
            )));
        }
    }
    let ids: Vec<VertexId> = network.vertices().iter().copied().collect();
    let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // incoming[dst] = (src index, travel, intensity)
    let mut incoming: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); ids.len()];
    for e in network.edges() {
        if let (Some(&s), Some(&d)) = (index.get(&e.src), index.get(&e.dst)) {
            incoming[d].push((s, e.travel_time as usize, e.intensity as i64));
        }
    }
    let thresholds: Vec<i64> = ids.iter().map(|&v| network.threshold(v) as i64).collect();
    let mut stim: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for p in primaries {
        stim.entry(p.time).or_default().push(index[&p.vertex]);
    }

    let steps = horizon as usize + 1;
    let mut active = vec![vec![false; ids.len()]; steps];
    let mut secondaries = BTreeSet::new();
    let mut redundant = BTreeSet::new();
    for t in 0..steps {
        let mut row = vec![false; ids.len()];
        for (d, ins) in incoming.iter().enumerate() {
            let sum: i64 = ins
                .iter()
                .filter(|&&(s, travel, _)| travel <= t && active[t - travel][s])
                .map(|&(_, _, w)| w)
                .sum();
            if !ins.is_empty() && sum >= thresholds[d] {
                row[d] = true;
            }
        }
        let fired = row.clone();
        if let Some(list) = stim.get(&(t as u32)) {
            for &d in list {
                if fired[d] {
                    redundant.insert(stv(ids[d], t as u32));
                }
                row[d] = true;
            }
        }
        for (d, &f) in fired.iter().enumerate() {
            let s = stv(ids[d], t as u32);
            if f && !primaries.contains(&s) {
                secondaries.insert(s);
            }
        }
        active[t] = row;
    }
    Ok(ActivationDiagram {
        network: network.clone(),
        primaries: primaries.clone(),
        horizon,
        secondaries,
        redundant,
    })
}

impl ActivationDiagram {
    /// Closure with the default horizon.
    pub fn simulate(network: &Network, primaries: &StimulusSet) -> Result<Self> {
        activation_closure(network, primaries, default_horizon(network, primaries))
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn primaries(&self) -> &StimulusSet {
        &self.primaries
    }

    pub fn secondaries(&self) -> &BTreeSet<Stv> {
        &self.secondaries
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Primaries that also meet the firing condition.
    pub fn redundant_primaries(&self) -> &BTreeSet<Stv> {
        &self.redundant
    }

    pub fn activated(&self) -> BTreeSet<Stv> {
        self.primaries.union(&self.secondaries).copied().collect()
    }

    pub fn is_active(&self, s: Stv) -> bool {
        self.primaries.contains(&s) || self.secondaries.contains(&s)
    }

    pub fn is_redundant(&self) -> bool {
        !self.redundant.is_empty()
    }

    pub fn profit(&self) -> i64 {
        self.secondaries.len() as i64 - self.primaries.len() as i64
    }

    /// Connectivity of the secondary vertices under the undirected edges of
    /// the base diagram, `(u,t) - (v,t+travel)`.
    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.secondaries.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            for e in self.network.edges() {
                let mut next = Vec::with_capacity(2);
                if e.src == cur.vertex {
                    next.push(stv(e.dst, cur.time + e.travel_time));
                }
                if e.dst == cur.vertex && cur.time >= e.travel_time {
                    next.push(stv(e.src, cur.time - e.travel_time));
                }
                for n in next {
                    if self.secondaries.contains(&n) && seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
        seen.len() == self.secondaries.len()
    }

    /// Primaries that feed no secondary vertex through any out-edge.
    pub fn non_contributing_primaries(&self) -> Vec<Stv> {
        self.primaries
            .iter()
            .copied()
            .filter(|p| {
                !self.network.outgoing(p.vertex).any(|e| {
                    self.secondaries
                        .contains(&stv(e.dst, p.time + e.travel_time))
                })
            })
            .collect()
    }

    /// Connected, not redundant, nonempty, profit ≥ 0 and every primary
    /// contributes. Only defined on paths.
    pub fn is_chinampa(&self) -> Result<bool> {
        if self.network.path_width().is_none() {
            return Err(Error::UnsupportedTopology(
                "chinampas are defined on path networks only".into(),
            ));
        }
        Ok(!self.primaries.is_empty()
            && !self.is_redundant()
            && self.profit() >= 0
            && self.is_connected()
            && self.non_contributing_primaries().is_empty())
    }

    /// The unique activated vertex of maximal time.
    pub fn find_spike(&self) -> Result<Stv> {
        if !self.is_chinampa()? {
            return Err(Error::Precondition("diagram is not a chinampa".into()));
        }
        let act = self.activated();
        let top = act
            .iter()
            .next_back()
            .copied()
            .expect("chinampa is nonempty");
        if act.iter().filter(|s| s.time == top.time).count() != 1 {
            return Err(Error::Precondition(format!(
                "several activated vertices at time {}",
                top.time
            )));
        }
        Ok(top)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "primary": stimuli_to_json(&self.primaries),
            "secondary": stimuli_to_json(&self.secondaries),
            "profit": self.profit(),
            "redundant": self.is_redundant(),
            "connected": self.is_connected(),
        })
    }
}

/// Elementary automaton 192 with stimuli injected row by row. Column `c`
/// stands for path vertex `c+1`; the cell left of column 0 is white.
/// Returns `steps + 1` rows.
pub fn rule192_evolve(initial_rows: &[Vec<bool>], width: usize, steps: usize) -> Vec<Vec<bool>> {
    let stim = |t: usize, c: usize| {
        initial_rows
            .get(t)
            .and_then(|r| r.get(c))
            .copied()
            .unwrap_or(false)
    };
    let mut grid = Vec::with_capacity(steps + 1);
    let mut row: Vec<bool> = (0..width).map(|c| stim(0, c)).collect();
    grid.push(row.clone());
    for t in 1..=steps {
        let next: Vec<bool> = (0..width)
            .map(|c| (row[c] && c > 0 && row[c - 1]) || stim(t, c))
            .collect();
        row = next;
        grid.push(row.clone());
    }
    grid
}

/// Bitmask form of [`rule192_evolve`] for widths up to 128: bit `c` is
/// column `c`.
pub fn rule192_masks(stimuli: &[u128], width: u32, steps: usize) -> Vec<u128> {
    assert!((1..=128).contains(&width));
    let full = if width == 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut row = stimuli.first().copied().unwrap_or(0) & full;
    out.push(row);
    for t in 1..=steps {
        row = (row & (row << 1) & full) | (stimuli.get(t).copied().unwrap_or(0) & full);
        out.push(row);
    }
    out
}

/// Converts a stimulus set on a path of `width` into per-time bitmasks.
pub fn stimuli_to_masks(stimuli: &StimulusSet, len: usize) -> Vec<u128> {
    let mut rows = vec![0u128; len];
    for s in stimuli {
        if (s.time as usize) < len && (1..=128).contains(&s.vertex) {
            rows[s.time as usize] |= 1u128 << (s.vertex - 1);
        }
    }
    rows
}

/// Activated set read off a grid of bitmasks.
pub fn masks_to_set(rows: &[u128]) -> BTreeSet<Stv> {
    let mut out = BTreeSet::new();
    for (t, &r) in rows.iter().enumerate() {
        let mut bits = r;
        while bits != 0 {
            let c = bits.trailing_zeros();
            out.insert(stv(c + 1, t as u32));
            bits &= bits - 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_clique, make_cycle, make_path, Edge};

    fn set(xs: &[(u32, u32)]) -> BTreeSet<Stv> {
        xs.iter().map(|&(v, t)| stv(v, t)).collect()
    }

    #[test]
    fn pyramid_of_three() {
        let net = make_path(3).unwrap();
        let d = activation_closure(&net, &set(&[(1, 0), (2, 0), (3, 0)]), 3).unwrap();
        assert_eq!(d.secondaries(), &set(&[(2, 1), (3, 1), (3, 2)]));
        assert!(!d.is_redundant());
        assert!(d.is_connected());
        assert_eq!(d.profit(), 0);
        assert!(d.is_chinampa().unwrap());
        assert_eq!(d.find_spike().unwrap(), stv(3, 2));
    }

    #[test]
    fn left_column_stimulus() {
        let net = make_path(4).unwrap();
        let d = ActivationDiagram::simulate(&net, &set(&[(1, 0), (2, 0), (3, 0), (2, 2)])).unwrap();
        assert_eq!(d.secondaries(), &set(&[(2, 1), (3, 1), (3, 2), (3, 3)]));
    }

    #[test]
    fn empty_stimuli() {
        for net in [make_path(4).unwrap(), make_cycle(3).unwrap()] {
            let d = ActivationDiagram::simulate(&net, &BTreeSet::new()).unwrap();
            assert!(d.activated().is_empty());
            assert!(d.is_connected());
        }
    }

    #[test]
    fn unknown_vertex() {
        let net = make_path(2).unwrap();
        assert_eq!(
            ActivationDiagram::simulate(&net, &set(&[(9, 0)])).unwrap_err(),
            Error::UnknownVertex(9)
        );
    }

    #[test]
    fn redundancy() {
        let net = make_path(2).unwrap();
        let d = ActivationDiagram::simulate(&net, &set(&[(1, 0), (2, 0), (2, 1)])).unwrap();
        assert!(d.is_redundant());
        assert_eq!(d.redundant_primaries(), &set(&[(2, 1)]));
        assert!(!d.secondaries().contains(&stv(2, 1)));
        assert!(!d.is_chinampa().unwrap());

        let net = make_path(5).unwrap();
        let inside = set(&[
            (1, 0),
            (2, 0),
            (3, 0),
            (4, 0),
            (1, 1),
            (1, 2),
            (5, 1),
            (4, 2),
        ]);
        let d = ActivationDiagram::simulate(&net, &inside).unwrap();
        assert!(d.is_redundant());
        assert_eq!(d.redundant_primaries(), &set(&[(4, 2)]));
    }

    #[test]
    fn separated_pyramids() {
        let net = make_path(3).unwrap();
        let d = ActivationDiagram::simulate(&net, &set(&[(1, 0), (2, 0), (3, 0), (2, 3), (3, 3)]))
            .unwrap();
        assert_eq!(d.secondaries(), &set(&[(2, 1), (3, 1), (3, 2), (3, 4)]));
        assert!(!d.is_connected());
        assert!(!d.is_chinampa().unwrap());
    }

    #[test]
    fn profits_of_pyramids() {
        for (l, want) in [(2u32, -1i64), (3, 0), (4, 2), (5, 5)] {
            let net = make_path(l).unwrap();
            let base: StimulusSet = (1..=l).map(|v| stv(v, 0)).collect();
            let d = ActivationDiagram::simulate(&net, &base).unwrap();
            assert_eq!(d.profit(), want);
            assert_eq!(d.secondaries().len() as u32, l * (l - 1) / 2);
        }
        let net = make_path(2).unwrap();
        let d = ActivationDiagram::simulate(&net, &set(&[(1, 0), (2, 0)])).unwrap();
        assert!(!d.is_chinampa().unwrap());
    }

    #[test]
    fn not_a_chinampa_with_hole() {
        let net = make_path(5).unwrap();
        let p = set(&[
            (1, 0),
            (2, 0),
            (3, 0),
            (4, 0),
            (1, 1),
            (1, 2),
            (5, 1),
            (4, 2),
            (3, 3),
            (4, 3),
        ]);
        let d = ActivationDiagram::simulate(&net, &p).unwrap();
        assert!(!d.is_chinampa().unwrap());
    }

    #[test]
    fn two_pyramids() {
        let net = make_path(5).unwrap();
        let d = ActivationDiagram::simulate(&net, &set(&[(1, 0), (2, 0), (3, 0), (4, 2), (5, 2)]))
            .unwrap();
        assert_eq!(d.profit(), 1);
        assert!(d.is_chinampa().unwrap());
        assert_eq!(d.find_spike().unwrap(), stv(5, 4));
    }

    #[test]
    fn chain_below_keeps_spike() {
        let net = make_path(5).unwrap();
        let top = set(&[(3, 2), (4, 2), (5, 2)]);
        // pyr2 with pyramidion (3,2), then another whose pyramidion is (2,1)
        let chained = set(&[(1, 0), (2, 0), (3, 1), (4, 2), (5, 2)]);
        let a = ActivationDiagram::simulate(&net, &top).unwrap();
        let b = ActivationDiagram::simulate(&net, &chained).unwrap();
        assert!(b.is_chinampa().unwrap());
        assert_eq!(a.find_spike().unwrap(), b.find_spike().unwrap());
        assert_eq!(a.profit(), b.profit());
    }

    #[test]
    fn spike_needs_chinampa() {
        let net = make_path(3).unwrap();
        let d = ActivationDiagram::simulate(&net, &set(&[(1, 0), (2, 0)])).unwrap();
        assert!(matches!(d.find_spike(), Err(Error::Precondition(_))));
        let cyc = make_cycle(3).unwrap();
        let d = ActivationDiagram::simulate(&cyc, &set(&[(1, 0)])).unwrap();
        assert!(matches!(
            d.is_chinampa(),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn isolated_primary_is_rejected() {
        let net = make_path(5).unwrap();
        // a chinampa plus a lone primary that feeds nothing
        let d = ActivationDiagram::simulate(&net, &set(&[(2, 0), (3, 0), (4, 0), (5, 0), (1, 3)]))
            .unwrap();
        assert_eq!(d.non_contributing_primaries(), vec![stv(1, 3)]);
        assert!(!d.is_chinampa().unwrap());
    }

    #[test]
    fn rule192_basics() {
        let g = rule192_evolve(&[vec![true, true, false]], 3, 1);
        assert_eq!(g[1], vec![false, true, false]);
        let g = rule192_evolve(&[vec![false; 4]], 4, 5);
        assert!(g.iter().all(|r| r.iter().all(|&c| !c)));
        let g = rule192_evolve(&[vec![true, true, true]], 3, 3);
        let mut got = BTreeSet::new();
        for (t, row) in g.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                if b {
                    got.insert(stv(c as u32 + 1, t as u32));
                }
            }
        }
        let d =
            activation_closure(&make_path(3).unwrap(), &set(&[(1, 0), (2, 0), (3, 0)]), 3).unwrap();
        assert_eq!(got, d.activated());
        assert_eq!(masks_to_set(&rule192_masks(&[0b111], 3, 3)), got);
    }

    #[test]
    fn general_labels() {
        // clique of five: two stimulated vertices reach everyone one step later
        let k5 = make_clique(5, 1, 2).unwrap();
        let d = activation_closure(&k5, &set(&[(1, 0), (2, 0)]), 3).unwrap();
        assert!((1..=5).all(|v| d.is_active(stv(v, 1)) || v <= 2 && d.is_active(stv(v, 0))));
        assert!((3..=5).all(|v| d.is_active(stv(v, 1))));

        // an inhibitory edge cancels an excitatory one
        let net = Network::from_parts(
            [1, 2, 3],
            vec![
                Edge::unit(1, 3).with_intensity(2),
                Edge::unit(2, 3).with_intensity(-1),
            ],
            BTreeMap::new(),
        );
        let on = activation_closure(&net, &set(&[(1, 0)]), 2).unwrap();
        assert!(on.is_active(stv(3, 1)));
        let off = activation_closure(&net, &set(&[(1, 0), (2, 0)]), 2).unwrap();
        assert!(!off.is_active(stv(3, 1)));

        // longer travel times delay the arrival
        let net = Network::from_parts(
            [1, 2],
            vec![Edge::unit(1, 2).with_time(3).with_intensity(2)],
            BTreeMap::new(),
        );
        let d = activation_closure(&net, &set(&[(1, 0)]), 5).unwrap();
        assert_eq!(d.secondaries(), &set(&[(2, 3)]));
    }

    #[test]
    fn json_shapes() {
        let s = parse_stimuli("[[1,0],[2,0],[3,0]]").unwrap();
        assert_eq!(s, set(&[(1, 0), (2, 0), (3, 0)]));
        assert!(matches!(parse_stimuli("[[1,-1]]"), Err(Error::Parse(_))));
        let d = ActivationDiagram::simulate(&make_path(3).unwrap(), &s).unwrap();
        let j = d.to_json();
        assert_eq!(j["secondary"], serde_json::json!([[2, 1], [3, 1], [3, 2]]));
        assert_eq!(j["profit"], 0);
        assert_eq!(j["redundant"], false);
        assert_eq!(j["connected"], true);
    }
}
