//! Directed labeled networks: vertices with firing thresholds, edges with a
//! travel time and a signal intensity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

pub const DEFAULT_THRESHOLD: u32 = 2;
pub const DEFAULT_INTENSITY: i32 = 1;
pub const DEFAULT_TRAVEL_TIME: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub travel_time: u32,
    /// Negative values are inhibitory.
    pub intensity: i32,
}

impl Edge {
    pub fn unit(src: VertexId, dst: VertexId) -> Self {
        Edge {
            src,
            dst,
            travel_time: DEFAULT_TRAVEL_TIME,
            intensity: DEFAULT_INTENSITY,
        }
    }

    pub fn with_time(mut self, travel_time: u32) -> Self {
        self.travel_time = travel_time;
        self
    }

    pub fn with_intensity(mut self, intensity: i32) -> Self {
        self.intensity = intensity;
        self
    }
}

/// A network. Parallel edges are allowed; an edge is identified by its
/// position in [`Network::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    vertices: BTreeSet<VertexId>,
    edges: Vec<Edge>,
    thresholds: BTreeMap<VertexId, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonpositiveTravelTime { edge: usize },
    UnknownEndpoint { edge: usize, vertex: VertexId },
    NonpositiveThreshold { vertex: VertexId },
    ThresholdForUnknownVertex { vertex: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonpositiveTravelTime { edge } => {
                write!(f, "nonpositive travel time (edge #{edge})")
            }
            Violation::UnknownEndpoint { edge, vertex } => {
                write!(f, "unknown endpoint {vertex} (edge #{edge})")
            }
            Violation::NonpositiveThreshold { vertex } => {
                write!(f, "nonpositive threshold (vertex {vertex})")
            }
            Violation::ThresholdForUnknownVertex { vertex } => {
                write!(f, "threshold for unknown vertex {vertex}")
            }
        }
    }
}

impl Network {
    /// Builds a network without checking it; see [`Network::validate`].
    /// Vertices without an entry in `thresholds` get [`DEFAULT_THRESHOLD`].
    pub fn from_parts(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: Vec<Edge>,
        thresholds: BTreeMap<VertexId, u32>,
    ) -> Self {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut all = thresholds;
        for v in &vertices {
            all.entry(*v).or_insert(DEFAULT_THRESHOLD);
        }
        Network {
            vertices,
            edges,
            thresholds: all,
        }
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn thresholds(&self) -> &BTreeMap<VertexId, u32> {
        &self.thresholds
    }

    pub fn threshold(&self, v: VertexId) -> u32 {
        self.thresholds
            .get(&v)
            .copied()
            .unwrap_or(DEFAULT_THRESHOLD)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.edges.iter().filter(|e| e.dst == v).count()
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.edges.iter().filter(|e| e.src == v).count()
    }

    pub fn incoming(&self, v: VertexId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.dst == v)
    }

    pub fn outgoing(&self, v: VertexId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.src == v)
    }

    pub fn max_travel_time(&self) -> u32 {
        self.edges.iter().map(|e| e.travel_time).max().unwrap_or(0)
    }

    /// Returns the width `l` when this network is exactly `make_path(l)`
    /// (same edges up to order, unit labels, default thresholds).
    pub fn path_width(&self) -> Option<u32> {
        let l = u32::try_from(self.vertices.len()).ok()?;
        if l == 0 || self.vertices.iter().copied().ne(1..=l) {
            return None;
        }
        let canonical = make_path(l).ok()?;
        let mut mine = self.edges.clone();
        let mut theirs = canonical.edges;
        let key = |e: &Edge| (e.src, e.dst, e.travel_time, e.intensity);
        mine.sort_by_key(key);
        theirs.sort_by_key(key);
        (mine == theirs && self.thresholds == canonical.thresholds).then_some(l)
    }

    /// Lists every broken invariant. Empty means the network is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.travel_time == 0 {
                out.push(Violation::NonpositiveTravelTime { edge: i });
            }
            for v in [e.src, e.dst] {
                if !self.vertices.contains(&v) {
                    out.push(Violation::UnknownEndpoint { edge: i, vertex: v });
                }
            }
        }
        for (&v, &th) in &self.thresholds {
            if !self.vertices.contains(&v) {
                out.push(Violation::ThresholdForUnknownVertex { vertex: v });
            } else if th == 0 {
                out.push(Violation::NonpositiveThreshold { vertex: v });
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = NetworkFile {
            vertices: self.vertices.iter().copied().collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    src: e.src,
                    dst: e.dst,
                    time: e.travel_time,
                    intensity: e.intensity,
                })
                .collect(),
            thresholds: self
                .thresholds
                .iter()
                .map(|(v, t)| (v.to_string(), *t))
                .collect(),
        };
        serde_json::to_value(file).expect("network serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: NetworkFile =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("network: {e}")))?;
        let mut thresholds = BTreeMap::new();
        for (k, v) in file.thresholds {
            let id: VertexId = k
                .parse()
                .map_err(|_| Error::Parse(format!("network: bad threshold key {k:?}")))?;
            thresholds.insert(id, v);
        }
        let edges = file
            .edges
            .into_iter()
            .map(|e| Edge {
                src: e.src,
                dst: e.dst,
                travel_time: e.time,
                intensity: e.intensity,
            })
            .collect();
        Ok(Network::from_parts(file.vertices, edges, thresholds))
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    vertices: Vec<VertexId>,
    #[serde(default)]
    edges: Vec<EdgeFile>,
    #[serde(default)]
    thresholds: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    src: VertexId,
    dst: VertexId,
    #[serde(default = "default_time")]
    time: u32,
    #[serde(default = "default_intensity")]
    intensity: i32,
}

fn default_time() -> u32 {
    DEFAULT_TRAVEL_TIME
}

fn default_intensity() -> i32 {
    DEFAULT_INTENSITY
}

fn size_check(what: &str, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize(format!(
            "{what} needs at least one vertex"
        )));
    }
    Ok(())
}

/// Path `1 -> 2 -> ... -> l`, each vertex with a self-edge; unit labels.
pub fn make_path(l: u32) -> Result<Network> {
    size_check("path", l)?;
    let mut edges = Vec::with_capacity(2 * l as usize - 1);
    for i in 1..=l {
        edges.push(Edge::unit(i, i));
        if i < l {
            edges.push(Edge::unit(i, i + 1));
        }
    }
    Ok(Network::from_parts(1..=l, edges, BTreeMap::new()))
}

/// A path closed by the extra edge `l -> 1`.
pub fn make_cycle(l: u32) -> Result<Network> {
    let mut net = make_path(l)?;
    net.edges.push(Edge::unit(l, 1));
    Ok(net)
}

/// Complete directed graph on `1..=n` without self-edges, uniform labels.
pub fn make_clique(n: u32, travel: u32, threshold: u32) -> Result<Network> {
    size_check("clique", n)?;
    if travel == 0 {
        return Err(Error::InvalidSize(
            "clique travel time must be positive".into(),
        ));
    }
    if threshold == 0 {
        return Err(Error::InvalidSize(
            "clique threshold must be positive".into(),
        ));
    }
    let mut edges = Vec::with_capacity((n * n.saturating_sub(1)) as usize);
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                edges.push(Edge::unit(i, j).with_time(travel));
            }
        }
    }
    let thresholds = (1..=n).map(|v| (v, threshold)).collect();
    Ok(Network::from_parts(1..=n, edges, thresholds))
}

/// Rooted tree with edges pointing to the root. `parent_map` maps each
/// non-root vertex to its parent; an empty map is the single vertex `1`.
pub fn make_rooted_tree(parent_map: &BTreeMap<VertexId, VertexId>) -> Result<Network> {
    if parent_map.is_empty() {
        return make_path(1);
    }
    let mut vertices: BTreeSet<VertexId> = parent_map.keys().copied().collect();
    vertices.extend(parent_map.values().copied());
    let roots: Vec<VertexId> = vertices
        .iter()
        .copied()
        .filter(|v| !parent_map.contains_key(v))
        .collect();
    if roots.len() != 1 {
        return Err(Error::InvalidTree(format!(
            "expected exactly one root, found {}",
            roots.len()
        )));
    }
    // every vertex must reach the root
    for &start in parent_map.keys() {
        let mut cur = start;
        let mut steps = 0usize;
        while let Some(&p) = parent_map.get(&cur) {
            cur = p;
            steps += 1;
            if steps > vertices.len() {
                return Err(Error::InvalidTree(format!("cycle through vertex {start}")));
            }
        }
    }
    let mut edges: Vec<Edge> = vertices.iter().map(|&v| Edge::unit(v, v)).collect();
    edges.extend(parent_map.iter().map(|(&c, &p)| Edge::unit(c, p)));
    Ok(Network::from_parts(vertices, edges, BTreeMap::new()))
}
