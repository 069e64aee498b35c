//! Pyramids on path networks: building them from primaries, membership
//! queries, factorization of chinampas, stacking, and profit by
//! inclusion-exclusion.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_integer::Roots;
use rand::Rng;
use serde::Serialize;

use crate::cascade::{activation_closure, stv, ActivationDiagram, StimulusSet, Stv};
use crate::error::{Error, Result};
use crate::graph::make_path;

/// A pyramid given by its base: the cells `lp..=rp` at time `t`. Its region
/// is `{(x,s) : s ≥ t, lp + (s-t) ≤ x ≤ rp}` and its top cell, the
/// pyramidion, is `(rp, t + rp - lp)`. Ordered by `(t, lp, rp)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PyramidInterval {
    pub t: i64,
    #[serde(rename = "lP")]
    pub lp: i64,
    #[serde(rename = "rP")]
    pub rp: i64,
}

pub type Pyramid = PyramidInterval;

impl PyramidInterval {
    pub fn new(t: i64, lp: i64, rp: i64) -> Self {
        debug_assert!(lp <= rp);
        PyramidInterval { t, lp, rp }
    }

    /// The pyramid of length `len` whose pyramidion is `(x, s)`.
    pub fn with_apex(x: i64, s: i64, len: i64) -> Self {
        PyramidInterval::new(s - len + 1, x - len + 1, x)
    }

    pub fn len(&self) -> i64 {
        self.rp - self.lp + 1
    }

    pub fn is_empty(&self) -> bool {
        self.rp < self.lp
    }

    pub fn pyramidion(&self) -> (i64, i64) {
        (self.rp, self.t + self.rp - self.lp)
    }

    pub fn top(&self) -> i64 {
        self.t + self.rp - self.lp
    }

    pub fn contains(&self, x: i64, s: i64) -> bool {
        s >= self.t && x >= self.lp + (s - self.t) && x <= self.rp
    }

    pub fn contains_pyramid(&self, q: &PyramidInterval) -> bool {
        q.t >= self.t && q.lp - q.t >= self.lp - self.t && q.rp <= self.rp
    }

    /// Live columns at time `s`, if any.
    pub fn section(&self, s: i64) -> Option<(i64, i64)> {
        let l = self.lp + (s - self.t);
        (s >= self.t && l <= self.rp).then_some((l, self.rp))
    }

    /// Region cells `(x, s)`, time ascending then position ascending.
    pub fn cells(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity((self.len() * (self.len() + 1) / 2) as usize);
        for s in self.t..=self.top() {
            let (l, r) = self.section(s).expect("inside the pyramid");
            out.extend((l..=r).map(|x| (x, s)));
        }
        out
    }

    /// Region cells that are valid space-time vertices.
    pub fn region(&self) -> BTreeSet<Stv> {
        self.cells()
            .into_iter()
            .filter(|&(x, s)| x >= 1 && s >= 0)
            .map(|(x, s)| stv(x as u32, s as u32))
            .collect()
    }

    pub fn profit(&self) -> i64 {
        let l = self.len();
        l * (l - 3) / 2
    }
}

/// `l(l-3)/2`.
pub fn pyramid_profit(l: i64) -> Result<i64> {
    if l < 2 {
        return Err(Error::Domain(format!("pyramid length {l} is below 2")));
    }
    Ok(l * (l - 3) / 2)
}

/// Largest pyramid length whose profit does not exceed `k`,
/// `floor((3 + sqrt(9 + 8k)) / 2)`.
pub fn max_pyramid_length(k: u64) -> u64 {
    (3 + (9 + 8 * k as u128).sqrt() as u64) / 2
}

/// Intervals of one pyramid per maximal same-time run of consecutive
/// primaries, each widened by the live sections of earlier pyramids it
/// touches or overlaps. Earlier pyramids are used in their widened form.
pub fn build_pyramids(primaries: &[Stv]) -> Result<Vec<PyramidInterval>> {
    if primaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "primaries must be strictly sorted by time, then vertex".into(),
        ));
    }
    let mut runs: Vec<PyramidInterval> = Vec::new();
    for p in primaries {
        let (x, t) = (p.vertex as i64, p.time as i64);
        match runs.last_mut() {
            Some(r) if r.t == t && r.rp + 1 == x => r.rp = x,
            _ => runs.push(PyramidInterval::new(t, x, x)),
        }
    }

    let mut done: Vec<PyramidInterval> = Vec::new();
    for run in runs {
        let mut iv = run;
        loop {
            let mut changed = false;
            for lower in done.iter().filter(|q| q.t < iv.t) {
                let Some((live_l, live_r)) = lower.section(iv.t) else {
                    continue;
                };
                if iv.lp >= live_l && iv.lp <= live_r + 1 && live_l < iv.lp {
                    iv.lp = live_l;
                    changed = true;
                }
                if iv.rp >= live_l - 1 && iv.rp <= live_r && live_r > iv.rp {
                    iv.rp = live_r;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        // merge with same-time intervals already widened
        loop {
            let hit = done
                .iter()
                .position(|q| q.t == iv.t && q.lp <= iv.rp + 1 && iv.lp <= q.rp + 1);
            match hit {
                Some(i) => {
                    let q = done.swap_remove(i);
                    iv.lp = iv.lp.min(q.lp);
                    iv.rp = iv.rp.max(q.rp);
                }
                None => break,
            }
        }
        done.push(iv);
    }
    done.sort();
    Ok(remove_duplicates(&done))
}

/// Merges consecutive same-time intervals that touch or overlap.
pub fn remove_duplicates(intervals: &[PyramidInterval]) -> Vec<PyramidInterval> {
    let mut out: Vec<PyramidInterval> = Vec::with_capacity(intervals.len());
    for &iv in intervals {
        match out.last_mut() {
            Some(prev) if prev.t == iv.t && prev.rp + 1 >= iv.lp => {
                prev.rp = prev.rp.max(iv.rp);
            }
            _ => out.push(iv),
        }
    }
    out
}

/// Whether `(v, t0)` is activated by `primaries` on a long enough path.
pub fn will_vertex_be_activated(v: u32, t0: u32, primaries: &StimulusSet) -> bool {
    if primaries.contains(&stv(v, t0)) {
        return true;
    }
    let list: Vec<Stv> = primaries.iter().copied().collect();
    let pyramids = build_pyramids(&list).expect("sets iterate in order");
    activated_by(&pyramids, v as i64, t0 as i64)
}

/// Region membership against intervals sorted by time.
pub fn activated_by(pyramids: &[PyramidInterval], v: i64, t0: i64) -> bool {
    for p in pyramids {
        if p.t > t0 {
            break;
        }
        if p.lp + (t0 - p.t) <= v && v <= p.rp {
            return true;
        }
    }
    false
}

/// Cells lying in some base and in no region above that region's own base.
/// These are the primaries that generate the union of the regions.
pub fn base_only_primaries(pyramids: &[PyramidInterval]) -> StimulusSet {
    let mut out = StimulusSet::new();
    for p in pyramids {
        for x in p.lp..=p.rp {
            if x < 1 || p.t < 0 {
                continue;
            }
            let interior = pyramids.iter().any(|q| p.t > q.t && q.contains(x, p.t));
            if !interior {
                out.insert(stv(x as u32, p.t as u32));
            }
        }
    }
    out
}

pub fn union_of_regions(pyramids: &[PyramidInterval]) -> BTreeSet<Stv> {
    pyramids.iter().flat_map(|p| p.region()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorEntry {
    #[serde(flatten)]
    pub pyramid: PyramidInterval,
    pub parent: Option<usize>,
}

/// Pyramids of a chinampa in breadth-first order from the spike pyramid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub entries: Vec<FactorEntry>,
}

impl Factorization {
    pub fn pyramids(&self) -> Vec<PyramidInterval> {
        self.entries.iter().map(|e| e.pyramid).collect()
    }

    /// Number of pyramids of each length.
    pub fn signature(&self) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.pyramid.len()).or_insert(0) += 1;
        }
        m
    }

    pub fn primaries(&self) -> StimulusSet {
        base_only_primaries(&self.pyramids())
    }

    /// Closure of the re-stacked primaries on `path(width)`.
    pub fn restack(&self, width: u32) -> Result<ActivationDiagram> {
        let net = make_path(width)?;
        let prim = self.primaries();
        let top = self
            .entries
            .iter()
            .map(|e| e.pyramid.top())
            .max()
            .unwrap_or(0)
            .max(0) as u32;
        activation_closure(&net, &prim, top + width + 1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.entries).expect("factorization serializes")
    }
}

/// Breadth-first factorization: start at the pyramid whose pyramidion is the
/// spike; scanning a pyramid's cells from the top row down, left to right,
/// every not yet seen pyramid whose pyramidion is the scanned cell becomes a
/// child.
pub fn factorize(diagram: &ActivationDiagram) -> Result<Factorization> {
    let spike = diagram.find_spike()?;
    let list: Vec<Stv> = diagram.primaries().iter().copied().collect();
    let pyramids = build_pyramids(&list)?;
    let mut by_apex: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, p) in pyramids.iter().enumerate() {
        by_apex.entry(p.pyramidion()).or_default().push(i);
    }
    let root_key = (spike.vertex as i64, spike.time as i64);
    let root = match by_apex.get(&root_key).map(|v| v.as_slice()) {
        Some([only]) => *only,
        _ => {
            return Err(Error::Precondition(format!(
                "no single pyramid has the spike {spike} as pyramidion"
            )))
        }
    };
    let mut seen = vec![false; pyramids.len()];
    seen[root] = true;
    let mut entries = vec![FactorEntry {
        pyramid: pyramids[root],
        parent: None,
    }];
    let mut queue = VecDeque::from([(root, 0usize)]);
    while let Some((pi, at)) = queue.pop_front() {
        let p = pyramids[pi];
        for s in (p.t..=p.top()).rev() {
            let (l, r) = p.section(s).expect("inside");
            for x in l..=r {
                if (x, s) == p.pyramidion() {
                    continue;
                }
                let Some(kids) = by_apex.get(&(x, s)) else {
                    continue;
                };
                for &k in kids {
                    if !seen[k] {
                        seen[k] = true;
                        entries.push(FactorEntry {
                            pyramid: pyramids[k],
                            parent: Some(at),
                        });
                        queue.push_back((k, entries.len() - 1));
                    }
                }
            }
        }
    }
    if entries.len() != pyramids.len() {
        return Err(Error::Precondition(
            "some pyramid is not stacked into another one".into(),
        ));
    }
    Ok(Factorization { entries })
}

/// Stacks the pyramid of length `len` whose pyramidion is `attach`. The new
/// primaries are the base-only cells of the enlarged pyramid set.
pub fn stack(base: &ActivationDiagram, len: u32, attach: Stv) -> Result<ActivationDiagram> {
    let width = base.network().path_width().ok_or_else(|| {
        Error::UnsupportedTopology("stacking is defined on path networks only".into())
    })?;
    if len < 2 {
        return Err(Error::Domain(format!("pyramid length {len} is below 2")));
    }
    if !base.is_active(attach) {
        return Err(Error::InvalidAttachment(
            attach,
            "vertex is not activated".into(),
        ));
    }
    let list: Vec<Stv> = base.primaries().iter().copied().collect();
    let mut pyramids = build_pyramids(&list)?;
    let q = PyramidInterval::with_apex(attach.vertex as i64, attach.time as i64, len as i64);
    if q.t < 0 || q.lp < 1 {
        return Err(Error::InvalidAttachment(
            attach,
            "pyramid leaves the network".into(),
        ));
    }
    if pyramids.iter().any(|p| p.pyramidion() == q.pyramidion()) {
        return Err(Error::InvalidAttachment(
            attach,
            "vertex is a pyramidion".into(),
        ));
    }
    if pyramids.iter().any(|p| p.contains_pyramid(&q)) {
        return Err(Error::InvalidAttachment(
            attach,
            "pyramid is already contained".into(),
        ));
    }
    if pyramids.iter().any(|p| q.contains_pyramid(p)) {
        return Err(Error::InvalidAttachment(
            attach,
            "pyramid swallows an existing one".into(),
        ));
    }
    pyramids.push(q);
    pyramids.sort();
    let prim = base_only_primaries(&pyramids);
    let horizon = base
        .horizon()
        .max(prim.iter().map(|s| s.time).max().unwrap_or(0) + width + 1);
    let out = activation_closure(base.network(), &prim, horizon)?;
    if let Some(&r) = out.redundant_primaries().iter().next() {
        return Err(Error::Redundant(r));
    }
    let rebuilt = build_pyramids(&out.primaries().iter().copied().collect::<Vec<_>>())?;
    if out.activated() != union_of_regions(&pyramids) || rebuilt != pyramids {
        return Err(Error::InvalidAttachment(
            attach,
            "pyramid merges with a neighbour into a larger one".into(),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intersection {
    Pyramid(PyramidInterval),
    Point(i64, i64),
    Empty,
}

impl Intersection {
    pub fn profit(&self) -> i64 {
        match self {
            Intersection::Pyramid(p) => p.profit(),
            Intersection::Point(..) => -1,
            Intersection::Empty => 0,
        }
    }

    /// The intersection as an interval; a point is a pyramid of length 1.
    pub fn as_interval(&self) -> Option<PyramidInterval> {
        match *self {
            Intersection::Pyramid(p) => Some(p),
            Intersection::Point(x, s) => Some(PyramidInterval::new(s, x, x)),
            Intersection::Empty => None,
        }
    }
}

fn meet(a: &PyramidInterval, b: &PyramidInterval) -> Option<PyramidInterval> {
    let t = a.t.max(b.t);
    let rp = a.rp.min(b.rp);
    let lp = (a.lp - a.t).max(b.lp - b.t) + t;
    (lp <= rp).then_some(PyramidInterval { t, lp, rp })
}

pub fn intersect(p1: &PyramidInterval, p2: &PyramidInterval) -> Intersection {
    match meet(p1, p2) {
        None => Intersection::Empty,
        Some(p) if p.len() == 1 => Intersection::Point(p.lp, p.t),
        Some(p) => Intersection::Pyramid(p),
    }
}

/// Alternating sum of the profits of all nonempty intersections.
pub fn inclusion_exclusion_profit(pyramids: &[PyramidInterval]) -> i64 {
    fn walk(ps: &[PyramidInterval], from: usize, acc: PyramidInterval, size: usize) -> i64 {
        let sign = if size % 2 == 1 { 1 } else { -1 };
        let here = sign * acc.profit();
        let mut total = here;
        for i in from..ps.len() {
            if let Some(m) = meet(&acc, &ps[i]) {
                total += walk(ps, i + 1, m, size + 1);
            }
        }
        total
    }
    let mut total = 0;
    for i in 0..pyramids.len() {
        total += walk(pyramids, i + 1, pyramids[i], 1);
    }
    total
}

/// Profit of a factorization by inclusion-exclusion.
pub fn factorization_profit(f: &Factorization) -> i64 {
    inclusion_exclusion_profit(&f.pyramids())
}

/// A random chinampa on `path(width)`: a top pyramid with its pyramidion at
/// `(width, width-1)` and up to `attempts` random stackings below it.
pub fn random_chinampa<R: Rng>(rng: &mut R, width: u32, attempts: usize) -> ActivationDiagram {
    assert!(width >= 3);
    let net = make_path(width).expect("width ≥ 3");
    let top_len = rng.gen_range(3..=width);
    let top = PyramidInterval::with_apex(width as i64, width as i64 - 1, top_len as i64);
    let prim = base_only_primaries(&[top]);
    let mut diagram = activation_closure(&net, &prim, 2 * width + 1).expect("valid");
    for _ in 0..attempts {
        let cells: Vec<Stv> = diagram.activated().into_iter().collect();
        let a = cells[rng.gen_range(0..cells.len())];
        let max_len = a.vertex.min(a.time + 1).min(top_len);
        if max_len < 2 {
            continue;
        }
        let len = rng.gen_range(2..=max_len);
        if let Ok(next) = stack(&diagram, len, a) {
            if next.is_chinampa().unwrap_or(false) {
                diagram = next;
            }
        }
    }
    diagram
}
