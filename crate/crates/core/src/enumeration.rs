//! Exact counts of chinampas inside a pyramid canvas, the closed forms they
//! are compared with, and the exponential generating function expansion.
//!
//! The canvas `apyr(n)` has its base on vertices `1..=n` at time 0, so it is
//! the set of cells `(j, t)` with `t ≥ 0` and `j - t ≥ 1` on `path(n)`. A
//! chinampa counted in `apyr(n)` must activate the canvas apex `(n, n-1)`
//! and some cell at time 0, so it spans the whole canvas.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::cascade::{stv, Stv};
use crate::error::{Error, Result};
use crate::pyramid::{build_pyramids, PyramidInterval};

/// Required number of pyramids per length. Listed lengths are matched
/// exactly; pyramids of length 2 are free unless 2 is listed. A profile that
/// lists only length 2 describes pure chains, which are not required to have
/// nonnegative profit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StackProfile(pub BTreeMap<u32, u32>);

impl StackProfile {
    pub fn single(len: u32, count: u32) -> Self {
        StackProfile(BTreeMap::from([(len, count)]))
    }

    pub fn is_chain(&self) -> bool {
        !self.0.is_empty() && self.0.keys().all(|&l| l == 2)
    }

    fn allows(&self, len: u32, have: u32) -> bool {
        match self.0.get(&len) {
            Some(&c) => have < c,
            None => len == 2,
        }
    }

    fn matches(&self, sig: &BTreeMap<u32, u32>) -> bool {
        sig.iter()
            .all(|(&l, &c)| self.0.get(&l) == Some(&c) || (l == 2 && !self.0.contains_key(&2)))
            && self
                .0
                .iter()
                .all(|(l, &c)| sig.get(l).copied().unwrap_or(0) == c)
    }

    pub fn max_len(&self) -> u32 {
        self.0.keys().copied().max().unwrap_or(2)
    }
}

impl fmt::Display for StackProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .rev()
            .map(|(l, c)| format!("{l}:{c}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for StackProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut m = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (l, c) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("profile entry {part:?} is not L:C")))?;
            let l: u32 = l
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad length in {part:?}")))?;
            let c: u32 = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad count in {part:?}")))?;
            if l < 2 || c == 0 {
                return Err(Error::Parse(format!(
                    "profile entry {part:?} needs L ≥ 2 and C ≥ 1"
                )));
            }
            if m.insert(l, c).is_some() {
                return Err(Error::Parse(format!("length {l} listed twice")));
            }
        }
        if m.is_empty() {
            return Err(Error::Parse("empty profile".into()));
        }
        Ok(StackProfile(m))
    }
}

/// Activation rows of a path: bit `c` of row `t` is the cell `(c+1, t)`.
type Rows = Vec<u64>;

fn row_mask(lo: i64, hi: i64) -> u64 {
    if hi < lo {
        return 0;
    }
    let span = (hi - lo + 1) as u32;
    let ones = if span >= 64 {
        u64::MAX
    } else {
        (1u64 << span) - 1
    };
    ones << (lo - 1)
}

/// Closure of stimulus rows on `path(width)`; the flag reports redundancy.
fn closure_rows(stim: &[u64], width: u32, len: usize) -> (Rows, bool) {
    let full = if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    let mut act = vec![0u64; len];
    let mut redundant = false;
    for t in 0..len {
        let fired = if t > 0 {
            act[t - 1] & (act[t - 1] << 1) & full
        } else {
            0
        };
        let s = stim.get(t).copied().unwrap_or(0);
        redundant |= fired & s != 0;
        act[t] = fired | s;
    }
    (act, redundant)
}

fn popcount(rows: &[u64]) -> i64 {
    rows.iter().map(|r| r.count_ones() as i64).sum()
}

/// Whether every primary feeds a secondary at the next time step.
fn all_contribute(stim: &[u64], sec: &[u64]) -> bool {
    stim.iter().enumerate().all(|(t, &s)| {
        let next = sec.get(t + 1).copied().unwrap_or(0);
        s & !(next | (next >> 1)) == 0
    })
}

/// Connectivity of the cells in `rows` under the path's base-diagram edges.
fn rows_connected(rows: &[u64]) -> bool {
    let Some(t0) = rows.iter().position(|&r| r != 0) else {
        return true;
    };
    let mut comp = vec![0u64; rows.len()];
    comp[t0] = rows[t0] & rows[t0].wrapping_neg();
    loop {
        let mut changed = false;
        for t in 0..rows.len() {
            let mut reach = comp[t];
            if t > 0 {
                reach |= comp[t - 1] | (comp[t - 1] << 1);
            }
            if t + 1 < rows.len() {
                reach |= comp[t + 1] | (comp[t + 1] >> 1);
            }
            let grown = reach & rows[t];
            if grown != comp[t] {
                comp[t] = grown;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    comp == rows
}

struct Canvas {
    n: u32,
}

impl Canvas {
    fn rows_of(&self, pyramids: &[PyramidInterval]) -> Rows {
        let mut rows = vec![0u64; self.n as usize];
        for p in pyramids {
            for s in p.t..=p.top() {
                let (l, r) = p.section(s).expect("inside");
                rows[s as usize] |= row_mask(l, r);
            }
        }
        rows
    }

    fn base_only(&self, pyramids: &[PyramidInterval]) -> Rows {
        let mut rows = vec![0u64; self.n as usize];
        for p in pyramids {
            rows[p.t as usize] |= row_mask(p.lp, p.rp);
        }
        for q in pyramids {
            for s in q.t + 1..=q.top() {
                let (l, r) = q.section(s).expect("inside");
                rows[s as usize] &= !row_mask(l, r);
            }
        }
        rows
    }

    fn inside(&self, p: &PyramidInterval) -> bool {
        p.t >= 0 && p.lp - p.t >= 1 && p.rp <= self.n as i64
    }
}

fn rows_to_stvs(rows: &[u64]) -> Vec<Stv> {
    let mut out = Vec::new();
    for (t, &r) in rows.iter().enumerate() {
        let mut bits = r;
        while bits != 0 {
            let c = bits.trailing_zeros();
            out.push(stv(c + 1, t as u32));
            bits &= bits - 1;
        }
    }
    out
}

fn signature(pyramids: &[PyramidInterval]) -> BTreeMap<u32, u32> {
    let mut m = BTreeMap::new();
    for p in pyramids {
        *m.entry(p.len() as u32).or_insert(0) += 1;
    }
    m
}

/// Checks a pyramid set: its base-only cells must close to exactly the union
/// of the regions without redundancy, and rebuilding pyramids from those
/// cells must return the same set. Returns the primary and activated rows.
fn accept(canvas: &Canvas, pyramids: &[PyramidInterval]) -> Option<(Rows, Rows)> {
    let union = canvas.rows_of(pyramids);
    let stim = canvas.base_only(pyramids);
    let (act, redundant) = closure_rows(&stim, canvas.n, canvas.n as usize);
    if redundant || act != union {
        return None;
    }
    let rebuilt = build_pyramids(&rows_to_stvs(&stim)).ok()?;
    (rebuilt == pyramids).then_some((stim, act))
}

fn is_counted(
    profile: &StackProfile,
    pyramids: &[PyramidInterval],
    stim: &[u64],
    act: &[u64],
) -> bool {
    if stim[0] == 0 || !profile.matches(&signature(pyramids)) {
        return false;
    }
    let sec: Rows = act.iter().zip(stim).map(|(a, s)| a & !s).collect();
    if !profile.is_chain() && popcount(&sec) < popcount(stim) {
        return false;
    }
    all_contribute(stim, &sec) && rows_connected(&sec)
}

/// Worker threads to use: `CHINAMPA_THREADS` if set, else the machine's
/// parallelism.
pub fn worker_count() -> usize {
    std::env::var("CHINAMPA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Search from a single top pyramid of length `l0`, stacking pyramids below
/// activated cells one at a time.
fn count_branch(n: u32, profile: &StackProfile, l0: u32) -> u64 {
    let canvas = Canvas { n };
    let root = PyramidInterval::with_apex(n as i64, n as i64 - 1, l0 as i64);
    let start = vec![root];
    let Some((s0, a0)) = accept(&canvas, &start) else {
        return 0;
    };
    let mut seen: HashSet<Vec<PyramidInterval>> = HashSet::new();
    let mut stack = vec![(start.clone(), s0, a0)];
    seen.insert(start);
    let mut total = 0u64;
    while let Some((state, stim, act)) = stack.pop() {
        if is_counted(profile, &state, &stim, &act) {
            total += 1;
        }
        let sig = signature(&state);
        let apexes: HashSet<(i64, i64)> = state.iter().map(|p| p.pyramidion()).collect();
        for cell in rows_to_stvs(&act) {
            let (x, s) = (cell.vertex as i64, cell.time as i64);
            if apexes.contains(&(x, s)) {
                continue;
            }
            for len in 2..=n {
                if !profile.allows(len, sig.get(&len).copied().unwrap_or(0)) {
                    continue;
                }
                let q = PyramidInterval::with_apex(x, s, len as i64);
                if !canvas.inside(&q) {
                    break;
                }
                if state.iter().any(|p| p.contains_pyramid(&q)) {
                    continue;
                }
                let mut next = state.clone();
                next.push(q);
                next.sort();
                if seen.contains(&next) {
                    continue;
                }
                seen.insert(next.clone());
                if let Some((st, ac)) = accept(&canvas, &next) {
                    stack.push((next, st, ac));
                }
            }
        }
    }
    total
}

/// Number of chinampas in `apyr(n)` with the given pyramid profile, found by
/// stacking pyramids under a top pyramid and deduplicating pyramid sets.
pub fn count_chinampas(n: u32, profile: &StackProfile) -> Result<BigUint> {
    if !(1..=63).contains(&n) {
        return Err(Error::Domain(format!("canvas size {n} outside 1..=63")));
    }
    if profile.max_len() > n {
        return Ok(BigUint::zero());
    }
    let roots: Vec<u32> = (2..=n).filter(|&l| profile.allows(l, 0)).collect();
    let workers = worker_count().min(roots.len()).max(1);
    let mut partial = vec![0u64; roots.len()];
    std::thread::scope(|scope| {
        for (w, chunk) in partial
            .chunks_mut(roots.len().div_ceil(workers))
            .enumerate()
        {
            let base = w * roots.len().div_ceil(workers);
            let roots = &roots;
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = count_branch(n, profile, roots[base + k]);
                }
            });
        }
    });
    Ok(partial.iter().map(|&c| BigUint::from(c)).sum())
}

/// Chains of `n-1` pyramids of length 2 in `apyr(n)`.
pub fn count_pyr2_chains(n: u32) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::Domain(format!("chains need n ≥ 2, got {n}")));
    }
    count_chinampas(n, &StackProfile::single(2, n - 1))
}

/// Classification of one activated set found by the subset oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleRecord {
    /// Lengths of the maximal pyramids contained in the activated set.
    pub signature: BTreeMap<u32, u32>,
    pub profit: i64,
}

/// Every subset of `apyr(n)` as a primary set, kept when it is
/// non-redundant, every primary contributes, the secondaries are connected
/// and the closure reaches both the canvas apex and time 0. The pyramid
/// signature is read off the activated set directly.
pub fn oracle_census(n: u32) -> Result<Vec<OracleRecord>> {
    if !(2..=6).contains(&n) {
        return Err(Error::Domain(format!(
            "subset oracle supports 2 ≤ n ≤ 6, got {n}"
        )));
    }
    let cells: Vec<(u32, usize)> = (1..=n)
        .flat_map(|j| (0..j as usize).map(move |t| (j, t)))
        .collect();
    let len = n as usize;
    let apex_bit = 1u64 << (n - 1);
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << cells.len()) {
        let mut stim = vec![0u64; len];
        for (i, &(j, t)) in cells.iter().enumerate() {
            if mask >> i & 1 == 1 {
                stim[t] |= 1 << (j - 1);
            }
        }
        if stim[0] == 0 {
            continue;
        }
        let (act, redundant) = closure_rows(&stim, n, len);
        if redundant || act[len - 1] & apex_bit == 0 {
            continue;
        }
        let sec: Rows = act.iter().zip(&stim).map(|(a, s)| a & !s).collect();
        if !all_contribute(&stim, &sec) || !rows_connected(&sec) {
            continue;
        }
        out.push(OracleRecord {
            signature: maximal_pyramids(&act),
            profit: popcount(&sec) - popcount(&stim),
        });
    }
    Ok(out)
}

/// Multiset of lengths of the maximal pyramids inside an activated set.
fn maximal_pyramids(act: &[u64]) -> BTreeMap<u32, u32> {
    let has = |x: i64, t: i64| {
        t >= 0 && (t as usize) < act.len() && x >= 1 && act[t as usize] >> (x - 1) & 1 == 1
    };
    let mut found: Vec<(i64, i64, i64)> = Vec::new();
    for c in rows_to_stvs(act) {
        let (x, t) = (c.vertex as i64, c.time as i64);
        let mut l = 0;
        while (0..=l).all(|k| has(x - k, t - l)) {
            l += 1;
        }
        found.push((x, t, l));
    }
    let contained = |a: &(i64, i64, i64), b: &(i64, i64, i64)| {
        a != b && a.1 - a.2 >= b.1 - b.2 && a.0 <= b.0 && a.0 - a.1 >= b.0 - b.1
    };
    let mut sig = BTreeMap::new();
    for a in &found {
        if !found.iter().any(|b| contained(a, b)) {
            *sig.entry(a.2 as u32).or_insert(0) += 1;
        }
    }
    sig
}

/// Count from an oracle census, using the same profile semantics as
/// [`count_chinampas`].
pub fn oracle_count(census: &[OracleRecord], profile: &StackProfile) -> u64 {
    census
        .iter()
        .filter(|r| profile.matches(&r.signature) && (profile.is_chain() || r.profit >= 0))
        .count() as u64
}

/// `(2 + 3n) 2^(n-1)`, which is 1 at `n = 0`.
pub fn profit0_closed_form(n: u32) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    BigUint::from(2 + 3 * n as u64) << (n - 1)
}

/// `q_n = n! [x^n] p(x) e^(s x) / d` for `n < terms`, exactly.
pub fn egf_expand(poly: &[BigInt], s: i64, d: i64, terms: usize) -> Result<Vec<BigInt>> {
    if d == 0 {
        return Err(Error::Domain("divisor is zero".into()));
    }
    let s = BigInt::from(s);
    let d = BigInt::from(d);
    let mut out = Vec::with_capacity(terms);
    for n in 0..terms {
        let mut total = BigInt::zero();
        // n!/(n-k)! * s^(n-k) * p_k
        for (k, pk) in poly.iter().enumerate().take(n + 1) {
            let falling: BigInt = ((n - k + 1)..=n).map(BigInt::from).product();
            total += pk * falling * num_traits::pow(s.clone(), n - k);
        }
        if !(&total % &d).is_zero() {
            return Err(Error::Exactness(format!(
                "q_{n} = {total}/{d} is not an integer"
            )));
        }
        out.push(total / &d);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `count(n+3, {3:1})` against `(2+3n) 2^(n-1)`.
    Profit0,
    /// `count(n+4, {3:2})` against the EGF `(9x²+18x+4) e^(2x) / 2`.
    Profit1,
    /// `count(n, {2:n-1})` against `2^(n-2)`.
    Pyr2Chains,
    /// `count(length+k, {length:k+1})` against `2^k`, indexed by `k`.
    RepeatedPyramid { length: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRow {
    pub n: u32,
    pub canvas: u32,
    pub profile: StackProfile,
    pub brute_force: BigUint,
    pub closed_form: BigUint,
}

impl FamilyRow {
    pub fn matches(&self) -> bool {
        self.brute_force == self.closed_form
    }
}

pub fn verify_family(
    family: Family,
    range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<FamilyRow>> {
    let profit1 = if family == Family::Profit1 {
        let p = [4, 18, 9].map(BigInt::from);
        egf_expand(&p, 2, 2, *range.end() as usize + 1)?
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    for n in range {
        let (canvas, profile, closed) = match family {
            Family::Profit0 => (n + 3, StackProfile::single(3, 1), profit0_closed_form(n)),
            Family::Profit1 => (
                n + 4,
                StackProfile::single(3, 2),
                profit1[n as usize].to_biguint().expect("nonnegative"),
            ),
            Family::Pyr2Chains => {
                if n < 2 {
                    return Err(Error::Domain(format!("chains need n ≥ 2, got {n}")));
                }
                (n, StackProfile::single(2, n - 1), BigUint::one() << (n - 2))
            }
            Family::RepeatedPyramid { length } => (
                length + n,
                StackProfile::single(length, n + 1),
                BigUint::one() << n,
            ),
        };
        rows.push(FamilyRow {
            n,
            canvas,
            brute_force: count_chinampas(canvas, &profile)?,
            closed_form: closed,
            profile,
        });
    }
    Ok(rows)
}

/// The closed form for a canvas and profile when it belongs to one of the
/// families above.
pub fn closed_form(n: u32, profile: &StackProfile) -> Option<BigUint> {
    let only = (profile.0.len() == 1)
        .then(|| profile.0.iter().next().map(|(&l, &c)| (l, c)))
        .flatten()?;
    match only {
        (3, 1) if n >= 3 => Some(profit0_closed_form(n - 3)),
        (3, 2) if n >= 4 => {
            let q = egf_expand(&[4, 18, 9].map(BigInt::from), 2, 2, n as usize - 3).ok()?;
            q.last()?.to_biguint()
        }
        (2, c) if n >= 2 && c == n - 1 => Some(BigUint::one() << (n - 2)),
        (l, c) if c >= 1 && n == l + c - 1 => Some(BigUint::one() << (c - 1)),
        _ => None,
    }
}

/// Smallest `n` such that `apyr(n)`, placed with its apex on the spike,
/// holds every activated cell.
pub fn enclosing_canvas(d: &crate::cascade::ActivationDiagram) -> Result<u32> {
    let spike = d.find_spike()?;
    let cells = d.activated();
    let diag = spike.vertex as i64 - spike.time as i64;
    if let Some(c) = cells
        .iter()
        .find(|c| (c.vertex as i64 - c.time as i64) < diag)
    {
        return Err(Error::Precondition(format!(
            "{c} lies left of the canvas through {spike}"
        )));
    }
    let low = cells.iter().map(|c| c.time).min().expect("a spike exists");
    Ok(spike.time - low + 1)
}

/// `u64` view for tests and tables.
pub fn as_u64(x: &BigUint) -> u64 {
    x.to_u64().expect("count fits in u64")
}
