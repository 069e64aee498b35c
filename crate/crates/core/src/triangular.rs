//! KR-triangular sequences, their bijection with roots of pyramids of length
//! 2 hanging below `apyr(3K)`, and the rational generating functions of
//! their counts.
//!
//! Entries are `s[j][i]` for `1 ≤ i ≤ j ≤ R` (`j` is the depth, `i` the
//! column). Columns are weakly decreasing downwards, `i ≤ s[R][i] ≤ … ≤
//! s[i][i] ≤ K+i`, and diagonals are strict, `s[j][i] > s[j-1][i-1]`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::cascade::{activation_closure, ActivationDiagram};
use crate::enumeration::worker_count;
use crate::error::{Error, Result};
use crate::graph::make_path;
use crate::pyramid::{base_only_primaries, PyramidInterval};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriangularSeq {
    pub r: u32,
    pub k: u32,
    entries: BTreeMap<(u32, u32), i64>,
}

impl TriangularSeq {
    /// Entries keyed by `(j, i)`.
    pub fn from_entries(r: u32, k: u32, entries: BTreeMap<(u32, u32), i64>) -> Self {
        TriangularSeq { r, k, entries }
    }

    /// Builds `s[j][i] = f(j, i)` for all positions.
    pub fn from_fn(r: u32, k: u32, f: impl Fn(u32, u32) -> i64) -> Self {
        let mut entries = BTreeMap::new();
        for j in 1..=r {
            for i in 1..=j {
                entries.insert((j, i), f(j, i));
            }
        }
        TriangularSeq { r, k, entries }
    }

    pub fn get(&self, j: u32, i: u32) -> Option<i64> {
        self.entries.get(&(j, i)).copied()
    }

    fn at(&self, j: u32, i: u32) -> Result<i64> {
        self.get(j, i)
            .ok_or_else(|| Error::Shape(format!("missing entry s[{j}][{i}]")))
    }

    pub fn entries(&self) -> &BTreeMap<(u32, u32), i64> {
        &self.entries
    }
}

/// Row `j` lists `s[j][j] … s[j][1]`, right aligned.
impl fmt::Display for TriangularSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .entries
            .values()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1);
        for j in 1..=self.r {
            let pad = (self.r - j) as usize * (w + 1);
            let cells: Vec<String> = (1..=j)
                .rev()
                .map(|i| match self.get(j, i) {
                    Some(v) => format!("{v:>w$}"),
                    None => format!("{:>w$}", "?"),
                })
                .collect();
            writeln!(f, "{}{}", " ".repeat(pad), cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn is_valid_triseq(seq: &TriangularSeq) -> Result<bool> {
    let (r, k) = (seq.r, seq.k as i64);
    for j in 1..=r {
        for i in 1..=j {
            let v = seq.at(j, i)?;
            if j == i && v > k + i as i64 {
                return Ok(false);
            }
            if j == r && v < i as i64 {
                return Ok(false);
            }
            if j > i && v > seq.at(j - 1, i)? {
                return Ok(false);
            }
            if i >= 2 && v <= seq.at(j - 1, i - 1)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

type Entries = BTreeMap<(u32, u32), i64>;

/// Filling order: column by column, top to bottom.
fn cells(r: u32) -> Vec<(u32, u32)> {
    (1..=r).flat_map(|i| (i..=r).map(move |j| (j, i))).collect()
}

fn fill(
    k: i64,
    order: &[(u32, u32)],
    idx: usize,
    vals: &mut Entries,
    visit: &mut dyn FnMut(&Entries),
) {
    let Some(&(j, i)) = order.get(idx) else {
        visit(vals);
        return;
    };
    let hi = if j == i {
        k + i as i64
    } else {
        vals[&(j - 1, i)]
    };
    let mut lo = i as i64;
    if i >= 2 {
        lo = lo.max(vals[&(j - 1, i - 1)] + 1);
    }
    for v in lo..=hi {
        vals.insert((j, i), v);
        fill(k, order, idx + 1, vals, visit);
    }
    vals.remove(&(j, i));
}

/// Number of KR-triangular sequences, split across threads by `s[1][1]`.
pub fn enumerate_triseq(k: u32, r: u32) -> Result<BigUint> {
    if r == 0 {
        return Err(Error::Domain("R must be at least 1".into()));
    }
    let order = cells(r);
    let firsts: Vec<i64> = (1..=k as i64 + 1).collect();
    let workers = worker_count().min(firsts.len()).max(1);
    let per = firsts.len().div_ceil(workers);
    let mut partial = vec![0u64; firsts.len()];
    std::thread::scope(|scope| {
        for (w, chunk) in partial.chunks_mut(per).enumerate() {
            let order = &order;
            let firsts = &firsts;
            scope.spawn(move || {
                for (o, slot) in chunk.iter_mut().enumerate() {
                    let mut vals = BTreeMap::from([((1, 1), firsts[w * per + o])]);
                    let mut n = 0u64;
                    fill(k as i64, order, 1, &mut vals, &mut |_| n += 1);
                    *slot = n;
                }
            });
        }
    });
    Ok(partial.into_iter().map(BigUint::from).sum())
}

pub fn list_triseq(k: u32, r: u32) -> Vec<TriangularSeq> {
    let mut out = Vec::new();
    if r == 0 {
        return out;
    }
    let order = cells(r);
    fill(k as i64, &order, 0, &mut BTreeMap::new(), &mut |v| {
        out.push(TriangularSeq::from_entries(r, k, v.clone()))
    });
    out
}

/// Roots below `apyr(3K)`. The top pyramid has its base at time `R` on
/// vertices `R+1 ..= R+3K`; row `j` (depth `j`, time `R-j`) spans the
/// vertices `R+1-j ..= R+3K` and holds `K` pyramids of length 2, given by
/// the left vertex of their base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootConfig {
    pub r: u32,
    pub k: u32,
    pub roots: Vec<Vec<i64>>,
}

impl RootConfig {
    /// White-mark columns per row, counted from the right.
    pub fn marks(&self) -> Result<Vec<Vec<u32>>> {
        let seq = roots_to_triseq(self)?;
        Ok((1..=self.r)
            .map(|j| {
                (1..=j)
                    .map(|i| seq.get(j, i).expect("complete") as u32)
                    .collect()
            })
            .collect())
    }

    /// The top pyramid (when `K > 0`) followed by the roots.
    pub fn pyramids(&self) -> Vec<PyramidInterval> {
        let (r, k) = (self.r as i64, self.k as i64);
        let mut out = Vec::new();
        if k > 0 {
            out.push(PyramidInterval::new(r, r + 1, r + 3 * k));
        }
        for (d, row) in self.roots.iter().enumerate() {
            let t = r - (d as i64 + 1);
            out.extend(row.iter().map(|&a| PyramidInterval::new(t, a, a + 1)));
        }
        out.sort();
        out
    }

    /// Closure on `path(3K+R)` of the cells generating the top pyramid and
    /// its roots.
    pub fn diagram(&self) -> Result<ActivationDiagram> {
        let width = 3 * self.k + self.r;
        let net = make_path(width.max(1))?;
        let prim = base_only_primaries(&self.pyramids());
        activation_closure(&net, &prim, 2 * width + self.r + 1)
    }
}

/// Row `j` is a word of `j` whites and `K` blocks, read left to right from
/// column `K+j` down to column 1. A white covers one vertex; a block covers
/// three, a white then the base of a root.
pub fn triseq_to_roots(seq: &TriangularSeq) -> Result<RootConfig> {
    if !is_valid_triseq(seq)? {
        return Err(Error::BijectionDomain(
            "not a valid triangular sequence".into(),
        ));
    }
    let (r, k) = (seq.r, seq.k);
    let mut roots = Vec::with_capacity(r as usize);
    for j in 1..=r {
        let whites: Vec<i64> = (1..=j).map(|i| seq.get(j, i).expect("complete")).collect();
        let mut cursor = r as i64 + 1 - j as i64;
        let mut row = Vec::with_capacity(k as usize);
        for c in (1..=(k + j) as i64).rev() {
            if whites.contains(&c) {
                cursor += 1;
            } else {
                row.push(cursor + 1);
                cursor += 3;
            }
        }
        roots.push(row);
    }
    Ok(RootConfig { r, k, roots })
}

pub fn roots_to_triseq(config: &RootConfig) -> Result<TriangularSeq> {
    let (r, k) = (config.r, config.k);
    if config.roots.len() != r as usize {
        return Err(Error::BijectionDomain(format!(
            "expected {r} rows of roots"
        )));
    }
    let end = r as i64 + 3 * k as i64 + 1;
    let mut entries = BTreeMap::new();
    for (d, row) in config.roots.iter().enumerate() {
        let j = d as u32 + 1;
        if row.len() != k as usize {
            return Err(Error::BijectionDomain(format!("row {j} needs {k} roots")));
        }
        let mut cursor = r as i64 + 1 - j as i64;
        let mut col = (k + j) as i64;
        let mut whites = Vec::new();
        let mut pending = row.iter().copied().peekable();
        while cursor < end {
            if pending.peek() == Some(&(cursor + 1)) {
                pending.next();
                cursor += 3;
            } else {
                whites.push(col);
                cursor += 1;
            }
            col -= 1;
        }
        if cursor != end || pending.next().is_some() || whites.len() != j as usize {
            return Err(Error::BijectionDomain(format!(
                "row {j} does not tile the canvas"
            )));
        }
        for (n, c) in whites.iter().rev().enumerate() {
            entries.insert((j, n as u32 + 1), *c);
        }
    }
    let seq = TriangularSeq::from_entries(r, k, entries);
    if !is_valid_triseq(&seq)? {
        return Err(Error::BijectionDomain(
            "roots are not a valid configuration".into(),
        ));
    }
    Ok(seq)
}

struct SeriesData {
    shift: usize,
    numerator: &'static [i64],
    exponent: usize,
}

fn series_data(r: u32) -> Option<SeriesData> {
    let (shift, numerator, exponent): (usize, &'static [i64], usize) = match r {
        3 => (5, &[1, 1], 7),
        4 => (7, &[1, 5, 5, 1], 11),
        5 => (9, &[1, 16, 70, 112, 70, 16, 1], 16),
        6 => (
            11,
            &[1, 42, 539, 2948, 7854, 10824, 7854, 2948, 539, 42, 1],
            22,
        ),
        7 => (
            13,
            &[
                1, 99, 3129, 44739, 336819, 1450761, 3753841, 5999851, 5999851, 3753841, 1450761,
                336819, 44739, 3129, 99, 1,
            ],
            29,
        ),
        _ => return None,
    };
    Some(SeriesData {
        shift,
        numerator,
        exponent,
    })
}

/// Coefficients of `x^0 ..= x^N` of `x^a num(x) / (1-x)^b`.
pub fn expand_rational_series(r: u32, n: usize) -> Result<Vec<BigInt>> {
    let d = series_data(r).ok_or_else(|| {
        Error::Domain(format!(
            "no stored series for R = {r}; supported R are 3..=7"
        ))
    })?;
    let mut c = vec![BigInt::zero(); n + 1];
    for (e, &v) in d.numerator.iter().enumerate() {
        if d.shift + e <= n {
            c[d.shift + e] = BigInt::from(v);
        }
    }
    // dividing by (1-x) is a prefix sum
    for _ in 0..d.exponent {
        for idx in 1..=n {
            let prev = c[idx - 1].clone();
            c[idx] += prev;
        }
    }
    Ok(c)
}

/// Lowest degree with a nonzero coefficient, `2R - 1`.
pub fn series_shift(r: u32) -> Option<usize> {
    series_data(r).map(|d| d.shift)
}

/// `T[j][i] = s[j][i] + (R-1) - (j-i)`. Columns become strictly decreasing
/// downwards, diagonals stay strict, and values range over `1 ..= K+2R-1`.
pub fn strictify(seq: &TriangularSeq) -> TriangularSeq {
    let r = seq.r as i64;
    let entries = seq
        .entries()
        .iter()
        .map(|(&(j, i), &v)| ((j, i), v + (r - 1) - (j as i64 - i as i64)))
        .collect();
    TriangularSeq::from_entries(seq.r, seq.k, entries)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisibilityRow {
    pub n: u32,
    pub q: BigInt,
    pub p: BigInt,
    pub remainder: BigInt,
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `q_n` from the stored series against `p_n = C(n, 2R-1)`, for
/// `2R-1 ≤ n ≤ n_max`.
pub fn divisibility_report(r: u32, n_max: u32) -> Result<Vec<DivisibilityRow>> {
    let q = expand_rational_series(r, n_max as usize)?;
    let lo = 2 * r - 1;
    Ok((lo..=n_max)
        .map(|n| {
            let p = binomial(n as u64, lo as u64);
            let qn = q[n as usize].clone();
            DivisibilityRow {
                n,
                remainder: &qn % &p,
                q: qn,
                p,
            }
        })
        .collect())
}
