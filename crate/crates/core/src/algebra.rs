//! Stimulus configurations on paths and their operations: overlay, disjoint
//! union, relabeling by permutations, the operad action, and the
//! normalization `e = incl ∘ proy`.

use std::collections::{BTreeMap, BTreeSet};

use crate::cascade::{activation_closure, stv, StimulusSet, Stv};
use crate::error::{Error, Result};
use crate::graph::make_path;

/// Primaries on `path(n)`. Width 0 is allowed as the unit of `⊔`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StimulusConfig {
    pub n: u32,
    pub stimuli: StimulusSet,
}

impl StimulusConfig {
    pub fn new(n: u32, stimuli: StimulusSet) -> Result<Self> {
        if let Some(s) = stimuli.iter().find(|s| s.vertex == 0 || s.vertex > n) {
            return Err(Error::Domain(format!("{s} lies outside 1..={n}")));
        }
        Ok(StimulusConfig { n, stimuli })
    }

    /// The unit `e_n`.
    pub fn empty(n: u32) -> Self {
        StimulusConfig {
            n,
            stimuli: StimulusSet::new(),
        }
    }
}

/// Set union of two configurations of the same width.
pub fn overlay(a: &StimulusConfig, b: &StimulusConfig) -> Result<StimulusConfig> {
    if a.n != b.n {
        return Err(Error::Domain(format!("widths differ: {} and {}", a.n, b.n)));
    }
    Ok(StimulusConfig {
        n: a.n,
        stimuli: a.stimuli.union(&b.stimuli).copied().collect(),
    })
}

/// `a` beside `b`: the vertices of `b` are shifted by `a.n`.
pub fn disjoint_union(a: &StimulusConfig, b: &StimulusConfig) -> StimulusConfig {
    let mut stimuli = a.stimuli.clone();
    stimuli.extend(b.stimuli.iter().map(|s| stv(s.vertex + a.n, s.time)));
    StimulusConfig {
        n: a.n + b.n,
        stimuli,
    }
}

/// `sigma[i-1]` is the image of vertex `i`.
pub fn check_permutation(sigma: &[u32], n: u32) -> Result<()> {
    if sigma.len() != n as usize {
        return Err(Error::Domain(format!(
            "permutation has {} entries, width is {n}",
            sigma.len()
        )));
    }
    let seen: BTreeSet<u32> = sigma.iter().copied().collect();
    if seen.len() != sigma.len() || seen.iter().any(|&v| v == 0 || v > n) {
        return Err(Error::Domain(format!(
            "{sigma:?} is not a bijection of 1..={n}"
        )));
    }
    Ok(())
}

pub fn permute(sigma: &[u32], a: &StimulusConfig) -> Result<StimulusConfig> {
    check_permutation(sigma, a.n)?;
    Ok(StimulusConfig {
        n: a.n,
        stimuli: a
            .stimuli
            .iter()
            .map(|s| stv(sigma[s.vertex as usize - 1], s.time))
            .collect(),
    })
}

pub fn identity_permutation(n: u32) -> Vec<u32> {
    (1..=n).collect()
}

/// `σ + τ`: `σ` on the first `σ.len()` vertices, `τ` shifted on the rest.
pub fn permutation_sum(sigma: &[u32], tau: &[u32]) -> Vec<u32> {
    let n = sigma.len() as u32;
    sigma
        .iter()
        .copied()
        .chain(tau.iter().map(|&t| t + n))
        .collect()
}

/// The braiding `B_{m,n}` sending `h ⊔ g` to `g ⊔ h` for `h` of width `m`
/// and `g` of width `n`.
pub fn braid(m: u32, n: u32) -> Vec<u32> {
    (1..=m).map(|i| i + n).chain(1..=n).collect()
}

/// `σ(h_1 ⊔ … ⊔ h_k) ∪ g`.
pub fn operad_act(
    sigma: &[u32],
    g: &StimulusConfig,
    parts: &[StimulusConfig],
) -> Result<StimulusConfig> {
    let joined = parts
        .iter()
        .fold(StimulusConfig::empty(0), |acc, h| disjoint_union(&acc, h));
    if joined.n != g.n {
        return Err(Error::Domain(format!(
            "parts have total width {}, g has width {}",
            joined.n, g.n
        )));
    }
    overlay(&permute(sigma, &joined)?, g)
}

/// One connected piece of an activation graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    pub primaries: BTreeSet<Stv>,
    pub secondaries: BTreeSet<Stv>,
}

impl Component {
    pub fn cells(&self) -> BTreeSet<Stv> {
        self.primaries.union(&self.secondaries).copied().collect()
    }
}

/// Activation graphs on `path(n)`, ordered by their earliest cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationGraphSet {
    pub n: u32,
    pub components: Vec<Component>,
}

impl ActivationGraphSet {
    pub fn to_json(&self) -> serde_json::Value {
        let comps: Vec<serde_json::Value> = self
            .components
            .iter()
            .map(|c| {
                serde_json::json!({
                    "primary": c.primaries.iter().collect::<Vec<_>>(),
                    "secondary": c.secondaries.iter().collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({"width": self.n, "components": comps})
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Closure on `path(n)` split into components. Redundant primaries become
/// secondaries. Two cells are joined when one fired the other, that is by
/// the edges ending at secondaries.
pub fn proy(a: &StimulusConfig) -> ActivationGraphSet {
    if a.n == 0 || a.stimuli.is_empty() {
        return ActivationGraphSet {
            n: a.n,
            components: Vec::new(),
        };
    }
    let net = make_path(a.n).expect("positive width");
    let top = a.stimuli.iter().map(|s| s.time).max().unwrap_or(0);
    let d =
        activation_closure(&net, &a.stimuli, top + a.n + 1).expect("configuration fits its width");
    let primaries: BTreeSet<Stv> = a
        .stimuli
        .difference(d.redundant_primaries())
        .copied()
        .collect();
    let mut secondaries = d.secondaries().clone();
    secondaries.extend(d.redundant_primaries().iter().copied());

    let cells: Vec<Stv> = primaries.union(&secondaries).copied().collect();
    let index: BTreeMap<Stv, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    for s in &secondaries {
        if s.time == 0 {
            continue;
        }
        for pred in [
            stv(s.vertex, s.time - 1),
            stv(s.vertex.wrapping_sub(1), s.time - 1),
        ] {
            if let Some(&j) = index.get(&pred) {
                let (x, y) = (find(&mut parent, index[s]), find(&mut parent, j));
                parent[x] = y;
            }
        }
    }
    let mut groups: BTreeMap<usize, Component> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        let root = find(&mut parent, i);
        let comp = groups.entry(root).or_insert_with(|| Component {
            primaries: BTreeSet::new(),
            secondaries: BTreeSet::new(),
        });
        if primaries.contains(c) {
            comp.primaries.insert(*c);
        } else {
            comp.secondaries.insert(*c);
        }
    }
    let mut components: Vec<Component> = groups.into_values().collect();
    components.sort_by_key(|c| *c.cells().iter().next().expect("nonempty"));
    ActivationGraphSet { n: a.n, components }
}

/// The primaries of every component.
pub fn incl(graphs: &ActivationGraphSet) -> StimulusConfig {
    StimulusConfig {
        n: graphs.n,
        stimuli: graphs
            .components
            .iter()
            .flat_map(|c| c.primaries.iter().copied())
            .collect(),
    }
}

/// `incl ∘ proy`: drops the redundant primaries.
pub fn normalize_e(a: &StimulusConfig) -> StimulusConfig {
    incl(&proy(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, xs: &[(u32, u32)]) -> StimulusConfig {
        StimulusConfig::new(n, xs.iter().map(|&(v, t)| stv(v, t)).collect()).unwrap()
    }

    #[test]
    fn overlay_examples() {
        let d = cfg(4, &[(1, 0), (2, 0), (3, 0), (2, 2)]);
        let f = cfg(4, &[(4, 2), (4, 3)]);
        assert_eq!(
            overlay(&d, &f).unwrap(),
            cfg(4, &[(1, 0), (2, 0), (3, 0), (2, 2), (4, 2), (4, 3)])
        );
        assert_eq!(overlay(&d, &StimulusConfig::empty(4)).unwrap(), d);
        assert_eq!(overlay(&d, &d).unwrap(), d);
        assert!(overlay(&d, &StimulusConfig::empty(3)).is_err());
    }

    #[test]
    fn disjoint_union_examples() {
        let d = cfg(3, &[(1, 0), (2, 0), (3, 0), (2, 2)]);
        let f = cfg(2, &[(1, 0), (2, 0)]);
        assert_eq!(
            disjoint_union(&d, &f),
            cfg(5, &[(1, 0), (2, 0), (3, 0), (2, 2), (4, 0), (5, 0)])
        );
        assert_eq!(
            disjoint_union(&StimulusConfig::empty(2), &StimulusConfig::empty(3)),
            StimulusConfig::empty(5)
        );
    }

    #[test]
    fn permutation_examples() {
        let a = cfg(4, &[(1, 0), (2, 0), (3, 0), (4, 2)]);
        assert_eq!(
            permute(&[1, 4, 2, 3], &a).unwrap(),
            cfg(4, &[(1, 0), (4, 0), (2, 0), (3, 2)])
        );
        assert_eq!(permute(&identity_permutation(4), &a).unwrap(), a);
        assert_eq!(
            permute(&[2, 1, 4, 3], &StimulusConfig::empty(4)).unwrap(),
            StimulusConfig::empty(4)
        );
        assert!(permute(&[1, 1, 2, 3], &a).is_err());
        assert!(permute(&[1, 2], &a).is_err());
    }

    #[test]
    fn operad_examples() {
        let h = cfg(3, &[(1, 0), (2, 0), (3, 0)]);
        assert_eq!(
            operad_act(
                &identity_permutation(3),
                &StimulusConfig::empty(3),
                std::slice::from_ref(&h)
            )
            .unwrap(),
            h
        );
        // a pyr3 base and a pyr2 base side by side, bridged at (4,1)
        let p2 = cfg(2, &[(1, 0), (2, 0)]);
        let g = cfg(5, &[(4, 1)]);
        let joined = operad_act(&identity_permutation(5), &g, &[h, p2]).unwrap();
        let graphs = proy(&joined);
        assert_eq!(graphs.components.len(), 1);
        assert!(operad_act(
            &identity_permutation(4),
            &StimulusConfig::empty(4),
            &[StimulusConfig::empty(3)]
        )
        .is_err());
    }

    #[test]
    fn equivariance_spot_check() {
        let g = cfg(3, &[(1, 0), (3, 1)]);
        let h = cfg(2, &[(2, 0), (1, 4)]);
        let sigma = [3, 1, 2];
        let tau = [2, 1];
        assert_eq!(
            permute(&permutation_sum(&sigma, &tau), &disjoint_union(&g, &h)).unwrap(),
            disjoint_union(&permute(&sigma, &g).unwrap(), &permute(&tau, &h).unwrap())
        );
        assert_eq!(
            permute(&braid(3, 2), &disjoint_union(&g, &h)).unwrap(),
            disjoint_union(&h, &g)
        );
    }

    #[test]
    fn projections() {
        let base = cfg(3, &[(1, 0), (2, 0), (3, 0)]);
        let g = proy(&base);
        assert_eq!(g.components.len(), 1);
        assert_eq!(g.components[0].secondaries.len(), 3);
        assert_eq!(incl(&g), base);

        let split = cfg(3, &[(1, 0), (2, 0), (3, 0), (2, 3), (3, 3)]);
        let g = proy(&split);
        assert_eq!(g.components.len(), 2);
        assert_eq!(g.components[1].primaries, cfg(3, &[(2, 3), (3, 3)]).stimuli);

        let redundant = cfg(
            5,
            &[
                (1, 0),
                (2, 0),
                (3, 0),
                (4, 0),
                (1, 1),
                (1, 2),
                (5, 1),
                (4, 2),
            ],
        );
        let g = proy(&redundant);
        assert!(g
            .components
            .iter()
            .any(|c| c.secondaries.contains(&stv(4, 2))));
        let e = normalize_e(&redundant);
        assert!(!e.stimuli.contains(&stv(4, 2)));
        assert_eq!(e.stimuli.len(), 7);

        assert_eq!(
            incl(&proy(&StimulusConfig::empty(4))),
            StimulusConfig::empty(4)
        );
        assert_eq!(normalize_e(&base), base);
    }

    #[test]
    fn retraction() {
        for a in [
            cfg(
                5,
                &[
                    (1, 0),
                    (2, 0),
                    (3, 0),
                    (4, 0),
                    (1, 1),
                    (1, 2),
                    (5, 1),
                    (4, 2),
                ],
            ),
            cfg(3, &[(1, 0), (2, 0), (3, 0), (2, 3), (3, 3)]),
            cfg(2, &[(1, 0), (2, 0), (2, 1)]),
        ] {
            let g = proy(&a);
            assert_eq!(proy(&incl(&g)), g);
            assert_eq!(normalize_e(&normalize_e(&a)), normalize_e(&a));
        }
    }

    #[test]
    fn not_a_homomorphism() {
        let a = cfg(2, &[(1, 0), (2, 0)]);
        let b = cfg(2, &[(2, 1)]);
        let lhs = overlay(&normalize_e(&a), &normalize_e(&b)).unwrap();
        let rhs = normalize_e(&overlay(&a, &b).unwrap());
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn bounds() {
        assert!(StimulusConfig::new(2, [stv(3, 0)].into()).is_err());
        assert!(StimulusConfig::new(2, [stv(0, 0)].into()).is_err());
    }
}
