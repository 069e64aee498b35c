use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chinampa::algebra::*;
use chinampa::cascade::{rule192_evolve, StimulusSet};
use chinampa::persistence::*;
use chinampa::pyramid::*;
use chinampa::render::{parse_ascii, render_ascii};
use chinampa::{activation_closure, make_cycle, make_path, stv, ActivationDiagram, Network, Stv};

fn stimuli(width: u32, max: usize, tmax: u32) -> impl Strategy<Value = StimulusSet> {
    prop::collection::btree_set((1..=width, 0..=tmax).prop_map(|(v, t)| stv(v, t)), 0..=max)
}

fn instance() -> impl Strategy<Value = (u32, StimulusSet)> {
    (1u32..=12).prop_flat_map(|w| (Just(w), stimuli(w, 10, 12)))
}

fn chinampa() -> impl Strategy<Value = (u32, ActivationDiagram)> {
    (3u32..=10, any::<u64>()).prop_map(|(w, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (w, random_chinampa(&mut rng, w, 12))
    })
}

fn config(n: u32) -> impl Strategy<Value = StimulusConfig> {
    stimuli(n, 2 * n as usize, 5).prop_map(move |s| StimulusConfig::new(n, s).unwrap())
}

fn perm(n: u32) -> impl Strategy<Value = Vec<u32>> {
    Just((1..=n).collect::<Vec<u32>>()).prop_shuffle()
}

fn closure(width: u32, s: &StimulusSet) -> ActivationDiagram {
    let net = make_path(width).unwrap();
    activation_closure(&net, s, 12 + width + 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn monotone((w, s) in instance(), extra in stimuli(12, 3, 12)) {
        let extra: StimulusSet = extra.into_iter().filter(|x| x.vertex <= w).collect();
        let more: StimulusSet = s.union(&extra).copied().collect();
        let small = closure(w, &s).activated();
        let big = closure(w, &more).activated();
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn matches_rule192((w, s) in instance()) {
        let horizon = 20usize;
        let mut rows = vec![vec![false; w as usize]; horizon + 1];
        for x in &s {
            rows[x.time as usize][x.vertex as usize - 1] = true;
        }
        let grid = rule192_evolve(&rows, w as usize, horizon);
        let from_ca: BTreeSet<Stv> = grid
            .iter()
            .enumerate()
            .flat_map(|(t, r)| {
                r.iter().enumerate().filter(|(_, &b)| b).map(move |(c, _)| stv(c as u32 + 1, t as u32))
            })
            .collect();
        let net = make_path(w).unwrap();
        prop_assert_eq!(activation_closure(&net, &s, horizon as u32).unwrap().activated(), from_ca);
    }

    #[test]
    fn query_agrees_with_closure((w, s) in instance(), v in 1u32..=12, t in 0u32..=25) {
        let v = v.min(w);
        prop_assert_eq!(will_vertex_be_activated(v, t, &s), closure(w, &s).is_active(stv(v, t)));
    }

    #[test]
    fn pyramid_regions_cover_closure((w, s) in instance()) {
        let d = closure(w, &s);
        prop_assume!(!d.is_redundant());
        let list: Vec<Stv> = s.iter().copied().collect();
        let regions: BTreeSet<Stv> = union_of_regions(&build_pyramids(&list).unwrap())
            .into_iter()
            .filter(|x| x.vertex <= w)
            .collect();
        prop_assert_eq!(regions, d.activated());
    }

    #[test]
    fn render_round_trip((w, s) in instance()) {
        let d = closure(w, &s);
        let (p, sec) = parse_ascii(&render_ascii(&d)).unwrap();
        prop_assert_eq!(&p, d.primaries());
        prop_assert_eq!(&sec, d.secondaries());
    }

    #[test]
    fn spike_is_unique_and_rightmost((_, d) in chinampa()) {
        let spike = d.find_spike().unwrap();
        let cells = d.activated();
        prop_assert_eq!(cells.iter().filter(|c| c.time >= spike.time).count(), 1);
        prop_assert!(cells.iter().all(|c| c.vertex <= spike.vertex));
    }

    #[test]
    fn one_top_pyramid((_, d) in chinampa()) {
        let list: Vec<Stv> = d.primaries().iter().copied().collect();
        let big: Vec<PyramidInterval> = build_pyramids(&list).unwrap().into_iter().filter(|p| p.len() >= 3).collect();
        let top = big.iter().map(|p| p.top()).max().unwrap();
        prop_assert_eq!(big.iter().filter(|p| p.top() == top).count(), 1);
    }

    #[test]
    fn lengths_bounded_by_profit((_, d) in chinampa()) {
        prop_assume!(d.profit() >= 0);
        let bound = max_pyramid_length(d.profit() as u64) as i64;
        let f = factorize(&d).unwrap();
        prop_assert!(f.pyramids().iter().all(|p| p.len() <= bound));
    }

    #[test]
    fn fits_its_canvas((w, d) in chinampa()) {
        let n = chinampa::enumeration::enclosing_canvas(&d).unwrap();
        prop_assert!(n >= 2 && n <= w);
    }

    #[test]
    fn factorization_round_trip((w, d) in chinampa()) {
        let f = factorize(&d).unwrap();
        prop_assert_eq!(f.restack(w).unwrap().activated(), d.activated());
        prop_assert_eq!(factorization_profit(&f), d.profit());
        prop_assert_eq!(f, factorize(&d).unwrap());
    }

    #[test]
    fn stacking_changes_profit((_, d) in chinampa()) {
        for a in d.activated() {
            for len in 2..=5 {
                if let Ok(next) = stack(&d, len, a) {
                    prop_assert!(next.is_chinampa().unwrap());
                    if len == 2 {
                        prop_assert_eq!(next.profit(), d.profit());
                    } else {
                        prop_assert!(next.profit() > d.profit());
                    }
                }
            }
        }
    }

    #[test]
    fn schedules_persist(l in 3u32..=8, times in prop::collection::vec(1u32..=4, 24)) {
        let base = make_cycle(l).unwrap();
        let edges = base.edges().iter().zip(&times).map(|(e, &t)| e.with_time(t)).collect();
        let net = Network::from_parts(1..=l, edges, BTreeMap::new());
        let set: BTreeSet<u32> = net.vertices().clone();
        prop_assert!(check_sufficient_conditions(&net, &set));
        let s = schedule_infinite(&net, &set).unwrap();
        prop_assert!(verify_persistence(&net, &s.stimuli, &set, default_horizon(s.m)).unwrap());
        let baseline = synfire_schedule(&net, &set).unwrap().len();
        let distinct: BTreeSet<u32> = s.windows.values().map(|(a, b)| b - a).collect();
        prop_assert!(s.stimuli.len() <= baseline);
        prop_assert_eq!(s.stimuli.len() < baseline, distinct.len() > 1);
    }

    #[test]
    fn overlay_monoid(a in config(5), b in config(5), c in config(5)) {
        let ov = |x: &StimulusConfig, y: &StimulusConfig| overlay(x, y).unwrap();
        prop_assert_eq!(ov(&ov(&a, &b), &c), ov(&a, &ov(&b, &c)));
        prop_assert_eq!(ov(&a, &StimulusConfig::empty(5)), a.clone());
        prop_assert_eq!(ov(&a, &b), ov(&b, &a));
        prop_assert_eq!(ov(&a, &a), a);
    }

    #[test]
    fn disjoint_union_laws(g in config(3), h in config(2), x in config(4)) {
        prop_assert_eq!(
            disjoint_union(&disjoint_union(&g, &h), &x),
            disjoint_union(&g, &disjoint_union(&h, &x))
        );
        prop_assert_eq!(permute(&braid(3, 2), &disjoint_union(&g, &h)).unwrap(), disjoint_union(&h, &g));
        prop_assert_eq!(disjoint_union(&g, &StimulusConfig::empty(0)), g);
    }

    #[test]
    fn equivariance(g in config(4), g2 in config(4), h in config(3), h2 in config(3), sigma in perm(4), tau in perm(3)) {
        prop_assert_eq!(
            permute(&permutation_sum(&sigma, &tau), &disjoint_union(&g, &h)).unwrap(),
            disjoint_union(&permute(&sigma, &g).unwrap(), &permute(&tau, &h).unwrap())
        );
        prop_assert_eq!(
            permute(&sigma, &overlay(&g, &g2).unwrap()).unwrap(),
            overlay(&permute(&sigma, &g).unwrap(), &permute(&sigma, &g2).unwrap()).unwrap()
        );
        prop_assert_eq!(
            overlay(&disjoint_union(&g, &h), &disjoint_union(&g2, &h2)).unwrap(),
            disjoint_union(&overlay(&g, &g2).unwrap(), &overlay(&h, &h2).unwrap())
        );
    }

    #[test]
    fn retraction(a in config(6), b in config(6), c in config(6)) {
        let g = proy(&a);
        prop_assert_eq!(proy(&incl(&g)), g);
        prop_assert_eq!(normalize_e(&normalize_e(&a)), normalize_e(&a));
        let ov = |x: &StimulusConfig, y: &StimulusConfig| overlay(x, y).unwrap();
        let all = normalize_e(&ov(&ov(&a, &b), &c));
        prop_assert_eq!(normalize_e(&ov(&normalize_e(&ov(&a, &b)), &c)), all.clone());
        prop_assert_eq!(normalize_e(&ov(&a, &normalize_e(&ov(&b, &c)))), all);
    }

    #[test]
    fn components_are_normal(a in config(6)) {
        let g = proy(&a);
        let firsts: Vec<Stv> = g.components.iter().map(|c| *c.cells().iter().next().unwrap()).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        let e = incl(&g);
        let d = closure(6, &e.stimuli);
        prop_assert!(!d.is_redundant());
    }
}

/// Scans random pairs for `e(a) ∪ e(b) ≠ e(a ∪ b)` and checks that the
/// smallest one found is the frozen fixture.
#[test]
fn homomorphism_fails_somewhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut best: Option<(StimulusConfig, StimulusConfig)> = None;
    for _ in 0..5000 {
        let n = rng.gen_range(1..=4);
        let pick = |rng: &mut ChaCha8Rng| {
            let k = rng.gen_range(0..=3);
            let s: StimulusSet = (0..k)
                .map(|_| stv(rng.gen_range(1..=n), rng.gen_range(0..=2)))
                .collect();
            StimulusConfig::new(n, s).unwrap()
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        if overlay(&normalize_e(&a), &normalize_e(&b)).unwrap()
            != normalize_e(&overlay(&a, &b).unwrap())
        {
            let size = |x: &(StimulusConfig, StimulusConfig)| {
                (x.0.n, x.0.stimuli.len() + x.1.stimuli.len())
            };
            if best
                .as_ref()
                .is_none_or(|bst| size(&(a.clone(), b.clone())) < size(bst))
            {
                best = Some((a, b));
            }
        }
    }
    let (a, b) = best.expect("a witness exists");
    assert_eq!(a.n, 2);
    assert_eq!(a.stimuli.len() + b.stimuli.len(), 3);
}
