use itertools::Itertools;
use proptest::prelude::*;

use semimarkov::calculus::is_valid_ipg;
use semimarkov::generate::{random_model, seeded, ModelParams};
use semimarkov::graph::ancestors;
use semimarkov::separation::{classify_inducing, d_separated, d_separated_oracle, d_separation_signature, ipg_of};
use semimarkov::{fixtures, Bounds, CausalModel, Mark};

fn model(seed: u64, max_observables: usize, max_latents: usize) -> CausalModel {
    let p = ModelParams { min_observables: 2, max_observables, max_latents, density: 0.35 };
    random_model(&mut seeded(seed), &p)
}

#[test]
fn confounded_pair_is_bidirected() {
    let g = ipg_of(&fixtures::conf(), None).unwrap();
    let e = &g.edges()[0];
    assert_eq!((e.mark_u, e.mark_v), (Mark::Arrow, Mark::Arrow));
}

#[test]
fn redundant_edge_paths() {
    let m = fixtures::redundant_edge();
    let c = classify_inducing(&m, &["A", "B", "C"], "A", "B").unwrap();
    assert!(c.exists && c.into_b && !c.into_a);
}

#[test]
fn signature_lookup() {
    let s = d_separation_signature(&fixtures::chain(), &Bounds::default()).unwrap();
    assert_eq!(s.len(), 6);
    assert_eq!(s.separated("A", "C", &["B"]), Some(true));
    assert_eq!(s.separated("C", "A", &[]), Some(false));
    assert_eq!(s.separated("A", "Z", &[]), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_d_separation_matches_enumeration(seed in any::<u64>()) {
        let m = model(seed, 5, 2);
        let names: Vec<String> = m.vertices().iter().map(|v| v.name.clone()).collect();
        for (a, b) in names.iter().tuple_combinations() {
            let rest: Vec<&str> = names.iter().map(String::as_str).filter(|x| x != a && x != b).collect();
            for w in rest.iter().copied().powerset() {
                prop_assert_eq!(d_separated(&m, a, b, &w).unwrap(), d_separated_oracle(&m, a, b, &w).unwrap());
            }
        }
    }

    #[test]
    fn d_separation_is_symmetric(seed in any::<u64>()) {
        let m = model(seed, 5, 2);
        let obs = m.observable_names();
        for (a, b) in obs.iter().tuple_combinations() {
            let rest: Vec<&str> = obs.iter().map(String::as_str).filter(|x| x != a && x != b).collect();
            for w in rest.iter().copied().powerset() {
                prop_assert_eq!(d_separated(&m, a, b, &w).unwrap(), d_separated(&m, b, a, &w).unwrap());
            }
        }
    }

    #[test]
    fn ipgs_are_valid(seed in any::<u64>()) {
        let g = ipg_of(&model(seed, 6, 3), None).unwrap();
        prop_assert!(is_valid_ipg(&g).valid);
    }

    #[test]
    fn tails_point_away_from_ancestors(seed in any::<u64>()) {
        let m = model(seed, 6, 3);
        let g = ipg_of(&m, None).unwrap();
        for e in g.edges() {
            for (x, y) in [(e.u, e.v), (e.v, e.u)] {
                if e.mark_at(x) == Mark::Tail {
                    prop_assert!(ancestors(&m, g.name(y)).unwrap().contains(g.name(x)));
                }
            }
        }
    }

    #[test]
    fn adjacency_iff_never_separated(seed in any::<u64>()) {
        let m = model(seed, 5, 2);
        let g = ipg_of(&m, None).unwrap();
        let s = d_separation_signature(&m, &Bounds::default()).unwrap();
        for (a, b) in m.observable_names().iter().tuple_combinations() {
            let separable = s.entries().any(|e| &e.a == a && &e.b == b && e.separated);
            let adjacent = g.adjacent(g.index_of(a).unwrap(), g.index_of(b).unwrap());
            prop_assert_eq!(adjacent, !separable);
        }
    }
}
