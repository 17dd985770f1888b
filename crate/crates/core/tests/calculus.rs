use proptest::prelude::*;

use semimarkov::calculus::{closure, common_marks, completions, is_valid_ipg, r1_consequences, r2_consequences};
use semimarkov::equivalence::{mdg_of, MdgMode};
use semimarkov::generate::{random_model, seeded, ModelParams};
use semimarkov::graph::parse_graph;
use semimarkov::separation::ipg_of;
use semimarkov::{Bounds, Error, Mark, MixedGraph, Role};

fn ipg_text(body: &str) -> MixedGraph {
    parse_graph(&format!("role ipg\n{body}")).unwrap()
}

/// A random graph with role ipg: each pair absent, directed either way or
/// bidirected.
fn random_ipg_shape(seed: u64, n: usize) -> MixedGraph {
    use rand::Rng;
    let mut rng = seeded(seed);
    let names: Vec<String> = (0..n).map(semimarkov::generate::observable_name).collect();
    let mut b = MixedGraph::builder(Role::Ipg).observables(names.iter().map(String::as_str));
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (names[i].as_str(), names[j].as_str());
            b = match rng.gen_range(0..6) {
                0 => b.edge(x, Mark::Tail, Mark::Arrow, y),
                1 => b.edge(x, Mark::Arrow, Mark::Tail, y),
                2 => b.edge(x, Mark::Arrow, Mark::Arrow, y),
                _ => b,
            };
        }
    }
    b.build().unwrap()
}

#[test]
fn closure_adds_r1_edge() {
    let g = ipg_text("obs A B C D\nedge A -> B\nedge B <-> C\nedge B -> D\nedge D -> C");
    assert_eq!(r1_consequences(&g).unwrap().len(), 1);
    let c = closure(&g).unwrap();
    assert!(is_valid_ipg(&c).valid);
    let (a, cc) = (c.index_of("A").unwrap(), c.index_of("C").unwrap());
    assert_eq!(c.edge_between(a, cc).unwrap().mark_at(cc), Mark::Arrow);
}

#[test]
fn invalid_input_is_diagnosed() {
    let g = ipg_text("obs A B C\nedge A -> B\nedge B -> C\nedge C -> A");
    let d = is_valid_ipg(&g);
    assert!(!d.valid);
    assert!(!d.violations.is_empty());
}

#[test]
fn conflicting_closure_fails() {
    let g = ipg_text("obs A B C D\nedge A <-> B\nedge B <-> C\nedge B -> D\nedge D -> A\nedge A -> C");
    assert!(matches!(closure(&g), Err(Error::Conflict(_)) | Err(Error::Cycle(_))));
}

#[test]
fn circle_bound_is_enforced() {
    let mdg = semimarkov::Mdg::new(parse_graph("role mdg\nobs A B C\nedge A o-o B\nedge B o-o C\n").unwrap()).unwrap();
    let tight = Bounds { max_circles: 3, ..Bounds::default() };
    assert!(matches!(completions(&mdg, &tight), Err(Error::BoundExceeded { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn valid_graphs_satisfy_their_consequences(seed in any::<u64>()) {
        let g = ipg_of(&random_model(&mut seeded(seed), &ModelParams::default()), None).unwrap();
        let requirements = r1_consequences(&g).unwrap().into_iter().chain(r2_consequences(&g).unwrap());
        for r in requirements {
            let (x, y) = (g.index_of(&r.x).unwrap(), g.index_of(&r.y).unwrap());
            let e = g.edge_between(x, y).expect("demanded edge present");
            prop_assert_eq!(e.mark_at(y), Mark::Arrow);
            if r.bidirected() {
                prop_assert_eq!(e.mark_at(x), Mark::Arrow);
            }
        }
        prop_assert_eq!(&closure(&g).unwrap(), &g);
    }

    #[test]
    fn closure_is_idempotent_and_extensive(seed in any::<u64>(), n in 2usize..6) {
        let g = random_ipg_shape(seed, n);
        if let Ok(c) = closure(&g) {
            prop_assert!(is_valid_ipg(&c).valid);
            prop_assert_eq!(&closure(&c).unwrap(), &c);
            for e in g.edges() {
                let f = c.edge_between(e.u, e.v).expect("closure keeps edges");
                for x in [e.u, e.v] {
                    if e.mark_at(x) == Mark::Arrow {
                        prop_assert_eq!(f.mark_at(x), Mark::Arrow);
                    }
                }
            }
        }
    }

    #[test]
    fn completions_round_trip(seed in any::<u64>()) {
        let p = ModelParams { max_observables: 5, ..ModelParams::default() };
        let m = random_model(&mut seeded(seed), &p);
        let mdg = mdg_of(&m, MdgMode::Exact, &Bounds::default());
        prop_assume!(!matches!(mdg, Err(Error::BoundExceeded { .. })));
        let mdg = mdg.unwrap();
        let cs = completions(&mdg, &Bounds::default()).unwrap();
        prop_assert!(!cs.is_empty());
        prop_assert!(cs.iter().all(|c| is_valid_ipg(c).valid));
        let back = common_marks(&cs).unwrap();
        for e in mdg.edges() {
            let f = back.edge_between(e.u, e.v).unwrap();
            for x in [e.u, e.v] {
                if e.mark_at(x) != Mark::Circle {
                    prop_assert_eq!(f.mark_at(x), e.mark_at(x));
                }
            }
        }
    }
}
