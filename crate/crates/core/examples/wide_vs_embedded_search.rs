//! Searches random 5-observable models for two equivalent minimal models,
//! each with a single latent: one with a latent feeding three observables, the other with an embedded
//! latent and a pair of observables that are adjacent in its IPG but joined
//! neither directly nor through a latent in the model itself.
//!
//! Prints the pair in native format; the first pair found is kept as
//! `tests/fixtures/wide_vs_embedded.cg`.
//!
//!     cargo run --release --example wide_vs_embedded_search [seed]

use std::time::Instant;

use semimarkov::calculus::completions;
use semimarkov::construction::minimal_models;
use semimarkov::equivalence::{mdg_of, MdgMode};
use semimarkov::generate::{random_model, seeded, ModelParams};
use semimarkov::graph::{serialize_graph, Format};
use semimarkov::separation::{d_separation_signature, ipg_of};
use semimarkov::{Bounds, CausalModel, Kind};

fn observable_children(m: &CausalModel, l: usize) -> usize {
    m.incident(l)
        .filter(|e| e.is_directed_from(l) && m.kind(e.other(l)) == Kind::Observable)
        .count()
}

fn has_wide_latent(m: &CausalModel) -> bool {
    m.latents().any(|l| observable_children(m, l) >= 3)
}

fn has_embedded_latent(m: &CausalModel) -> bool {
    m.latents()
        .any(|l| m.incident(l).any(|e| !e.is_directed_from(l) && m.kind(e.other(l)) == Kind::Observable))
}

/// Observables adjacent in the IPG but, in `m`, neither adjacent nor both
/// adjacent to one latent.
fn detached_pair(m: &CausalModel) -> Option<(String, String)> {
    let g = ipg_of(m, None).ok()?;
    for e in g.edges() {
        let (x, y) = (m.index_of(g.name(e.u))?, m.index_of(g.name(e.v))?);
        let through_latent = m.latents().any(|l| m.adjacent(l, x) && m.adjacent(l, y));
        if !m.adjacent(x, y) && !through_latent {
            return Some((g.name(e.u).to_string(), g.name(e.v).to_string()));
        }
    }
    None
}

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let bounds = Bounds::default();
    let params = ModelParams { min_observables: 5, max_observables: 5, max_latents: 2, density: 0.35 };
    let mut rng = seeded(seed);
    let start = Instant::now();
    for round in 1.. {
        let m = random_model(&mut rng, &params);
        let Ok(target) = d_separation_signature(&m, &bounds) else { continue };
        let Ok(mdg) = mdg_of(&m, MdgMode::Exact, &bounds) else { continue };
        let Ok(cs) = completions(&mdg, &bounds) else { continue };
        let mut class: Vec<CausalModel> = Vec::new();
        for c in &cs {
            let Ok(found) = minimal_models(c, &bounds) else { continue };
            for x in found {
                if d_separation_signature(&x, &bounds).is_ok_and(|s| s == target) {
                    class.push(x);
                }
            }
        }
        let single = |x: &&CausalModel| x.latents().count() == 1;
        let wide = class.iter().filter(single).find(|x| has_wide_latent(x) && !has_embedded_latent(x));
        let embedded = class.iter().filter(single).find_map(|x| {
            (has_embedded_latent(x) && !has_wide_latent(x)).then(|| detached_pair(x).map(|p| (x, p))).flatten()
        });
        if let (Some(a), Some((b, (x, y)))) = (wide, embedded) {
            eprintln!("found after {round} models in {:.2?}; detached pair {x}, {y}", start.elapsed());
            print!("{}\n{}", serialize_graph(a, Format::Native), serialize_graph(b, Format::Native));
            return;
        }
    }
}
