//! Seeded random models for tests, benchmarks and searches.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equivalence::PearlModel;
use crate::graph::{Mark, MixedGraph, Role};
use crate::model::CausalModel;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Observable names `A`, `B`, ... (then `V26`, `V27`, ...).
pub fn observable_name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("V{i}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub min_observables: usize,
    pub max_observables: usize,
    pub max_latents: usize,
    /// Probability of each edge compatible with a random topological order.
    pub density: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { min_observables: 2, max_observables: 6, max_latents: 3, density: 0.3 }
    }
}

/// A random acyclic model: vertex counts uniform in their ranges, a random
/// topological order, and each forward pair joined with probability
/// `density`. Latents are named `L1`, `L2`, ...
pub fn random_model<R: Rng>(rng: &mut R, p: &ModelParams) -> CausalModel {
    let n_obs = rng.gen_range(p.min_observables..=p.max_observables);
    let n_lat = rng.gen_range(0..=p.max_latents);
    let mut b = MixedGraph::builder(Role::CausalDag);
    let mut names = Vec::new();
    for i in 0..n_obs {
        names.push(observable_name(i));
        b = b.observable(&observable_name(i));
    }
    for i in 0..n_lat {
        let name = format!("L{}", i + 1);
        b = b.latent(&name);
        names.push(name);
    }
    names.shuffle(rng);
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            if rng.gen_bool(p.density) {
                b = b.directed(&names[i], &names[j]);
            }
        }
    }
    CausalModel::new(b.build().expect("forward edges are acyclic")).expect("has observables")
}

/// A random Pearl model with `2..=max_observables` vertices and at most
/// `max_edges` edges; each edge is a correlated error with probability
/// `p_bidirected`, otherwise it follows a random topological order.
pub fn random_pearl<R: Rng>(rng: &mut R, max_observables: usize, max_edges: usize, p_bidirected: f64) -> PearlModel {
    let n = rng.gen_range(2..=max_observables);
    let mut names: Vec<String> = (0..n).map(observable_name).collect();
    let mut b = MixedGraph::builder(Role::Pearl).observables(names.iter().map(String::as_str));
    names.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.shuffle(rng);
    let k = rng.gen_range(0..=max_edges.min(pairs.len()));
    for &(i, j) in &pairs[..k] {
        b = if rng.gen_bool(p_bidirected) {
            b.edge(&names[i], Mark::Arrow, Mark::Arrow, &names[j])
        } else {
            b.directed(&names[i], &names[j])
        };
    }
    PearlModel::new(b.build().expect("forward edges are acyclic")).expect("pearl role")
}
