use std::collections::BTreeSet;

use itertools::Itertools;

use super::{Kind, Mark, MixedGraph};

type EdgeKey = (Option<String>, Option<usize>, Mark, Option<String>, Option<usize>, Mark);

/// True iff a bijection that fixes observables by name and maps latents to
/// latents carries the edges of `m1` exactly onto those of `m2`.
///
/// Brute force over latent permutations; hidden flags are not compared.
pub fn isomorphic_modulo_latents(m1: &MixedGraph, m2: &MixedGraph) -> bool {
    if m1.observable_names() != m2.observable_names()
        || m1.latents().count() != m2.latents().count()
        || m1.edges().len() != m2.edges().len()
    {
        return false;
    }
    let lat1: Vec<usize> = m1.latents().collect();
    let lat2: Vec<usize> = m2.latents().collect();
    let target = edge_keys(m2, &|i| lat2.iter().position(|&l| l == i));
    lat2.iter().copied().permutations(lat2.len()).any(|perm| {
        // latent lat1[k] of m1 maps to perm[k] of m2
        let relabel = |i: usize| {
            lat1.iter()
                .position(|&l| l == i)
                .map(|k| lat2.iter().position(|&l| l == perm[k]).unwrap())
        };
        edge_keys(m1, &relabel) == target
    })
}

fn edge_keys(g: &MixedGraph, latent_slot: &dyn Fn(usize) -> Option<usize>) -> BTreeSet<EdgeKey> {
    let end = |i: usize| -> (Option<String>, Option<usize>) {
        match g.kind(i) {
            Kind::Observable => (Some(g.name(i).to_string()), None),
            Kind::Latent => (None, latent_slot(i)),
        }
    };
    g.edges()
        .iter()
        .map(|e| {
            let (a, b) = ((end(e.u), e.mark_u), (end(e.v), e.mark_v));
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            (x.0 .0, x.0 .1, x.1, y.0 .0, y.0 .1, y.1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Role;

    fn model(latents: &[&str], edges: &[(&str, &str)]) -> MixedGraph {
        let mut b = MixedGraph::builder(Role::CausalDag).observables(["A", "B"]);
        for l in latents {
            b = b.latent(l);
        }
        for (x, y) in edges {
            b = b.directed(x, y);
        }
        b.build().unwrap()
    }

    #[test]
    fn latent_rename() {
        let m1 = model(&["L1"], &[("L1", "A"), ("L1", "B")]);
        let m2 = model(&["L9"], &[("L9", "A"), ("L9", "B")]);
        assert!(isomorphic_modulo_latents(&m1, &m2));
    }

    #[test]
    fn different_edge_count() {
        let m1 = model(&["L"], &[("L", "A"), ("L", "B")]);
        let m2 = model(&[], &[("A", "B")]);
        assert!(!isomorphic_modulo_latents(&m1, &m2));
    }

    #[test]
    fn swap_bijection() {
        let m1 = model(&["L1", "L2"], &[("L1", "A"), ("L2", "B")]);
        let m2 = model(&["L1", "L2"], &[("L1", "B"), ("L2", "A")]);
        assert!(isomorphic_modulo_latents(&m1, &m2));
        let m3 = model(&["L1", "L2"], &[("L1", "A"), ("L1", "B")]);
        assert!(!isomorphic_modulo_latents(&m1, &m3));
    }

    #[test]
    fn observables_are_fixed_by_name() {
        let m1 = model(&[], &[("A", "B")]);
        let m2 = model(&[], &[("B", "A")]);
        assert!(!isomorphic_modulo_latents(&m1, &m2));
    }
}
