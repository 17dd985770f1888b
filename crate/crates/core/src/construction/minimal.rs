//! Minimal models of an IPG, generated stage by stage from its expansions.
//!
//! 1. In every expansion, drop redundant observable edges, then redundant
//!    hidden edges.
//! 2. Drop redundant latents, branching over removal orders.
//! 3. Collapse latent pairs, branching over collapse orders.
//! 4. Embed latents (with and without a fresh companion latent).
//! 5. Connect latents.
//!
//! Every step is kept only if the IPG is unchanged. Stages 4 and 5 follow
//! each rewrite with edge removals until no edge is redundant. Whatever
//! survives is reduced further if it still has a reduction, then
//! deduplicated up to latent renaming.

use std::collections::HashSet;

use crate::bits::{members, Bits};
use crate::calculus::{is_valid_ipg, Ipg};
use crate::error::{Error, Result};
use crate::model::{CausalModel, Marks, Model};
use crate::separation::ipg_marks;
use crate::Bounds;

use super::reduce::model_order;
use super::{connect, embed, essential, expansion_models, find_reduction, redundancy_pattern};

struct Pipeline<'a> {
    g: &'a Marks,
}

impl Pipeline<'_> {
    fn keeps(&self, m: &Model) -> bool {
        m.is_acyclic() && ipg_marks(m) == *self.g
    }

    fn observable_edges(m: &Model) -> Vec<(usize, usize)> {
        m.edges()
            .into_iter()
            .filter(|&(u, v)| m.is_observable(u) && m.is_observable(v) && !m.is_hidden(u, v))
            .collect()
    }

    fn hidden_edges(m: &Model) -> Vec<(usize, usize)> {
        m.edges().into_iter().filter(|&(u, v)| m.is_hidden(u, v)).collect()
    }

    /// Stage 1 on one expansion.
    fn prune_expansion(&self, mut m: Model) -> Model {
        let redundant: Vec<(usize, usize)> = Self::observable_edges(&m)
            .into_iter()
            .filter(|&(u, v)| redundancy_pattern(&m, u, v))
            .collect();
        let mut c = m.clone();
        for &(u, v) in &redundant {
            c.remove_edge(u, v);
        }
        if self.keeps(&c) {
            m = c;
        }
        loop {
            let next = Self::observable_edges(&m)
                .into_iter()
                .chain(Self::hidden_edges(&m))
                .find(|&(u, v)| !essential(&m, self.g, u, v));
            match next {
                Some((u, v)) => m.remove_edge(u, v),
                None => return m,
            }
        }
    }

    /// Removes redundant edges, first one first, until none is left.
    fn prune_all(&self, mut m: Model) -> Model {
        while let Some((u, v)) = m.edges().into_iter().find(|&(u, v)| !essential(&m, self.g, u, v)) {
            m.remove_edge(u, v);
        }
        m
    }

    fn without_latent(&self, m: &Model) -> Vec<Model> {
        m.latents()
            .filter_map(|l| {
                let mut c = m.clone();
                c.remove_vertex(l);
                self.keeps(&c).then_some(c)
            })
            .collect()
    }

    fn collapsed(&self, m: &Model) -> Vec<Model> {
        let lat: Vec<usize> = m.latents().collect();
        let mut out = Vec::new();
        for (k, &a) in lat.iter().enumerate() {
            for &b in &lat[k + 1..] {
                let c = m.collapse(b, a);
                if self.keeps(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    fn embedded(&self, m: &Model) -> Vec<Model> {
        let children = m.children();
        let obs = m.observed_mask();
        let mut out = Vec::new();
        for l in m.latents() {
            for v2 in members(children[l] & obs) {
                for v3 in members(children[l] & obs).filter(|&x| x != v2) {
                    for v1 in members(m.parents[v2] & obs).filter(|&x| x != v3) {
                        for star in [true, false] {
                            if let Ok(c) = embed(m, v1, v2, v3, l, star) {
                                if self.keeps(&c) {
                                    out.push(self.prune_all(c));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn connected(&self, m: &Model) -> Vec<Model> {
        let children = m.children();
        let mut out = Vec::new();
        for l1 in m.latents() {
            for l2 in m.latents().filter(|&x| x != l1) {
                for v in members(children[l1] & children[l2] & m.observed_mask()) {
                    if let Ok(c) = connect(m, l1, l2, v) {
                        if self.keeps(&c) {
                            out.push(self.prune_all(c));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Depth-first closure of `starts` under `step`, deduplicated up to latent
/// renaming. Returns every visited state, or only the ones without
/// successors when `terminal_only` is set.
fn explore(starts: Vec<Model>, terminal_only: bool, step: impl Fn(&Model) -> Vec<Model>) -> Vec<Model> {
    let mut seen: HashSet<Vec<Bits>> = HashSet::new();
    let mut out = Vec::new();
    let mut stack: Vec<Model> = Vec::new();
    for s in starts.into_iter().rev() {
        if seen.insert(s.canonical_key()) {
            stack.push(s);
        }
    }
    while let Some(m) = stack.pop() {
        let next = step(&m);
        let terminal = next.is_empty();
        for c in next.into_iter().rev() {
            if seen.insert(c.canonical_key()) {
                stack.push(c);
            }
        }
        if terminal || !terminal_only {
            out.push(m);
        }
    }
    out
}

fn dedup(models: Vec<Model>) -> Vec<Model> {
    let mut seen = HashSet::new();
    models.into_iter().filter(|m| seen.insert(m.canonical_key())).collect()
}

/// The pipeline on compact marks; `names` are the observable names.
fn minimal_model_set(g: &Marks, names: &[String]) -> Vec<Model> {
    let p = Pipeline { g };
    let pruned = dedup(
        expansion_models(g, names)
            .into_iter()
            .map(|(_, m)| p.prune_expansion(m))
            .collect(),
    );
    let external = explore(pruned, true, |m| p.without_latent(m));
    let collapsed = explore(external, true, |m| p.collapsed(m));
    let embedded = explore(collapsed, false, |m| p.embedded(m));
    let connected = explore(embedded, false, |m| p.connected(m));
    let mut finals: Vec<Model> = connected
        .into_iter()
        .map(|mut m| {
            while let Some(r) = find_reduction(&m) {
                m = r;
            }
            m
        })
        .collect();
    finals = dedup(finals);
    finals.sort_by_cached_key(model_order);
    finals
}

/// Minimal models entailing `g`, up to latent renaming, ordered by latent
/// count, edge count and text.
pub fn minimal_models(g: &Ipg, bounds: &Bounds) -> Result<Vec<CausalModel>> {
    if let Some(v) = is_valid_ipg(g).violations.first() {
        return Err(Error::pre(format!("not a valid IPG: {v}")));
    }
    let marks = Marks::from_graph(g);
    let bidirected: usize = marks.bidirected().iter().map(|b| b.count_ones() as usize).sum::<usize>() / 2;
    bounds.check_vertices(marks.n() + bidirected)?;
    minimal_model_set(&marks, &g.observable_names())
        .iter()
        .map(Model::to_causal)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{isomorphic_modulo_latents, parse_graph, serialize_graph, Format};

    fn ipg(text: &str) -> Ipg {
        Ipg::new(parse_graph(&format!("role ipg\n{text}")).unwrap()).unwrap()
    }

    fn texts(g: &Ipg) -> Vec<String> {
        minimal_models(g, &Bounds::default())
            .unwrap()
            .iter()
            .map(|m| serialize_graph(m, Format::Native))
            .collect()
    }

    #[test]
    fn pipeline_examples() {
        assert_eq!(texts(&ipg("obs A B\nedge A -> B")), vec!["role causal-dag\nobs A B\nedge A -> B\n"]);
        assert_eq!(
            texts(&ipg("obs A B\nedge A <-> B")),
            vec!["role causal-dag\nobs A B\nlat L_A_B\nedge L_A_B -> A\nedge L_A_B -> B\n"]
        );
        assert_eq!(
            texts(&ipg("obs A B C\nedge A -> B\nedge B -> C")),
            vec!["role causal-dag\nobs A B C\nedge A -> B\nedge B -> C\n"]
        );
    }

    #[test]
    fn three_way_confounding_collapses() {
        let g = ipg("obs A B C\nedge A <-> B\nedge B <-> C\nedge A <-> C");
        let models = minimal_models(&g, &Bounds::default()).unwrap();
        let one = CausalModel::new(
            parse_graph("role causal-dag\nobs A B C\nlat L\nedge L -> A\nedge L -> B\nedge L -> C").unwrap(),
        )
        .unwrap();
        assert!(models.iter().any(|m| isomorphic_modulo_latents(m, &one)));
        for m in &models {
            assert_eq!(crate::separation::ipg_of(m, None).unwrap().graph(), g.graph());
            assert!(super::super::is_minimal(m, &Bounds::default()).unwrap());
        }
    }
}
