//! Reductions: IPG-preserving compositions of edge removals and collapses.
//!
//! Collapsing an observable deletes a vertex of the IPG, so only latents are
//! ever collapsed, either into one another or into an observable. Any
//! composition therefore ends in a subgraph of a quotient of the model: the
//! latents are partitioned into blocks, and each block either survives as one
//! latent or is merged into one observable. Conversely every acyclic
//! subgraph of a quotient is reachable without passing through a cycle:
//! remove first the edges that the quotient would drop or turn into
//! self-loops, then collapse in any order.
//!
//! IPG marks only shrink when edges are removed, so the subgraph search
//! abandons a branch as soon as the marks fall below the target.

use std::collections::HashMap;

use crate::bits::{bit, Bits};
use crate::error::Result;
use crate::graph::{serialize_graph, Format};
use crate::model::{CausalModel, Marks, Model};
use crate::separation::ipg_marks;
use crate::Bounds;

use super::essential;

/// Set partitions of `k` items as restricted growth strings.
fn partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; k];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur[i] = b;
            rec(i + 1, max.max(b), cur, out);
        }
    }
    if k == 0 {
        out.push(Vec::new());
    } else {
        cur[0] = 0;
        rec(1, 0, &mut cur, &mut out);
    }
    out
}

/// The model with latent `l` sent to block `block_of[l - n_obs]`, and each
/// block kept as a latent (`None`) or merged into an observable.
fn quotient(m: &Model, block_of: &[usize], target: &[Option<usize>]) -> Model {
    let n_obs = m.n_obs;
    let mut names: Vec<String> = m.names[..n_obs].to_vec();
    let mut slot = vec![usize::MAX; target.len()];
    for (k, &b) in block_of.iter().enumerate() {
        if target[b].is_none() && slot[b] == usize::MAX {
            slot[b] = names.len();
            names.push(m.names[n_obs + k].clone());
        }
    }
    let map = |v: usize| {
        if v < n_obs {
            v
        } else {
            let b = block_of[v - n_obs];
            target[b].unwrap_or(slot[b])
        }
    };
    let n = names.len();
    let mut parents = vec![0; n];
    let mut visible = vec![0; n];
    for (u, v) in m.edges() {
        let (tu, tv) = (map(u), map(v));
        if tu != tv {
            parents[tv] |= bit(tu);
            if !m.is_hidden(u, v) {
                visible[tv] |= bit(tu);
            }
        }
    }
    let hidden = parents.iter().zip(&visible).map(|(p, s)| p & !s).collect();
    Model { names, n_obs, parents, hidden }
}

/// Every quotient other than the identity.
fn proper_quotients(m: &Model) -> impl Iterator<Item = Model> + '_ {
    let k = m.n() - m.n_obs;
    partitions(k).into_iter().flat_map(move |blocks| {
        let nb = blocks.iter().copied().max().map_or(0, |x| x + 1);
        let options = m.n_obs + 1;
        let total = options.pow(nb as u32);
        let identity_partition = nb == k;
        (0..total).filter_map(move |code| {
            if identity_partition && code == 0 {
                return None;
            }
            let target: Vec<Option<usize>> = (0..nb)
                .map(|b| match code / options.pow(b as u32) % options {
                    0 => None,
                    t => Some(t - 1),
                })
                .collect();
            Some(quotient(m, &blocks, &target))
        })
    })
}

/// Depth-first search over edge subsets of `x` whose marks stay at or above
/// `g`, calling `visit` on every acyclic subgraph whose marks equal `g`.
/// Stops early when `visit` returns `true`.
fn subgraphs(x: &Model, g: &Marks, skip_self: bool, visit: &mut dyn FnMut(&Model) -> bool) -> bool {
    let edges = x.edges();
    fn rec(
        cur: &Model,
        edges: &[(usize, usize)],
        start: usize,
        g: &Marks,
        report: bool,
        visit: &mut dyn FnMut(&Model) -> bool,
    ) -> bool {
        if report && cur.is_acyclic() && ipg_marks(cur) == *g && visit(cur) {
            return true;
        }
        for k in start..edges.len() {
            let (u, v) = edges[k];
            let mut next = cur.clone();
            next.remove_edge(u, v);
            if g.le(&ipg_marks(&next)) && rec(&next, edges, k + 1, g, true, visit) {
                return true;
            }
        }
        false
    }
    rec(x, &edges, 0, g, !skip_self, visit)
}

/// Some reduction of `m`, if one exists.
pub(crate) fn find_reduction(m: &Model) -> Option<Model> {
    let g = ipg_marks(m);
    for (u, v) in m.edges() {
        if !essential(m, &g, u, v) {
            let mut r = m.clone();
            r.remove_edge(u, v);
            return Some(r);
        }
    }
    for q in proper_quotients(m) {
        if !g.le(&ipg_marks(&q)) {
            continue;
        }
        let mut found = None;
        subgraphs(&q, &g, false, &mut |h| {
            found = Some(h.clone());
            true
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Orders models by latent count, edge count and native text.
pub(crate) fn model_order(m: &Model) -> (usize, usize, String) {
    let text = m.to_graph().map(|g| serialize_graph(&g, Format::Native)).unwrap_or_default();
    (m.n() - m.n_obs, m.edge_count(), text)
}

/// Every distinct model, up to latent renaming, reachable from `m` by edge
/// removals and latent collapses that entails the same IPG.
pub fn enumerate_reductions(m: &CausalModel, bounds: &Bounds) -> Result<Vec<CausalModel>> {
    let c = Model::from_graph(m);
    bounds.check_vertices(c.n())?;
    let g = ipg_marks(&c);
    let mut found: HashMap<Vec<Bits>, Model> = HashMap::new();
    let mut collect = |h: &Model| {
        found.entry(h.canonical_key()).or_insert_with(|| h.clone());
        false
    };
    subgraphs(&c, &g, true, &mut collect);
    for q in proper_quotients(&c) {
        if g.le(&ipg_marks(&q)) {
            subgraphs(&q, &g, false, &mut collect);
        }
    }
    let mut out: Vec<Model> = found.into_values().collect();
    out.sort_by_cached_key(model_order);
    out.iter().map(Model::to_causal).collect()
}

/// True iff `m` has no reduction.
pub fn is_minimal(m: &CausalModel, bounds: &Bounds) -> Result<bool> {
    let c = Model::from_graph(m);
    bounds.check_vertices(c.n())?;
    Ok(find_reduction(&c).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    fn cm(body: &str) -> CausalModel {
        CausalModel::new(parse_graph(&format!("role causal-dag\n{body}")).unwrap()).unwrap()
    }

    #[test]
    fn partition_counts() {
        let bell: Vec<usize> = (0..6).map(|k| partitions(k).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn quotient_merges_into_observable() {
        let m = Model::from_graph(&cm("obs A B C\nlat L\nedge L -> A\nedge L -> B\nedge C -> B"));
        let q = quotient(&m, &[0], &[Some(0)]);
        assert_eq!(q.n(), 3);
        assert_eq!(q.edges(), vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn reduction_examples() {
        let b = Bounds::default();
        let m = cm("obs A B\nlat L\nedge L -> A\nedge L -> B\nedge A -> B");
        let r = enumerate_reductions(&m, &b).unwrap();
        let target = cm("obs A B\nlat L\nedge L -> A\nedge L -> B");
        assert!(r.iter().any(|x| crate::graph::isomorphic_modulo_latents(x, &target)));
        assert!(!is_minimal(&m, &b).unwrap());

        assert!(enumerate_reductions(&target, &b).unwrap().is_empty());
        assert!(is_minimal(&target, &b).unwrap());

        let edge = cm("obs A B\nedge A -> B");
        assert!(enumerate_reductions(&edge, &b).unwrap().is_empty());
        assert!(is_minimal(&edge, &b).unwrap());
    }

    #[test]
    fn collapse_reductions() {
        let b = Bounds::default();
        // two latents over the same pair collapse into one
        let m = cm("obs A B\nlat L1 L2\nedge L1 -> A\nedge L1 -> B\nedge L2 -> A\nedge L2 -> B");
        assert!(!is_minimal(&m, &b).unwrap());
        let r = enumerate_reductions(&m, &b).unwrap();
        assert!(r.iter().any(|x| x.latents().count() == 1 && x.edges().len() == 2));
        // a latent feeding a single observable merges away entirely
        let m = cm("obs A B\nlat L\nedge L -> A\nedge A -> B");
        assert!(!is_minimal(&m, &b).unwrap());
    }

    #[test]
    fn bound_checked() {
        let tight = Bounds { max_vertices: 2, ..Bounds::default() };
        let m = cm("obs A B\nlat L\nedge L -> A\nedge L -> B");
        assert!(is_minimal(&m, &tight).is_err());
    }
}
