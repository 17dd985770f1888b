//! Compact causal-model representation used by the search-heavy code.
//!
//! Vertices are indexed with the observables first (sorted by name) and the
//! latents after them (sorted by name at conversion time), so observable `i`
//! of a model is vertex `i` of its inducing path graph no matter how many
//! latents are added, removed or collapsed.

use std::ops::Deref;

use itertools::Itertools;

use crate::bits::{self, bit, has, members, Bits};
use crate::error::{Error, Result};
use crate::graph::{Kind, Mark, MixedGraph, Role};

/// A [`MixedGraph`] with role `causal-dag` and at least one observable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalModel(MixedGraph);

impl CausalModel {
    pub fn new(g: MixedGraph) -> Result<Self> {
        if g.role() != Role::CausalDag {
            return Err(Error::role("causal-dag", format!("got a {} graph", g.role())));
        }
        if g.observables().next().is_none() {
            return Err(Error::role("causal-dag", "a causal model needs an observable"));
        }
        Ok(CausalModel(g))
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}

impl Deref for CausalModel {
    type Target = MixedGraph;
    fn deref(&self) -> &MixedGraph {
        &self.0
    }
}

impl TryFrom<MixedGraph> for CausalModel {
    type Error = Error;
    fn try_from(g: MixedGraph) -> Result<Self> {
        CausalModel::new(g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Model {
    pub names: Vec<String>,
    pub n_obs: usize,
    pub parents: Vec<Bits>,
    /// `hidden[v]` holds the parents of `v` joined by a hidden edge.
    pub hidden: Vec<Bits>,
}

impl Model {
    pub fn from_graph(g: &MixedGraph) -> Model {
        let order: Vec<usize> = g.observables().chain(g.latents()).collect();
        let mut pos = vec![0; g.len()];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let n = order.len();
        let mut parents = vec![0; n];
        let mut hidden = vec![0; n];
        for e in g.edges() {
            let (x, y) = if e.is_directed_from(e.u) { (e.u, e.v) } else { (e.v, e.u) };
            parents[pos[y]] |= bit(pos[x]);
            if e.hidden {
                hidden[pos[y]] |= bit(pos[x]);
            }
        }
        Model {
            names: order.iter().map(|&i| g.name(i).to_string()).collect(),
            n_obs: g.observables().count(),
            parents,
            hidden,
        }
    }

    pub fn to_graph(&self) -> Result<MixedGraph> {
        let mut b = MixedGraph::builder(Role::CausalDag);
        for (i, name) in self.names.iter().enumerate() {
            b = b.vertex(name, if self.is_observable(i) { Kind::Observable } else { Kind::Latent });
        }
        for v in 0..self.n() {
            for u in members(self.parents[v]) {
                b = if has(self.hidden[v], u) {
                    b.hidden(&self.names[u], &self.names[v])
                } else {
                    b.directed(&self.names[u], &self.names[v])
                };
            }
        }
        b.build()
    }

    pub fn to_causal(&self) -> Result<CausalModel> {
        CausalModel::new(self.to_graph()?)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn is_observable(&self, i: usize) -> bool {
        i < self.n_obs
    }

    pub fn latents(&self) -> std::ops::Range<usize> {
        self.n_obs..self.n()
    }

    pub fn observed_mask(&self) -> Bits {
        bit(self.n_obs) - 1
    }

    pub fn children(&self) -> Vec<Bits> {
        let mut ch = vec![0; self.n()];
        for v in 0..self.n() {
            for p in members(self.parents[v]) {
                ch[p] |= bit(v);
            }
        }
        ch
    }

    pub fn ancestors(&self) -> Vec<Bits> {
        bits::ancestor_closure(&self.parents)
    }

    pub fn is_acyclic(&self) -> bool {
        bits::acyclic(&self.parents)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.count_ones() as usize).sum()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        has(self.parents[v], u)
    }

    pub fn is_hidden(&self, u: usize, v: usize) -> bool {
        has(self.hidden[v], u)
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.parents[v] &= !bit(u);
        self.hidden[v] &= !bit(u);
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.parents[v] |= bit(u);
    }

    /// Every edge as `(parent, child)`, children in index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|v| members(self.parents[v]).map(move |u| (u, v)))
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn fresh_latent(&mut self, base: &str) -> usize {
        let mut name = base.to_string();
        let mut k = 2;
        while self.index_of(&name).is_some() {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.names.push(name);
        self.parents.push(0);
        self.hidden.push(0);
        self.n() - 1
    }

    /// Deletes vertex `i` with all its edges; later indices shift down.
    pub fn remove_vertex(&mut self, i: usize) {
        self.names.remove(i);
        self.parents.remove(i);
        self.hidden.remove(i);
        for p in self.parents.iter_mut() {
            *p = bits::squeeze(*p, i);
        }
        for h in self.hidden.iter_mut() {
            *h = bits::squeeze(*h, i);
        }
        if i < self.n_obs {
            self.n_obs -= 1;
        }
    }

    /// Substitutes `keep` for `gone` in every edge, drops self-loops and
    /// merges duplicates, then deletes `gone`. The result may be cyclic.
    pub fn collapse(&self, gone: usize, keep: usize) -> Model {
        let mut m = self.clone();
        let gone_parents = m.parents[gone];
        let gone_hidden = m.hidden[gone];
        m.parents[keep] |= gone_parents;
        m.hidden[keep] |= gone_hidden;
        for v in 0..m.n() {
            if has(m.parents[v], gone) {
                m.parents[v] = (m.parents[v] & !bit(gone)) | bit(keep);
            }
            if has(m.hidden[v], gone) {
                m.hidden[v] = (m.hidden[v] & !bit(gone)) | bit(keep);
            }
        }
        m.parents[keep] &= !bit(keep) & !bit(gone);
        m.hidden[keep] &= !bit(keep) & !bit(gone);
        // a merged edge is hidden only if every source edge was
        for v in 0..m.n() {
            m.hidden[v] &= m.parents[v];
        }
        m.remove_vertex(gone);
        m
    }

    /// Canonical key modulo latent renaming: the lexicographically smallest
    /// parent-mask vector over all latent orders that respect a cheap
    /// per-latent invariant.
    pub fn canonical_key(&self) -> Vec<Bits> {
        let k = self.n() - self.n_obs;
        let children = self.children();
        let obs = self.observed_mask();
        let invariant = |l: usize| {
            (
                self.parents[l] & obs,
                children[l] & obs,
                (self.parents[l] & !obs).count_ones(),
                (children[l] & !obs).count_ones(),
            )
        };
        let mut lat: Vec<usize> = self.latents().collect();
        lat.sort_by_key(|&l| invariant(l));
        // groups of latents sharing an invariant may be permuted freely
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut s = 0;
        for i in 1..=k {
            if i == k || invariant(lat[i]) != invariant(lat[s]) {
                groups.push((s, i));
                s = i;
            }
        }
        let mut best: Option<Vec<Bits>> = None;
        let mut order = lat.clone();
        permute_groups(&mut order, &groups, 0, &mut |order| {
            let key = self.relabelled_key(order);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        });
        best.unwrap_or_else(|| self.relabelled_key(&[]))
    }

    fn relabelled_key(&self, latent_order: &[usize]) -> Vec<Bits> {
        let n = self.n();
        let mut pos: Vec<usize> = (0..n).collect();
        for (k, &l) in latent_order.iter().enumerate() {
            pos[l] = self.n_obs + k;
        }
        let mut key = vec![0; n + 1];
        key[n] = self.n_obs as Bits;
        for v in 0..n {
            key[pos[v]] = members(self.parents[v]).fold(0, |acc, u| acc | bit(pos[u]));
        }
        key
    }
}

fn permute_groups(order: &mut Vec<usize>, groups: &[(usize, usize)], g: usize, visit: &mut dyn FnMut(&[usize])) {
    if g == groups.len() {
        visit(order);
        return;
    }
    let (s, e) = groups[g];
    let items: Vec<usize> = order[s..e].to_vec();
    for perm in items.iter().copied().permutations(e - s) {
        order[s..e].copy_from_slice(&perm);
        permute_groups(order, groups, g + 1, visit);
    }
}

/// Inducing-path-graph marks over the first `n` vertices of a model.
/// `arrow[i]` bit `j` means the edge `i - j` carries an arrow at `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Marks {
    pub adj: Vec<Bits>,
    pub arrow: Vec<Bits>,
}

impl Marks {
    pub fn empty(n: usize) -> Marks {
        Marks { adj: vec![0; n], arrow: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn set_edge(&mut self, i: usize, j: usize, arrow_i: bool, arrow_j: bool) {
        self.adj[i] |= bit(j);
        self.adj[j] |= bit(i);
        self.arrow[i] = (self.arrow[i] & !bit(j)) | if arrow_i { bit(j) } else { 0 };
        self.arrow[j] = (self.arrow[j] & !bit(i)) | if arrow_j { bit(i) } else { 0 };
    }

    pub fn clear_edge(&mut self, i: usize, j: usize) {
        self.adj[i] &= !bit(j);
        self.adj[j] &= !bit(i);
        self.arrow[i] &= !bit(j);
        self.arrow[j] &= !bit(i);
    }

    pub fn arrow_at(&self, at: usize, other: usize) -> bool {
        has(self.arrow[at], other)
    }

    /// `parents[v]` = vertices `u` with `u -> v` (tail at `u`, arrow at `v`).
    pub fn directed_parents(&self) -> Vec<Bits> {
        (0..self.n())
            .map(|v| self.arrow[v] & self.adj[v] & !self.arrow_from(v))
            .collect()
    }

    /// Vertices `u` whose edge to `v` has an arrow at `u`.
    fn arrow_from(&self, v: usize) -> Bits {
        members(self.adj[v])
            .filter(|&u| self.arrow_at(u, v))
            .fold(0, |acc, u| acc | bit(u))
    }

    /// `bidirected[v]` = vertices joined to `v` by an arrow-arrow edge.
    pub fn bidirected(&self) -> Vec<Bits> {
        (0..self.n()).map(|v| self.arrow[v] & self.arrow_from(v)).collect()
    }

    /// Componentwise order: every adjacency and arrow of `self` is in `other`.
    pub fn le(&self, other: &Marks) -> bool {
        (0..self.n()).all(|i| {
            self.adj[i] & !other.adj[i] == 0 && self.arrow[i] & !other.arrow[i] == 0
        })
    }

    pub fn from_graph(g: &MixedGraph) -> Marks {
        let mut m = Marks::empty(g.len());
        for e in g.edges() {
            m.set_edge(e.u, e.v, e.mark_u == Mark::Arrow, e.mark_v == Mark::Arrow);
        }
        m
    }

    pub fn to_graph(&self, names: &[String], role: Role) -> Result<MixedGraph> {
        let mut b = MixedGraph::builder(role);
        for name in names.iter().take(self.n()) {
            b = b.observable(name);
        }
        for i in 0..self.n() {
            for j in members(self.adj[i] & !(bit(i + 1) - 1)) {
                let mark = |at: usize, other: usize| {
                    if self.arrow_at(at, other) { Mark::Arrow } else { Mark::Tail }
                };
                b = b.edge(&names[i], mark(i, j), mark(j, i), &names[j]);
            }
        }
        b.build()
    }
}
