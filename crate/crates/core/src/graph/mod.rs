//! Mixed graphs with per-endpoint marks.
//!
//! One container serves every graph species the crate handles: causal DAGs
//! over observable and latent variables, inducing path graphs, marginal
//! dependency graphs and correlated-error models. Every edge joins an
//! unordered pair of distinct vertices and carries a [`Mark`] at each end, so
//! `A -> B`, `A <-> B`, `A o-> B` and `A o-o B` are all the same [`Edge`] type
//! with different marks.
//!
//! Graphs are immutable values once built. Vertices are kept sorted by name
//! and edges sorted by endpoint index, which gives every derived output a
//! canonical order.

mod format;
mod iso;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::bits::{self, bit, Bits, MAX_VERTICES};
use crate::error::{Error, Result};

pub use format::{parse_graph, parse_graphs, serialize_graph, Format};
pub use iso::isomorphic_modulo_latents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Observable,
    Latent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    CausalDag,
    Ipg,
    Mdg,
    Pearl,
}

impl Role {
    pub fn keyword(self) -> &'static str {
        match self {
            Role::CausalDag => "causal-dag",
            Role::Ipg => "ipg",
            Role::Mdg => "mdg",
            Role::Pearl => "pearl",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Role> {
        match word {
            "causal-dag" => Some(Role::CausalDag),
            "ipg" => Some(Role::Ipg),
            "mdg" => Some(Role::Mdg),
            "pearl" => Some(Role::Pearl),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub name: String,
    pub kind: Kind,
}

/// An edge between vertex indices `u < v` with a mark at each endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub mark_u: Mark,
    pub mark_v: Mark,
    /// Set on hidden observable-observable edges of an expansion.
    pub hidden: bool,
}

impl Edge {
    /// Mark at endpoint `x`. Panics if `x` is not an endpoint.
    pub fn mark_at(&self, x: usize) -> Mark {
        if x == self.u {
            self.mark_u
        } else if x == self.v {
            self.mark_v
        } else {
            panic!("vertex {x} is not an endpoint of edge {}-{}", self.u, self.v)
        }
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// `x -> y` with a tail at `x` and an arrow at `y`.
    pub fn is_directed_from(&self, x: usize) -> bool {
        self.mark_at(x) == Mark::Tail && self.mark_at(self.other(x)) == Mark::Arrow
    }

    pub fn is_bidirected(&self) -> bool {
        self.mark_u == Mark::Arrow && self.mark_v == Mark::Arrow
    }
}

/// A simple path, listed as vertex names from one end to the other.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub vertices: Vec<String>,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.vertices.join("-"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    role: Role,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    /// `[x, center, y]` with `x < y`.
    noncolliders: Vec<[usize; 3]>,
    incident: Vec<Vec<usize>>,
}

impl MixedGraph {
    pub fn builder(role: Role) -> GraphBuilder {
        GraphBuilder::new(role)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn noncolliders(&self) -> &[[usize; 3]] {
        &self.noncolliders
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vertices[i].name
    }

    pub fn kind(&self, i: usize) -> Kind {
        self.vertices[i].kind
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices
            .binary_search_by(|v| v.name.as_str().cmp(name))
            .ok()
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn observables(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.kind(i) == Kind::Observable)
    }

    pub fn latents(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.kind(i) == Kind::Latent)
    }

    pub fn observable_names(&self) -> Vec<String> {
        self.observables().map(|i| self.name(i).to_string()).collect()
    }

    /// Edges touching vertex `i`.
    pub fn incident(&self, i: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.incident[i].iter().map(move |&e| &self.edges[e])
    }

    pub fn edge_between(&self, x: usize, y: usize) -> Option<&Edge> {
        let (u, v) = if x < y { (x, y) } else { (y, x) };
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&(u, v)))
            .ok()
            .map(|k| &self.edges[k])
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        self.edge_between(x, y).is_some()
    }

    /// `parents[v]` = tail-arrow predecessors of `v`.
    pub(crate) fn parent_masks(&self) -> Vec<Bits> {
        let mut parents = vec![0; self.len()];
        for e in &self.edges {
            if e.is_directed_from(e.u) {
                parents[e.v] |= bit(e.u);
            } else if e.is_directed_from(e.v) {
                parents[e.u] |= bit(e.v);
            }
        }
        parents
    }

    pub(crate) fn ancestor_masks(&self) -> Vec<Bits> {
        bits::ancestor_closure(&self.parent_masks())
    }

    /// Same vertices and edges under a different role, re-validated.
    pub fn with_role(&self, role: Role) -> Result<MixedGraph> {
        let mut g = self.clone();
        g.role = role;
        g.validate()?;
        Ok(g)
    }

    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new(self.role);
        for v in &self.vertices {
            b = b.vertex(&v.name, v.kind);
        }
        for e in &self.edges {
            b.edges.push(BuilderEdge {
                x: self.name(e.u).to_string(),
                y: self.name(e.v).to_string(),
                mark_x: e.mark_u,
                mark_y: e.mark_v,
                hidden: e.hidden,
            });
        }
        for t in &self.noncolliders {
            b = b.noncollider(self.name(t[0]), self.name(t[1]), self.name(t[2]));
        }
        b
    }

    fn validate(&self) -> Result<()> {
        let role = self.role.keyword();
        for e in &self.edges {
            if e.mark_u == Mark::Tail && e.mark_v == Mark::Tail {
                return Err(Error::role(
                    role,
                    format!("tail-tail edge {} -- {}", self.name(e.u), self.name(e.v)),
                ));
            }
            if e.hidden && self.role != Role::CausalDag {
                return Err(Error::role(role, "hidden edges belong to causal-dag graphs"));
            }
        }
        if self.role != Role::Mdg && !self.noncolliders.is_empty() {
            return Err(Error::role(role, "noncollider triples belong to mdg graphs"));
        }
        if self.role != Role::CausalDag {
            if let Some(i) = self.latents().next() {
                return Err(Error::role(
                    role,
                    format!("latent vertex `{}` not allowed", self.name(i)),
                ));
            }
        }
        match self.role {
            Role::CausalDag => {
                for e in &self.edges {
                    if !(e.is_directed_from(e.u) || e.is_directed_from(e.v)) {
                        return Err(Error::role(
                            role,
                            format!(
                                "edge {} - {} is not tail-arrow",
                                self.name(e.u),
                                self.name(e.v)
                            ),
                        ));
                    }
                    if e.hidden
                        && (self.kind(e.u) != Kind::Observable
                            || self.kind(e.v) != Kind::Observable)
                    {
                        return Err(Error::role(role, "hidden edges join two observables"));
                    }
                }
                self.require_acyclic()?;
            }
            Role::Ipg | Role::Pearl => {
                for e in &self.edges {
                    if e.mark_u == Mark::Circle || e.mark_v == Mark::Circle {
                        return Err(Error::role(
                            role,
                            format!(
                                "circle mark on {} - {}",
                                self.name(e.u),
                                self.name(e.v)
                            ),
                        ));
                    }
                }
                if self.role == Role::Pearl {
                    self.require_acyclic()?;
                }
            }
            Role::Mdg => {
                for t in &self.noncolliders {
                    let [x, c, y] = *t;
                    if !self.adjacent(x, c) || !self.adjacent(c, y) || self.adjacent(x, y) {
                        return Err(Error::role(
                            role,
                            format!(
                                "noncollider {} {} {} is not an unshielded triple",
                                self.name(x),
                                self.name(c),
                                self.name(y)
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn require_acyclic(&self) -> Result<()> {
        let parents = self.parent_masks();
        if bits::acyclic(&parents) {
            return Ok(());
        }
        let anc = bits::ancestor_closure(&parents);
        let on_cycle = (0..self.len())
            .find(|&v| bits::members(parents[v]).any(|p| bits::has(anc[p], v)))
            .unwrap_or(0);
        Err(Error::Cycle(self.name(on_cycle).to_string()))
    }
}

#[derive(Debug, Clone)]
struct BuilderEdge {
    x: String,
    y: String,
    mark_x: Mark,
    mark_y: Mark,
    hidden: bool,
}

/// Name-based graph construction; [`GraphBuilder::build`] sorts, indexes and
/// validates the role invariants.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    role: Role,
    vertices: Vec<Vertex>,
    edges: Vec<BuilderEdge>,
    noncolliders: Vec<(String, String, String)>,
}

impl GraphBuilder {
    pub fn new(role: Role) -> Self {
        GraphBuilder {
            role,
            vertices: Vec::new(),
            edges: Vec::new(),
            noncolliders: Vec::new(),
        }
    }

    pub fn vertex(mut self, name: &str, kind: Kind) -> Self {
        self.vertices.push(Vertex {
            name: name.to_string(),
            kind,
        });
        self
    }

    pub fn observable(self, name: &str) -> Self {
        self.vertex(name, Kind::Observable)
    }

    pub fn observables<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        for n in names {
            self = self.observable(n);
        }
        self
    }

    pub fn latent(self, name: &str) -> Self {
        self.vertex(name, Kind::Latent)
    }

    pub fn edge(mut self, x: &str, mark_x: Mark, mark_y: Mark, y: &str) -> Self {
        self.edges.push(BuilderEdge {
            x: x.to_string(),
            y: y.to_string(),
            mark_x,
            mark_y,
            hidden: false,
        });
        self
    }

    /// `x -> y`
    pub fn directed(self, x: &str, y: &str) -> Self {
        self.edge(x, Mark::Tail, Mark::Arrow, y)
    }

    /// `x <-> y`
    pub fn bidirected(self, x: &str, y: &str) -> Self {
        self.edge(x, Mark::Arrow, Mark::Arrow, y)
    }

    /// Hidden `x -> y` (expansions only).
    pub fn hidden(mut self, x: &str, y: &str) -> Self {
        self = self.directed(x, y);
        self.edges.last_mut().unwrap().hidden = true;
        self
    }

    pub fn noncollider(mut self, x: &str, center: &str, y: &str) -> Self {
        self.noncolliders
            .push((x.to_string(), center.to_string(), y.to_string()));
        self
    }

    pub fn has_vertex(&self, name: &str) -> bool {
        self.vertices.iter().any(|v| v.name == name)
    }

    pub fn build(self) -> Result<MixedGraph> {
        let mut vertices = self.vertices;
        vertices.sort_by(|a, b| a.name.cmp(&b.name));
        for w in vertices.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::DuplicateVertex(w[0].name.clone()));
            }
        }
        if let Some(v) = vertices.iter().find(|v| v.name.is_empty()) {
            return Err(Error::pre(format!("empty vertex name ({:?})", v.kind)));
        }
        if vertices.len() > MAX_VERTICES {
            return Err(Error::BoundExceeded {
                what: "vertex",
                limit: MAX_VERTICES,
                actual: vertices.len(),
            });
        }
        let index: BTreeMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };

        let mut edges = Vec::with_capacity(self.edges.len());
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            let x = lookup(&e.x)?;
            let y = lookup(&e.y)?;
            if x == y {
                return Err(Error::SelfLoop(e.x.clone()));
            }
            let edge = if x < y {
                Edge { u: x, v: y, mark_u: e.mark_x, mark_v: e.mark_y, hidden: e.hidden }
            } else {
                Edge { u: y, v: x, mark_u: e.mark_y, mark_v: e.mark_x, hidden: e.hidden }
            };
            if !seen.insert((edge.u, edge.v)) {
                return Err(Error::DuplicateEdge(
                    vertices[edge.u].name.clone(),
                    vertices[edge.v].name.clone(),
                ));
            }
            edges.push(edge);
        }
        edges.sort_by_key(|e| (e.u, e.v));

        let mut noncolliders = Vec::new();
        for (x, c, y) in &self.noncolliders {
            let (x, c, y) = (lookup(x)?, lookup(c)?, lookup(y)?);
            if x == y || x == c || c == y {
                return Err(Error::role("mdg", "noncollider needs three distinct vertices"));
            }
            noncolliders.push([x.min(y), c, x.max(y)]);
        }
        noncolliders.sort();
        noncolliders.dedup();

        let mut incident = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            incident[e.u].push(k);
            incident[e.v].push(k);
        }
        let g = MixedGraph {
            role: self.role,
            vertices,
            edges,
            noncolliders,
            incident,
        };
        g.validate()?;
        Ok(g)
    }
}

/// Every `u` with a directed path `u -> ... -> v`, `v` included. Only
/// tail-arrow edges count.
pub fn ancestors(g: &MixedGraph, v: &str) -> Result<BTreeSet<String>> {
    let i = g.require(v)?;
    let anc = g.ancestor_masks();
    Ok(bits::members(anc[i]).map(|a| g.name(a).to_string()).collect())
}

/// True iff the tail-arrow edges contain no directed cycle.
pub fn is_acyclic_directed(g: &MixedGraph) -> bool {
    bits::acyclic(&g.parent_masks())
}

/// Every simple path between `a` and `b`, ignoring marks, sorted
/// lexicographically by vertex names.
pub fn enumerate_simple_paths(g: &MixedGraph, a: &str, b: &str) -> Result<Vec<Path>> {
    let ia = g.require(a)?;
    let ib = g.require(b)?;
    if ia == ib {
        return Err(Error::pre("path endpoints must differ"));
    }
    let mut out = Vec::new();
    let mut stack = vec![ia];
    simple_paths_from(g, ib, &mut stack, bit(ia), &mut out);
    let mut paths: Vec<Path> = out
        .into_iter()
        .map(|p| Path {
            vertices: p.into_iter().map(|i| g.name(i).to_string()).collect(),
        })
        .collect();
    paths.sort();
    Ok(paths)
}

fn simple_paths_from(
    g: &MixedGraph,
    target: usize,
    stack: &mut Vec<usize>,
    visited: Bits,
    out: &mut Vec<Vec<usize>>,
) {
    let cur = *stack.last().unwrap();
    for e in g.incident(cur) {
        let w = e.other(cur);
        if bits::has(visited, w) {
            continue;
        }
        stack.push(w);
        if w == target {
            out.push(stack.clone());
        } else {
            simple_paths_from(g, target, stack, visited | bit(w), out);
        }
        stack.pop();
    }
}
