//! d-separation, inducing paths and inducing path graphs.
//!
//! Two routes decide d-separation: [`d_separated`] is a reachability search
//! over `(vertex, arrival direction)` states, and [`d_separated_oracle`]
//! checks every simple path against the path-blocking definition. The oracle
//! is the reference; the fast route must agree with it everywhere.

use itertools::Itertools;

use crate::bits::{bit, has, members, Bits};
use crate::calculus::Ipg;
use crate::error::{Error, Result};
use crate::graph::{enumerate_simple_paths, Kind, Mark, MixedGraph, Path};
use crate::model::{CausalModel, Marks, Model};
use crate::Bounds;

/// Whether `v` receives an arrow from both of its neighbours on `p`.
pub fn is_collider_on(g: &MixedGraph, p: &Path, v: &str) -> Result<bool> {
    let k = p
        .vertices
        .iter()
        .position(|x| x == v)
        .ok_or_else(|| Error::pre(format!("`{v}` is not on the path")))?;
    if k == 0 || k + 1 == p.vertices.len() {
        return Err(Error::pre(format!("`{v}` is an endpoint of the path")));
    }
    let c = g.require(v)?;
    let mark_at_c = |other: &str| -> Result<Mark> {
        let o = g.require(other)?;
        g.edge_between(c, o)
            .map(|e| e.mark_at(c))
            .ok_or_else(|| Error::MissingEdge(v.to_string(), other.to_string()))
    };
    Ok(mark_at_c(&p.vertices[k - 1])? == Mark::Arrow
        && mark_at_c(&p.vertices[k + 1])? == Mark::Arrow)
}

fn dsep_query(m: &CausalModel, a: &str, b: &str, w: &[&str]) -> Result<(usize, usize, Bits)> {
    let ia = m.require(a)?;
    let ib = m.require(b)?;
    if ia == ib {
        return Err(Error::pre("d-separation endpoints must differ"));
    }
    let mut mask = 0;
    for x in w {
        let i = m.require(x)?;
        if i == ia || i == ib {
            return Err(Error::pre("conditioning set must exclude the endpoints"));
        }
        mask |= bit(i);
    }
    Ok((ia, ib, mask))
}

/// Reachability-based d-separation of `a` and `b` given `w`.
pub fn d_separated(m: &CausalModel, a: &str, b: &str, w: &[&str]) -> Result<bool> {
    let (ia, ib, mask) = dsep_query(m, a, b, w)?;
    let parents = m.parent_masks();
    let mut children = vec![0; parents.len()];
    for (v, &p) in parents.iter().enumerate() {
        for u in members(p) {
            children[u] |= bit(v);
        }
    }
    let anc = m.ancestor_masks();
    Ok(separated(&parents, &children, &anc, mask, ia, ib))
}

/// Union of the ancestor sets of `w`: the vertices with a descendant in `w`.
pub(crate) fn ancestors_of_set(anc: &[Bits], w: Bits) -> Bits {
    members(w).fold(0, |acc, x| acc | anc[x])
}

/// Bayes-ball style reachability. A state is a vertex plus whether it was
/// entered along an edge pointing into it (`down`) or out of it (`up`).
pub(crate) fn separated(
    parents: &[Bits],
    children: &[Bits],
    anc: &[Bits],
    w: Bits,
    a: usize,
    b: usize,
) -> bool {
    let open_colliders = ancestors_of_set(anc, w);
    let mut seen_up: Bits = 0;
    let mut seen_down: Bits = 0;
    let mut stack = vec![(a, false)];
    seen_up |= bit(a);
    while let Some((v, down)) = stack.pop() {
        if v == b {
            return false;
        }
        let blocked = has(w, v);
        let mut push = |set: Bits, to_down: bool, stack: &mut Vec<(usize, bool)>| {
            for x in members(set) {
                let seen = if to_down { &mut seen_down } else { &mut seen_up };
                if !has(*seen, x) {
                    *seen |= bit(x);
                    stack.push((x, to_down));
                }
            }
        };
        if down {
            if !blocked {
                push(children[v], true, &mut stack);
            }
            if has(open_colliders, v) {
                push(parents[v], false, &mut stack);
            }
        } else if !blocked {
            push(parents[v], false, &mut stack);
            push(children[v], true, &mut stack);
        }
    }
    true
}

/// d-separation by enumerating every simple path and applying the
/// path-blocking definition verbatim.
pub fn d_separated_oracle(m: &CausalModel, a: &str, b: &str, w: &[&str]) -> Result<bool> {
    let (_, _, mask) = dsep_query(m, a, b, w)?;
    let anc = m.ancestor_masks();
    let has_descendant_in_w = ancestors_of_set(&anc, mask);
    for p in enumerate_simple_paths(m, a, b)? {
        let mut open = true;
        for v in &p.vertices[1..p.vertices.len() - 1] {
            let i = m.require(v)?;
            if is_collider_on(m, &p, v)? {
                open &= has(has_descendant_in_w, i);
            } else {
                open &= !has(mask, i);
            }
        }
        if open {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every d-separation fact among the observables of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    observables: Vec<String>,
    /// Entries in canonical order: pairs lexicographically, then conditioning
    /// sets by size and then lexicographically.
    entries: Vec<bool>,
}

/// One fact of a [`Signature`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureEntry {
    pub a: String,
    pub b: String,
    pub given: Vec<String>,
    pub separated: bool,
}

impl std::fmt::Display for SignatureEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} _||_ {} | {{{}}}", self.a, self.b, self.given.join(", "))
    }
}

/// Conditioning sets over `n` observables in signature order, per pair.
pub(crate) fn signature_queries(n: usize) -> Vec<(usize, usize, Bits)> {
    let mut out = Vec::new();
    for (a, b) in (0..n).tuple_combinations() {
        let rest: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();
        for k in 0..=rest.len() {
            for combo in rest.iter().combinations(k) {
                out.push((a, b, combo.into_iter().fold(0, |acc, &x| acc | bit(x))));
            }
        }
    }
    out
}

impl Signature {
    pub fn observables(&self) -> &[String] {
        &self.observables
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = SignatureEntry> + '_ {
        signature_queries(self.observables.len())
            .into_iter()
            .zip(self.entries.iter())
            .map(|((a, b, w), &separated)| SignatureEntry {
                a: self.observables[a].clone(),
                b: self.observables[b].clone(),
                given: members(w).map(|x| self.observables[x].clone()).collect(),
                separated,
            })
    }

    /// Looks up one fact; the pair may be given in either order.
    pub fn separated(&self, a: &str, b: &str, given: &[&str]) -> Option<bool> {
        let idx = |x: &str| self.observables.iter().position(|o| o == x);
        let (mut ia, mut ib) = (idx(a)?, idx(b)?);
        if ia > ib {
            std::mem::swap(&mut ia, &mut ib);
        }
        let mut w = 0;
        for g in given {
            w |= bit(idx(g)?);
        }
        signature_queries(self.observables.len())
            .iter()
            .position(|&q| q == (ia, ib, w))
            .map(|k| self.entries[k])
    }

    /// First entry, in canonical order, on which the two signatures differ.
    pub fn first_difference(&self, other: &Signature) -> Option<SignatureEntry> {
        if self.observables != other.observables {
            return None;
        }
        let k = self.entries.iter().zip(&other.entries).position(|(x, y)| x != y)?;
        self.entries().nth(k)
    }
}

pub(crate) fn signature_of_model(m: &Model) -> Vec<bool> {
    let anc = m.ancestors();
    let children = m.children();
    signature_queries(m.n_obs)
        .into_iter()
        .map(|(a, b, w)| separated(&m.parents, &children, &anc, w, a, b))
        .collect()
}

/// The complete d-separation table over observable pairs and observable
/// conditioning sets.
pub fn d_separation_signature(m: &CausalModel, bounds: &Bounds) -> Result<Signature> {
    let n = m.observables().count();
    if n < 2 {
        return Err(Error::pre("a signature needs at least two observables"));
    }
    bounds.check_observables(n)?;
    let model = Model::from_graph(m);
    Ok(Signature {
        observables: model.names[..model.n_obs].to_vec(),
        entries: signature_of_model(&model),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InducingClassification {
    pub exists: bool,
    pub into_a: bool,
    pub into_b: bool,
}

/// Inducing-path search between `a` and `b` relative to the vertex set `s`.
///
/// Explores simple paths depth first and abandons a prefix as soon as an
/// interior vertex breaks the conditions: a member of `s` that is not a
/// collider, or a collider that is not an ancestor of `a` or `b`. Returns
/// whether some qualifying path is into `a`, and whether one is into `b`.
/// The relation need not be acyclic.
pub(crate) fn inducing_flags(
    parents: &[Bits],
    children: &[Bits],
    anc: &[Bits],
    s: Bits,
    a: usize,
    b: usize,
) -> (bool, bool) {
    let ok_collider: Bits = (0..parents.len())
        .filter(|&v| has(anc[a], v) || has(anc[b], v))
        .fold(0, |acc, v| acc | bit(v));
    let mut flags = (false, false);
    let ctx = Search { parents, children, s, ok_collider, a, b };
    ctx.walk(a, false, false, bit(a), &mut flags);
    flags
}

struct Search<'a> {
    parents: &'a [Bits],
    children: &'a [Bits],
    s: Bits,
    ok_collider: Bits,
    a: usize,
    b: usize,
}

impl Search<'_> {
    fn walk(&self, cur: usize, arrived_arrow: bool, into_a: bool, visited: Bits, flags: &mut (bool, bool)) {
        // neighbours reached through an edge pointing into `cur`, then out of it
        for (set, arrow_at_cur) in [(self.parents[cur], true), (self.children[cur], false)] {
            for w in members(set & !visited) {
                if flags.0 && flags.1 {
                    return;
                }
                if cur != self.a {
                    let collider = arrived_arrow && arrow_at_cur;
                    if collider {
                        if !has(self.ok_collider, cur) {
                            continue;
                        }
                    } else if has(self.s, cur) {
                        continue;
                    }
                }
                let first = if cur == self.a { arrow_at_cur } else { into_a };
                let arrow_at_w = !arrow_at_cur;
                if w == self.b {
                    flags.0 |= first;
                    flags.1 |= arrow_at_w;
                } else {
                    self.walk(w, arrow_at_w, first, visited | bit(w), flags);
                }
            }
        }
    }
}

fn inducing_query(m: &CausalModel, s: &[&str], a: &str, b: &str) -> Result<(usize, usize, Bits)> {
    let ia = m.require(a)?;
    let ib = m.require(b)?;
    if ia == ib {
        return Err(Error::pre("inducing path endpoints must differ"));
    }
    let mut mask = 0;
    for x in s {
        let i = m.require(x)?;
        if m.kind(i) != Kind::Observable {
            return Err(Error::pre(format!("`{x}` in S is not observable")));
        }
        mask |= bit(i);
    }
    if !has(mask, ia) || !has(mask, ib) {
        return Err(Error::pre("both endpoints must belong to S"));
    }
    Ok((ia, ib, mask))
}

/// Whether an inducing path relative to `s` joins `a` and `b`, and at which
/// ends such paths arrive with an arrow.
pub fn classify_inducing(m: &CausalModel, s: &[&str], a: &str, b: &str) -> Result<InducingClassification> {
    let (ia, ib, mask) = inducing_query(m, s, a, b)?;
    let parents = m.parent_masks();
    let mut children = vec![0; parents.len()];
    for (v, &p) in parents.iter().enumerate() {
        for u in members(p) {
            children[u] |= bit(v);
        }
    }
    let anc = m.ancestor_masks();
    let (into_a, into_b) = inducing_flags(&parents, &children, &anc, mask, ia, ib);
    Ok(InducingClassification { exists: into_a || into_b, into_a, into_b })
}

/// Inducing path graph marks of a compact model over its observables.
pub(crate) fn ipg_marks(m: &Model) -> Marks {
    let anc = m.ancestors();
    ipg_marks_with(m, &m.children(), &anc)
}

pub(crate) fn ipg_marks_with(m: &Model, children: &[Bits], anc: &[Bits]) -> Marks {
    let s = m.observed_mask();
    let mut marks = Marks::empty(m.n_obs);
    for (a, b) in (0..m.n_obs).tuple_combinations() {
        let (into_a, into_b) = inducing_flags(&m.parents, children, anc, s, a, b);
        if into_a || into_b {
            marks.set_edge(a, b, into_a, into_b);
        }
    }
    marks
}

/// The inducing path graph of `m` over `s` (all observables when `None`).
pub fn ipg_of(m: &CausalModel, s: Option<&[&str]>) -> Result<Ipg> {
    let model = Model::from_graph(m);
    let Some(s) = s else {
        let marks = ipg_marks(&model);
        return Ipg::new(marks.to_graph(&model.names, crate::graph::Role::Ipg)?);
    };
    if s.is_empty() {
        return Err(Error::pre("S must contain at least one vertex"));
    }
    let mut sorted: Vec<&str> = s.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut b = MixedGraph::builder(crate::graph::Role::Ipg);
    for x in &sorted {
        b = b.observable(x);
    }
    for (x, y) in sorted.iter().tuple_combinations() {
        let c = classify_inducing(m, &sorted, x, y)?;
        if c.exists {
            let mark = |into: bool| if into { Mark::Arrow } else { Mark::Tail };
            b = b.edge(x, mark(c.into_a), mark(c.into_b), y);
        }
    }
    Ipg::new(b.build()?)
}

/// Cross-checks the inducing-path search against the separator
/// characterisation: `true` iff "an inducing path exists" coincides with "no
/// subset of `s` minus the endpoints d-separates them".
pub fn inducing_iff_no_separator_check(m: &CausalModel, s: &[&str], a: &str, b: &str) -> Result<bool> {
    let exists = classify_inducing(m, s, a, b)?.exists;
    let rest: Vec<&str> = s.iter().copied().filter(|x| *x != a && *x != b).collect();
    let mut separable = false;
    for k in 0..=rest.len() {
        for w in rest.iter().copied().combinations(k) {
            if d_separated(m, a, b, &w)? {
                separable = true;
                break;
            }
        }
        if separable {
            break;
        }
    }
    Ok(exists == !separable)
}
