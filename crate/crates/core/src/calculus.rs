//! Closure rules on inducing path graphs, validity, completions of marginal
//! dependency graphs and common-mark extraction.
//!
//! Endpoint marks follow one convention throughout: an IPG edge carries an
//! arrow at `X` iff some inducing path for the pair is into `X`, and a tail
//! iff none is. Under that reading the two closure rules demand:
//!
//! * R1: `A -> B`, `B <-> C` and `B` an ancestor of `C` demand an edge
//!   `A - C` with an arrow at `C`;
//! * R2: a path of `<->` edges from `A` to `B` whose vertices are all
//!   ancestors of `A` or `B` demands `A <-> B`.
//!
//! Ancestry is always taken inside the graph itself, along `->` edges.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::ops::Deref;

use itertools::Itertools;

use crate::bits::{self, bit, has, members, Bits};
use crate::error::{Error, Result};
use crate::graph::{Mark, MixedGraph, Role};
use crate::model::Marks;
use crate::Bounds;

/// A [`MixedGraph`] with role `ipg` whose directed part is acyclic.
///
/// Closure under R1/R2 is not part of the type; see [`is_valid_ipg`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ipg(MixedGraph);

impl Ipg {
    pub fn new(g: MixedGraph) -> Result<Ipg> {
        if g.role() != Role::Ipg {
            return Err(Error::role("ipg", format!("got a {} graph", g.role())));
        }
        if !crate::graph::is_acyclic_directed(&g) {
            return Err(Error::Cycle(first_cycle_vertex(&g)));
        }
        Ok(Ipg(g))
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}

impl Deref for Ipg {
    type Target = MixedGraph;
    fn deref(&self) -> &MixedGraph {
        &self.0
    }
}

impl TryFrom<MixedGraph> for Ipg {
    type Error = Error;
    fn try_from(g: MixedGraph) -> Result<Self> {
        Ipg::new(g)
    }
}

/// A [`MixedGraph`] with role `mdg`: circles mark orientations not shared by
/// every represented IPG; noncollider triples live on the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdg(MixedGraph);

impl Mdg {
    pub fn new(g: MixedGraph) -> Result<Mdg> {
        if g.role() != Role::Mdg {
            return Err(Error::role("mdg", format!("got a {} graph", g.role())));
        }
        Ok(Mdg(g))
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }

    pub fn circle_count(&self) -> usize {
        self.0
            .edges()
            .iter()
            .map(|e| (e.mark_u == Mark::Circle) as usize + (e.mark_v == Mark::Circle) as usize)
            .sum()
    }
}

impl Deref for Mdg {
    type Target = MixedGraph;
    fn deref(&self) -> &MixedGraph {
        &self.0
    }
}

impl TryFrom<MixedGraph> for Mdg {
    type Error = Error;
    fn try_from(g: MixedGraph) -> Result<Self> {
        Mdg::new(g)
    }
}

fn first_cycle_vertex(g: &MixedGraph) -> String {
    let parents = g.parent_masks();
    let anc = bits::ancestor_closure(&parents);
    (0..g.len())
        .find(|&v| members(parents[v]).any(|p| has(anc[p], v)))
        .map(|v| g.name(v).to_string())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    R1,
    R2,
}

/// An edge demanded by one rule instance.
///
/// For R1, `x -> y` is demanded with the arrow at `y` and `witness` is the
/// triple `[A, B, C]`. For R2, `x <-> y` is demanded and `witness` is the
/// bidirected path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Requirement {
    pub rule: Rule,
    pub x: String,
    pub y: String,
    pub witness: Vec<String>,
}

impl Requirement {
    pub fn bidirected(&self) -> bool {
        self.rule == Rule::R2
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Rule::R1 => write!(
                f,
                "R1: {} -> {} <-> {} with {} an ancestor of {} demands {} -> {}",
                self.witness[0], self.witness[1], self.witness[2], self.witness[1],
                self.witness[2], self.x, self.y
            ),
            Rule::R2 => write!(
                f,
                "R2: bidirected path {} through ancestors demands {} <-> {}",
                self.witness.join(" <-> "),
                self.x,
                self.y
            ),
        }
    }
}

/// Compact demand: arrow at `y` (R1) or at both ends (R2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Demand {
    pub rule: Rule,
    pub x: usize,
    pub y: usize,
    pub witness: Vec<usize>,
}

pub(crate) fn r1_demands(m: &Marks) -> Vec<Demand> {
    let parents = m.directed_parents();
    let anc = bits::ancestor_closure(&parents);
    let bidir = m.bidirected();
    let mut out = Vec::new();
    for b in 0..m.n() {
        for a in members(parents[b]) {
            for c in members(bidir[b]) {
                if c != a && has(anc[c], b) {
                    out.push(Demand { rule: Rule::R1, x: a, y: c, witness: vec![a, b, c] });
                }
            }
        }
    }
    out
}

pub(crate) fn r2_demands(m: &Marks) -> Vec<Demand> {
    let parents = m.directed_parents();
    let anc = bits::ancestor_closure(&parents);
    let bidir = m.bidirected();
    let mut out = Vec::new();
    for (a, b) in (0..m.n()).tuple_combinations() {
        let allowed = (anc[a] | anc[b]) & !bit(a) & !bit(b);
        // breadth-first over interior vertices; `prev` rebuilds the path
        let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for v in members(bidir[a] & allowed) {
            prev.insert(v, a);
            queue.push_back(v);
        }
        let mut end = None;
        while let Some(v) = queue.pop_front() {
            if has(bidir[v], b) {
                end = Some(v);
                break;
            }
            for w in members(bidir[v] & allowed) {
                if let std::collections::btree_map::Entry::Vacant(slot) = prev.entry(w) {
                    slot.insert(v);
                    queue.push_back(w);
                }
            }
        }
        if let Some(mut v) = end {
            let mut path = vec![b, v];
            while v != a {
                v = prev[&v];
                path.push(v);
            }
            path.reverse();
            out.push(Demand { rule: Rule::R2, x: a, y: b, witness: path });
        }
    }
    out
}

fn to_requirements(g: &MixedGraph, demands: Vec<Demand>) -> Vec<Requirement> {
    let mut out: Vec<Requirement> = demands
        .into_iter()
        .map(|d| Requirement {
            rule: d.rule,
            x: g.name(d.x).to_string(),
            y: g.name(d.y).to_string(),
            witness: d.witness.iter().map(|&i| g.name(i).to_string()).collect(),
        })
        .collect();
    out.sort();
    out.dedup_by(|a, b| a.rule == b.rule && a.x == b.x && a.y == b.y);
    out
}

fn require_ipg_shape(g: &MixedGraph) -> Result<()> {
    if g.role() != Role::Ipg {
        return Err(Error::pre(format!("expected an ipg graph, got {}", g.role())));
    }
    Ok(())
}

/// Edges demanded by one application of R1, satisfied or not.
pub fn r1_consequences(g: &MixedGraph) -> Result<Vec<Requirement>> {
    require_ipg_shape(g)?;
    Ok(to_requirements(g, r1_demands(&Marks::from_graph(g))))
}

/// Edges demanded by one application of R2 over all bidirected paths.
pub fn r2_consequences(g: &MixedGraph) -> Result<Vec<Requirement>> {
    require_ipg_shape(g)?;
    Ok(to_requirements(g, r2_demands(&Marks::from_graph(g))))
}

pub(crate) fn demand_satisfied(m: &Marks, d: &Demand) -> bool {
    has(m.adj[d.x], d.y)
        && m.arrow_at(d.y, d.x)
        && (d.rule == Rule::R1 || m.arrow_at(d.x, d.y))
}

/// True iff every R1/R2 demand already holds in `m`.
pub(crate) fn is_closed(m: &Marks) -> bool {
    r1_demands(m).iter().all(|d| demand_satisfied(m, d))
        && r2_demands(m).iter().all(|d| demand_satisfied(m, d))
}

fn describe(g: &MixedGraph, d: &Demand) -> String {
    to_requirements(g, vec![d.clone()])[0].to_string()
}

/// Applies R1 and R2 until nothing changes.
///
/// Missing edges are added. An edge added here starts with a tail at the end
/// no rule has yet asked for, and that tail may later become an arrow. A
/// demand that contradicts a mark of an input edge, or an addition that
/// closes a directed cycle, is a conflict.
pub fn closure(g: &MixedGraph) -> Result<Ipg> {
    require_ipg_shape(g)?;
    let mut m = Marks::from_graph(g);
    let original = m.clone();
    loop {
        let demands: Vec<Demand> = r1_demands(&m).into_iter().chain(r2_demands(&m)).collect();
        let mut changed = false;
        for d in &demands {
            if demand_satisfied(&m, d) {
                continue;
            }
            let fixed_edge = has(original.adj[d.x], d.y);
            if fixed_edge {
                return Err(Error::Conflict(format!(
                    "{} but the existing edge has a tail there",
                    describe(g, d)
                )));
            }
            let arrow_x = d.rule == Rule::R2 || (has(m.adj[d.x], d.y) && m.arrow_at(d.x, d.y));
            m.set_edge(d.x, d.y, arrow_x, true);
            changed = true;
        }
        if !bits::acyclic(&m.directed_parents()) {
            return Err(Error::Conflict("closure creates a directed cycle".into()));
        }
        if !changed {
            break;
        }
    }
    let names: Vec<String> = g.vertices().iter().map(|v| v.name.clone()).collect();
    Ipg::new(m.to_graph(&names, Role::Ipg)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongRole(Role),
    DirectedCycle(String),
    Unsatisfied(Requirement),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongRole(r) => write!(f, "expected an ipg graph, got {r}"),
            Violation::DirectedCycle(v) => write!(f, "directed cycle through {v}"),
            Violation::Unsatisfied(req) => write!(f, "{req}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpgDiagnosis {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Whether `g` is an acyclic, R1/R2-closed inducing path graph, with every
/// violated rule instance listed.
pub fn is_valid_ipg(g: &MixedGraph) -> IpgDiagnosis {
    let mut violations = Vec::new();
    if g.role() != Role::Ipg {
        violations.push(Violation::WrongRole(g.role()));
        return IpgDiagnosis { valid: false, violations };
    }
    if !crate::graph::is_acyclic_directed(g) {
        violations.push(Violation::DirectedCycle(first_cycle_vertex(g)));
    }
    let m = Marks::from_graph(g);
    let unmet: Vec<Demand> = r1_demands(&m)
        .into_iter()
        .chain(r2_demands(&m))
        .filter(|d| !demand_satisfied(&m, d))
        .collect();
    violations.extend(to_requirements(g, unmet).into_iter().map(Violation::Unsatisfied));
    IpgDiagnosis { valid: violations.is_empty(), violations }
}

/// Per-endpoint marks of an MDG in compact form.
struct MdgShape {
    edges: Vec<(usize, usize)>,
    /// definite mark at (u, v) ends, `None` for a circle
    marks: Vec<(Option<Mark>, Option<Mark>)>,
    noncolliders: Vec<[usize; 3]>,
}

impl MdgShape {
    fn of(g: &MixedGraph) -> MdgShape {
        let definite = |m: Mark| if m == Mark::Circle { None } else { Some(m) };
        MdgShape {
            edges: g.edges().iter().map(|e| (e.u, e.v)).collect(),
            marks: g.edges().iter().map(|e| (definite(e.mark_u), definite(e.mark_v))).collect(),
            noncolliders: g.noncolliders().to_vec(),
        }
    }
}

/// The three admissible mark pairs of an IPG adjacency, in enumeration order.
const ORIENTATIONS: [(Mark, Mark); 3] =
    [(Mark::Tail, Mark::Arrow), (Mark::Arrow, Mark::Tail), (Mark::Arrow, Mark::Arrow)];

/// Enumerates every assignment of the circles of `g` (role `mdg`) that
/// respects the definite marks and noncollider triples, is acyclic and is
/// closed under R1/R2. Results are in enumeration order (edges in canonical
/// order, each trying `u -> v`, `v -> u`, `u <-> v`).
pub(crate) fn completion_marks(g: &MixedGraph, mut keep: impl FnMut(&Marks) -> bool) -> Vec<Marks> {
    let shape = MdgShape::of(g);
    let mut out = Vec::new();
    let mut m = Marks::empty(g.len());
    let mut parents = vec![0; g.len()];
    // noncollider triples become checkable once both of their edges are set
    let mut triggers: Vec<Vec<[usize; 3]>> = vec![Vec::new(); shape.edges.len()];
    for t in &shape.noncolliders {
        let pos = |x: usize, y: usize| {
            shape.edges.iter().position(|&(u, v)| (u, v) == (x.min(y), x.max(y))).unwrap()
        };
        let last = pos(t[0], t[1]).max(pos(t[1], t[2]));
        triggers[last].push(*t);
    }
    assign(&shape, &triggers, 0, &mut m, &mut parents, &mut out, &mut keep);
    out
}

fn assign(
    shape: &MdgShape,
    triggers: &[Vec<[usize; 3]>],
    k: usize,
    m: &mut Marks,
    parents: &mut Vec<Bits>,
    out: &mut Vec<Marks>,
    keep: &mut dyn FnMut(&Marks) -> bool,
) {
    if k == shape.edges.len() {
        if is_closed(m) && keep(m) {
            out.push(m.clone());
        }
        return;
    }
    let (u, v) = shape.edges[k];
    let (du, dv) = shape.marks[k];
    for (mu, mv) in ORIENTATIONS {
        if du.is_some_and(|d| d != mu) || dv.is_some_and(|d| d != mv) {
            continue;
        }
        m.set_edge(u, v, mu == Mark::Arrow, mv == Mark::Arrow);
        let saved = (parents[u], parents[v]);
        if mu == Mark::Tail {
            parents[v] |= bit(u);
        } else if mv == Mark::Tail {
            parents[u] |= bit(v);
        }
        let ok = bits::acyclic(parents)
            && triggers[k]
                .iter()
                .all(|t| !(m.arrow_at(t[1], t[0]) && m.arrow_at(t[1], t[2])));
        if ok {
            assign(shape, triggers, k + 1, m, parents, out, keep);
        }
        parents[u] = saved.0;
        parents[v] = saved.1;
        m.clear_edge(u, v);
    }
}

/// Every acyclic, R1/R2-closed IPG obtained by resolving the circles of `mdg`.
pub fn completions(mdg: &Mdg, bounds: &Bounds) -> Result<Vec<Ipg>> {
    bounds.check_circles(mdg.circle_count())?;
    let names: Vec<String> = mdg.vertices().iter().map(|v| v.name.clone()).collect();
    completion_marks(mdg, |_| true)
        .into_iter()
        .map(|m| Ipg::new(m.to_graph(&names, Role::Ipg)?))
        .collect()
}

/// Keeps the marks on which all inputs agree and turns the rest into
/// circles. An unshielded triple becomes a noncollider iff no input orients
/// it as a collider.
pub fn common_marks(ipgs: &[Ipg]) -> Result<Mdg> {
    let first = ipgs
        .first()
        .ok_or_else(|| Error::pre("common_marks needs at least one IPG"))?;
    let names: Vec<String> = first.vertices().iter().map(|v| v.name.clone()).collect();
    let marks: Vec<Marks> = ipgs.iter().map(|g| Marks::from_graph(g)).collect();
    for (g, m) in ipgs.iter().zip(&marks).skip(1) {
        let other: Vec<String> = g.vertices().iter().map(|v| v.name.clone()).collect();
        if other != names {
            return Err(Error::SkeletonMismatch("vertex sets differ".into()));
        }
        if m.adj != marks[0].adj {
            return Err(Error::SkeletonMismatch("adjacencies differ".into()));
        }
    }
    let base = &marks[0];
    let n = base.n();
    let mut b = MixedGraph::builder(Role::Mdg);
    for name in &names {
        b = b.observable(name);
    }
    let common = |at: usize, other: usize| {
        let arrow = base.arrow_at(at, other);
        if marks.iter().all(|m| m.arrow_at(at, other) == arrow) {
            if arrow { Mark::Arrow } else { Mark::Tail }
        } else {
            Mark::Circle
        }
    };
    for i in 0..n {
        for j in members(base.adj[i] & !(bit(i + 1) - 1)) {
            b = b.edge(&names[i], common(i, j), common(j, i), &names[j]);
        }
    }
    for c in 0..n {
        for (x, y) in members(base.adj[c]).tuple_combinations() {
            if has(base.adj[x], y) {
                continue;
            }
            if marks.iter().all(|m| !(m.arrow_at(c, x) && m.arrow_at(c, y))) {
                b = b.noncollider(&names[x], &names[c], &names[y]);
            }
        }
    }
    Mdg::new(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, serialize_graph, Format};

    fn ipg(edges: &str) -> MixedGraph {
        parse_graph(&format!("role ipg\nobs A B C D\n{edges}")).unwrap()
    }

    fn mdg(text: &str) -> Mdg {
        Mdg::new(parse_graph(text).unwrap()).unwrap()
    }

    fn pairs(reqs: &[Requirement]) -> Vec<(String, String)> {
        reqs.iter().map(|r| (r.x.clone(), r.y.clone())).collect()
    }

    #[test]
    fn r1_examples() {
        let g = ipg("edge A -> B\nedge B <-> C\nedge B -> D\nedge D -> C");
        assert_eq!(pairs(&r1_consequences(&g).unwrap()), vec![("A".into(), "C".into())]);
        assert!(r1_consequences(&ipg("edge A -> B\nedge B <-> C")).unwrap().is_empty());
        assert!(r1_consequences(&ipg("edge A -> B\nedge B -> C")).unwrap().is_empty());
    }

    #[test]
    fn r2_examples() {
        let g = ipg("edge A <-> B\nedge B <-> C\nedge B -> D\nedge D -> A");
        let r = r2_consequences(&g).unwrap();
        assert_eq!(pairs(&r), vec![("A".into(), "C".into())]);
        assert_eq!(r[0].witness, vec!["A", "B", "C"]);
        assert!(r2_consequences(&ipg("edge A <-> B\nedge B <-> C")).unwrap().is_empty());
        assert!(r2_consequences(&ipg("edge A <-> B")).unwrap().is_empty());
    }

    #[test]
    fn closure_examples() {
        let g = ipg("edge A -> B\nedge B <-> C\nedge B -> D\nedge D -> C");
        let c = closure(&g).unwrap();
        assert_eq!(
            serialize_graph(&c, Format::Native),
            "role ipg\nobs A B C D\nedge A -> B\nedge A -> C\nedge B <-> C\nedge B -> D\nedge D -> C\n"
        );
        assert_eq!(closure(&c).unwrap(), c);

        let chain = ipg("edge A -> B\nedge B -> C");
        assert_eq!(closure(&chain).unwrap().graph(), &chain);

        // R2 demands A <-> C but A -> C is already there
        let bad = ipg("edge A <-> B\nedge B <-> C\nedge B -> D\nedge D -> A\nedge A -> C");
        assert!(matches!(closure(&bad), Err(Error::Conflict(_))));
    }

    #[test]
    fn r1_is_met_by_a_bidirected_edge() {
        let g = ipg("edge A -> B\nedge B <-> C\nedge B -> D\nedge D -> C\nedge A <-> C");
        assert!(is_valid_ipg(&g).valid);
        assert_eq!(closure(&g).unwrap().graph(), &g);
    }

    #[test]
    fn validity_examples() {
        assert!(is_valid_ipg(&ipg("edge A -> B\nedge B -> C")).valid);
        let d = is_valid_ipg(&ipg("edge A -> B\nedge B <-> C\nedge B -> D\nedge D -> C"));
        assert!(!d.valid);
        assert!(matches!(&d.violations[0], Violation::Unsatisfied(r) if r.rule == Rule::R1));
        let d = is_valid_ipg(&ipg("edge A -> B\nedge B -> C\nedge C -> A"));
        assert!(!d.valid);
        assert!(d.violations.iter().any(|v| matches!(v, Violation::DirectedCycle(_))));
    }

    #[test]
    fn completion_counts() {
        let b = Bounds::default();
        let one = mdg("role mdg\nobs A B\nedge A o-o B");
        let c = completions(&one, &b).unwrap();
        let texts: Vec<String> = c.iter().map(|g| serialize_graph(g, Format::Native)).collect();
        assert_eq!(
            texts,
            vec![
                "role ipg\nobs A B\nedge A -> B\n",
                "role ipg\nobs A B\nedge B -> A\n",
                "role ipg\nobs A B\nedge A <-> B\n"
            ]
        );
        let chain = mdg("role mdg\nobs A B C\nedge A o-o B\nedge B o-o C\nnoncollider A B C");
        let c = completions(&chain, &b).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.iter().all(|g| is_valid_ipg(g).valid));

        let fixed = mdg("role mdg\nobs A B C\nedge A -> B\nedge B -> C");
        let c = completions(&fixed, &b).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(serialize_graph(&c[0], Format::Native), "role ipg\nobs A B C\nedge A -> B\nedge B -> C\n");

        let tight = Bounds { max_circles: 3, ..Bounds::default() };
        assert!(matches!(completions(&chain, &tight), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn common_marks_examples() {
        let b = Bounds::default();
        let single = Ipg::new(parse_graph("role ipg\nobs A B\nedge A -> B").unwrap()).unwrap();
        let m = common_marks(&[single]).unwrap();
        assert_eq!(serialize_graph(&m, Format::Native), "role mdg\nobs A B\nedge A -> B\n");

        let one = mdg("role mdg\nobs A B\nedge A o-o B");
        let m = common_marks(&completions(&one, &b).unwrap()).unwrap();
        assert_eq!(m, one);

        let chain = mdg("role mdg\nobs A B C\nedge A o-o B\nedge B o-o C\nnoncollider A B C");
        let m = common_marks(&completions(&chain, &b).unwrap()).unwrap();
        assert_eq!(m, chain);

        let other = Ipg::new(parse_graph("role ipg\nobs A B C\nedge A -> B").unwrap()).unwrap();
        let more = Ipg::new(parse_graph("role ipg\nobs A B C\nedge A -> C").unwrap()).unwrap();
        assert!(matches!(common_marks(&[other, more]), Err(Error::SkeletonMismatch(_))));
        assert!(common_marks(&[]).is_err());
    }
}
