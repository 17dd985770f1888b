//! Marginal dependency graphs, semi-Markov equivalence and Pearl's edge
//! rules for models with correlated errors.
//!
//! Equivalence itself is decided by comparing d-separation signatures. MDG
//! extraction comes in two flavours: `Tetrad` runs the triple test and two
//! propagation rules, `Exact` keeps every completion of the skeleton that
//! some expansion realises with the model's signature and reports their
//! common marks.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use itertools::Itertools;

use crate::bits::{self, bit, has, members, Bits};
use crate::calculus::{common_marks, completion_marks, Ipg, Mdg};
use crate::construction::expansion_models;
use crate::error::{Error, Result};
use crate::graph::{Mark, MixedGraph, Role};
use crate::model::{CausalModel, Marks, Model};
use crate::separation::{ipg_marks, ipg_of, signature_of_model, signature_queries, separated, Signature, SignatureEntry};
use crate::{fixtures, Bounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdgMode {
    Tetrad,
    Exact,
}

impl FromStr for MdgMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tetrad" => Ok(MdgMode::Tetrad),
            "exact" => Ok(MdgMode::Exact),
            _ => Err(Error::pre(format!("unknown MDG mode `{s}`"))),
        }
    }
}

fn skeleton_graph(names: &[String], adj: &[Bits], marks: impl Fn(usize, usize) -> Mark) -> crate::graph::GraphBuilder {
    let mut b = MixedGraph::builder(Role::Mdg);
    for name in names {
        b = b.observable(name);
    }
    for i in 0..adj.len() {
        for j in members(adj[i]).filter(|&j| j > i) {
            b = b.edge(&names[i], marks(i, j), marks(j, i), &names[j]);
        }
    }
    b
}

fn unshielded_triples(adj: &[Bits]) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for c in 0..adj.len() {
        for (a, b) in members(adj[c]).tuple_combinations() {
            if !has(adj[a], b) {
                out.push([a, c, b]);
            }
        }
    }
    out.sort();
    out
}

/// Collider test on the marginal: `b` is a collider between `a` and `c`
/// iff no `Z` over the other observables makes `a` and `c` d-separated by
/// `{b} ∪ Z`.
fn separable_through(m: &Model, a: usize, b: usize, c: usize) -> bool {
    let anc = m.ancestors();
    let children = m.children();
    let rest = m.observed_mask() & !bit(a) & !bit(b) & !bit(c);
    bits::subsets(rest).any(|z| separated(&m.parents, &children, &anc, z | bit(b), a, c))
}

fn tetrad_mdg(m: &Model) -> Result<Mdg> {
    let n = m.n_obs;
    let ipg = ipg_marks(m);
    let adj = ipg.adj.clone();
    // 0 circle, 1 tail, 2 arrow, indexed [at][other]
    let mut mark = vec![vec![0u8; n]; n];
    let mut colliders = Vec::new();
    let mut noncolliders = Vec::new();
    for t in unshielded_triples(&adj) {
        if separable_through(m, t[0], t[1], t[2]) {
            noncolliders.push(t);
        } else {
            colliders.push(t);
        }
    }
    loop {
        let before = mark.clone();
        // P1
        for &[a, c, b] in &colliders {
            mark[c][a] = 2;
            mark[c][b] = 2;
        }
        // P2
        for &[a, c, b] in &noncolliders {
            for (x, y) in [(a, b), (b, a)] {
                if mark[c][x] == 2 && mark[c][y] == 0 && mark[y][c] != 1 {
                    mark[c][y] = 1;
                }
            }
        }
        if mark == before {
            break;
        }
    }
    let mut b = skeleton_graph(&m.names[..n], &adj, |at, other| match mark[at][other] {
        0 => Mark::Circle,
        1 => Mark::Tail,
        _ => Mark::Arrow,
    });
    for &[a, c, d] in &noncolliders {
        b = b.noncollider(&m.names[a], &m.names[c], &m.names[d]);
    }
    Mdg::new(b.build()?)
}

fn exact_mdg(m: &Model, bounds: &Bounds) -> Result<Mdg> {
    let n = m.n_obs;
    let names = &m.names[..n];
    let ipg = ipg_marks(m);
    let edges: usize = ipg.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2;
    bounds.check_circles(2 * edges)?;
    let target = signature_of_model(m);
    let open = skeleton_graph(names, &ipg.adj, |_, _| Mark::Circle).build()?;
    let kept = completion_marks(&open, |c| {
        expansion_models(c, names).iter().any(|(_, e)| signature_of_model(e) == target)
    });
    if kept.is_empty() {
        return Err(Error::Inconsistent("no completion of the skeleton reproduces the signature".into()));
    }
    let ipgs = kept
        .iter()
        .map(|c| Ipg::new(c.to_graph(names, Role::Ipg)?))
        .collect::<Result<Vec<_>>>()?;
    common_marks(&ipgs)
}

/// The marginal dependency graph of `m`.
pub fn mdg_of(m: &CausalModel, mode: MdgMode, bounds: &Bounds) -> Result<Mdg> {
    let c = Model::from_graph(m);
    bounds.check_observables(c.n_obs)?;
    match mode {
        MdgMode::Tetrad => tetrad_mdg(&c),
        MdgMode::Exact => exact_mdg(&c, bounds),
    }
}

/// Result of comparing two models over the same observables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// First signature entry, in canonical order, on which the models differ.
    pub witness: Option<SignatureEntry>,
    /// Whether both models yield the same MDG in the chosen mode.
    pub mdg_agreement: bool,
}

pub(crate) fn signature_of(m: &CausalModel, bounds: &Bounds) -> Result<Signature> {
    crate::separation::d_separation_signature(m, bounds)
}

/// Semi-Markov equivalence by signature comparison, with MDG agreement in
/// `mode` reported alongside.
pub fn semi_markov_equivalent(
    m1: &CausalModel,
    m2: &CausalModel,
    mode: MdgMode,
    bounds: &Bounds,
) -> Result<EquivalenceVerdict> {
    if m1.observable_names() != m2.observable_names() {
        return Err(Error::ObservableMismatch);
    }
    let (s1, s2) = (signature_of(m1, bounds)?, signature_of(m2, bounds)?);
    let witness = s1.first_difference(&s2);
    let mdg_agreement = mdg_of(m1, mode, bounds)? == mdg_of(m2, mode, bounds)?;
    Ok(EquivalenceVerdict { equivalent: witness.is_none(), witness, mdg_agreement })
}

/// Number of signature entries for `n` observables.
pub fn signature_size(n: usize) -> usize {
    signature_queries(n).len()
}

/// A [`MixedGraph`] with role `pearl`: observables joined by directed edges
/// and `<->` correlated errors, directed part acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PearlModel(MixedGraph);

impl PearlModel {
    pub fn new(g: MixedGraph) -> Result<PearlModel> {
        if g.role() != Role::Pearl {
            return Err(Error::role("pearl", format!("got a {} graph", g.role())));
        }
        Ok(PearlModel(g))
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_graph(self) -> MixedGraph {
        self.0
    }
}

impl Deref for PearlModel {
    type Target = MixedGraph;
    fn deref(&self) -> &MixedGraph {
        &self.0
    }
}

impl TryFrom<MixedGraph> for PearlModel {
    type Error = Error;
    fn try_from(g: MixedGraph) -> Result<Self> {
        PearlModel::new(g)
    }
}

/// Replaces every correlated error `A <-> B` by a latent `K_A_B -> A, B`.
pub fn pearl_to_dag(pm: &PearlModel) -> Result<CausalModel> {
    let m = Marks::from_graph(pm);
    let names = pm.observable_names();
    let mut c = Model { names: names.clone(), n_obs: names.len(), parents: m.directed_parents(), hidden: vec![0; names.len()] };
    let bidir = m.bidirected();
    for a in 0..names.len() {
        for b in members(bidir[a]).filter(|&b| b > a) {
            let k = c.fresh_latent(&format!("K_{}_{}", names[a], names[b]));
            c.add_edge(k, a);
            c.add_edge(k, b);
        }
    }
    c.to_causal()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    One,
    Two,
    OnePrime,
    TwoPrime,
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Rule::One),
            "2" => Ok(Rule::Two),
            "1p" | "1'" => Ok(Rule::OnePrime),
            "2p" | "2'" => Ok(Rule::TwoPrime),
            _ => Err(Error::pre(format!("unknown rule `{s}` (expected 1, 2, 1p or 2p)"))),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::One => "1",
            Rule::Two => "2",
            Rule::OnePrime => "1p",
            Rule::TwoPrime => "2p",
        })
    }
}

/// Neighbourhoods of a Pearl model: `pa[v]` directed parents, `ch[v]`
/// children, `nb[v]` vertices joined to `v` by `<->`.
struct Hood {
    pa: Vec<Bits>,
    ch: Vec<Bits>,
    nb: Vec<Bits>,
    adj: Vec<Bits>,
}

impl Hood {
    fn of(m: &Marks) -> Hood {
        let pa = m.directed_parents();
        let mut ch = vec![0; m.n()];
        for (v, &p) in pa.iter().enumerate() {
            for u in members(p) {
                ch[u] |= bit(v);
            }
        }
        Hood { pa, ch, nb: m.bidirected(), adj: m.adj.clone() }
    }

    fn all_in(&self, set: Bits, within: Bits) -> bool {
        set & !within == 0
    }

    fn all_adjacent(&self, set: Bits, y: usize) -> bool {
        self.all_in(set, self.adj[y])
    }
}

/// The designated edge `x -> y`, or `x <-> y` for the reverse use of rules
/// 1 and 1p.
fn edge_form(m: &Marks, x: usize, y: usize, rule: Rule) -> Result<bool> {
    if !has(m.adj[x], y) {
        return Err(Error::pre("no edge between the designated vertices"));
    }
    let bidirected = m.arrow_at(x, y) && m.arrow_at(y, x);
    let forward = !m.arrow_at(x, y) && m.arrow_at(y, x);
    match rule {
        Rule::One | Rule::OnePrime if forward || bidirected => Ok(bidirected),
        Rule::Two | Rule::TwoPrime if forward => Ok(false),
        _ => Err(Error::pre(format!("rule {rule} needs a directed edge x -> y"))),
    }
}

fn check(m: &Marks, x: usize, y: usize, rule: Rule) -> Result<bool> {
    edge_form(m, x, y, rule)?;
    let h = Hood::of(m);
    let not_xy = !bit(x) & !bit(y);
    Ok(match rule {
        Rule::One => h.all_adjacent((h.nb[x] | h.pa[x]) & not_xy, y),
        Rule::Two => {
            h.all_adjacent((h.nb[y] | h.pa[y]) & not_xy, x) && h.all_adjacent((h.nb[x] | h.pa[x]) & not_xy, y)
        }
        Rule::OnePrime => h.all_in(h.nb[x] & not_xy, h.nb[y]) && h.all_in(h.pa[x] & not_xy, h.pa[y]),
        Rule::TwoPrime => {
            h.all_in(h.nb[y] & not_xy, h.ch[x]) && h.all_in(h.nb[x] & not_xy, h.ch[y]) && h.all_in(h.pa[x], h.pa[y])
        }
    })
}

fn pearl_ids(pm: &PearlModel, x: &str, y: &str) -> Result<(usize, usize)> {
    let (x, y) = (pm.require(x)?, pm.require(y)?);
    if x == y {
        return Err(Error::pre("edge endpoints must differ"));
    }
    Ok((x, y))
}

/// Literal evaluation of the side conditions of `rule` for the edge `x - y`.
pub fn pearl_rule_check(pm: &PearlModel, x: &str, y: &str, rule: Rule) -> Result<bool> {
    let (ix, iy) = pearl_ids(pm, x, y)?;
    check(&Marks::from_graph(pm), ix, iy, rule)
}

pub(crate) fn apply_marks(m: &Marks, x: usize, y: usize, rule: Rule) -> Result<Marks> {
    let bidirected = edge_form(m, x, y, rule)?;
    let mut out = m.clone();
    match rule {
        Rule::One | Rule::OnePrime if bidirected => out.set_edge(x, y, false, true),
        Rule::One | Rule::OnePrime => out.set_edge(x, y, true, true),
        Rule::Two | Rule::TwoPrime => out.set_edge(x, y, true, false),
    }
    Ok(out)
}

/// Applies `rule` to the edge `x - y`: rules 1 and 1p swap `x -> y` and
/// `x <-> y`, rules 2 and 2p reverse `x -> y`. The side conditions must
/// hold; soundness is not checked.
pub fn pearl_apply(pm: &PearlModel, x: &str, y: &str, rule: Rule) -> Result<PearlModel> {
    let (ix, iy) = pearl_ids(pm, x, y)?;
    let m = Marks::from_graph(pm);
    if !check(&m, ix, iy, rule)? {
        return Err(Error::RuleCheckFailed(format!("rule {rule} on {x} - {y}")));
    }
    let out = apply_marks(&m, ix, iy, rule)?;
    if !bits::acyclic(&out.directed_parents()) {
        return Err(Error::Cycle(x.to_string()));
    }
    PearlModel::new(out.to_graph(&pm.observable_names(), Role::Pearl)?)
}

/// The rule-2 counterexample worked end to end.
#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub before: PearlModel,
    pub after: PearlModel,
    pub rule2_applies: bool,
    pub rule2p_applies: bool,
    pub m1: CausalModel,
    pub m2: CausalModel,
    pub ipg1: Ipg,
    pub ipg2: Ipg,
    /// Adjacencies of `ipg2` missing from `ipg1`.
    pub gained: Vec<(String, String)>,
    /// Adjacencies of `ipg1` missing from `ipg2`.
    pub lost: Vec<(String, String)>,
    pub verdict: EquivalenceVerdict,
}

fn adjacencies(g: &MixedGraph) -> Vec<(String, String)> {
    g.edges().iter().map(|e| (g.name(e.u).to_string(), g.name(e.v).to_string())).collect()
}

/// Reverses `C -> D` in `A -> B <-> C`, `B -> D <- C` by rule 2 and shows
/// that the result is not equivalent to the original.
pub fn counterexample_report() -> Result<CounterexampleReport> {
    let before = fixtures::pm_reversal();
    let rule2_applies = pearl_rule_check(&before, "C", "D", Rule::Two)?;
    let rule2p_applies = pearl_rule_check(&before, "C", "D", Rule::TwoPrime)?;
    let after = pearl_apply(&before, "C", "D", Rule::Two)?;
    let m1 = pearl_to_dag(&before)?;
    let m2 = pearl_to_dag(&after)?;
    let ipg1 = ipg_of(&m1, None)?;
    let ipg2 = ipg_of(&m2, None)?;
    let (a1, a2) = (adjacencies(&ipg1), adjacencies(&ipg2));
    let gained = a2.iter().filter(|p| !a1.contains(p)).cloned().collect();
    let lost = a1.iter().filter(|p| !a2.contains(p)).cloned().collect();
    let verdict = semi_markov_equivalent(&m1, &m2, MdgMode::Exact, &Bounds::default())?;
    Ok(CounterexampleReport { before, after, rule2_applies, rule2p_applies, m1, m2, ipg1, ipg2, gained, lost, verdict })
}
