//! Model rewriting: edge removal, vertex collapse, latent embedding and
//! latent connection, plus the searches built on them (expansions,
//! reductions and minimal models).
//!
//! A rewrite is only interesting when it keeps the inducing path graph, so
//! most searches here carry the target IPG and reject any step that changes
//! it.

mod expand;
mod minimal;
mod reduce;

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Kind;
use crate::model::{CausalModel, Model};

pub use expand::{
    expansions, expansions_with_choices, is_essential_edge, lemma4_nonessential, ExpansionChoice,
    Hidden,
};
pub use minimal::minimal_models;
pub use reduce::{enumerate_reductions, is_minimal};

pub(crate) use expand::{essential, expansion_models, redundancy_pattern};
pub(crate) use reduce::find_reduction;

/// One step of a reducing transformation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReductionStep {
    /// Remove the edge `from -> to`.
    RemoveEdge { from: String, to: String },
    /// Substitute `keep` for `gone` everywhere and delete `gone`.
    Collapse { gone: String, keep: String },
}

impl ReductionStep {
    pub fn apply(&self, m: &CausalModel) -> Result<CausalModel> {
        match self {
            ReductionStep::RemoveEdge { from, to } => remove_edge(m, from, to),
            ReductionStep::Collapse { gone, keep } => collapse_vertices(m, gone, keep),
        }
    }
}

impl fmt::Display for ReductionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionStep::RemoveEdge { from, to } => write!(f, "RE({from} -> {to})"),
            ReductionStep::Collapse { gone, keep } => write!(f, "CV({gone}, {keep})"),
        }
    }
}

fn index(m: &Model, name: &str) -> Result<usize> {
    m.index_of(name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
}

fn require_kind(m: &Model, i: usize, kind: Kind) -> Result<()> {
    let actual = if m.is_observable(i) { Kind::Observable } else { Kind::Latent };
    if actual != kind {
        let what = if kind == Kind::Observable { "observable" } else { "latent" };
        return Err(Error::PatternAbsent(format!("`{}` is not {what}", m.names[i])));
    }
    Ok(())
}

fn require_edge(m: &Model, u: usize, v: usize) -> Result<()> {
    if !m.has_edge(u, v) {
        return Err(Error::PatternAbsent(format!("no edge {} -> {}", m.names[u], m.names[v])));
    }
    Ok(())
}

fn require_distinct(ids: &[usize]) -> Result<()> {
    for (k, i) in ids.iter().enumerate() {
        if ids[..k].contains(i) {
            return Err(Error::pre("pattern vertices must be distinct"));
        }
    }
    Ok(())
}

fn acyclic_or(m: Model, at: &str) -> Result<Model> {
    if m.is_acyclic() {
        Ok(m)
    } else {
        Err(Error::Cycle(at.to_string()))
    }
}

/// Deletes the edge `x -> y`.
pub fn remove_edge(m: &CausalModel, x: &str, y: &str) -> Result<CausalModel> {
    let mut c = Model::from_graph(m);
    let (u, v) = (index(&c, x)?, index(&c, y)?);
    if !c.has_edge(u, v) {
        return Err(Error::MissingEdge(x.to_string(), y.to_string()));
    }
    c.remove_edge(u, v);
    c.to_causal()
}

/// Rewrites every endpoint `v1` to `v2`, merges parallel edges, drops
/// self-loops and deletes `v1`.
pub fn collapse_vertices(m: &CausalModel, v1: &str, v2: &str) -> Result<CausalModel> {
    let c = Model::from_graph(m);
    let (gone, keep) = (index(&c, v1)?, index(&c, v2)?);
    if gone == keep {
        return Err(Error::pre("cannot collapse a vertex into itself"));
    }
    acyclic_or(c.collapse(gone, keep), v2)?.to_causal()
}

pub(crate) fn embed(m: &Model, v1: usize, v2: usize, v3: usize, l1: usize, star: bool) -> Result<Model> {
    require_distinct(&[v1, v2, v3])?;
    for v in [v1, v2, v3] {
        require_kind(m, v, Kind::Observable)?;
    }
    require_kind(m, l1, Kind::Latent)?;
    require_edge(m, v1, v2)?;
    require_edge(m, l1, v2)?;
    require_edge(m, l1, v3)?;
    let mut c = m.clone();
    c.remove_edge(v1, v2);
    c.add_edge(v1, l1);
    if !star {
        let base = c.names[l1].clone();
        let l2 = c.fresh_latent(&base);
        c.add_edge(l2, v2);
        c.add_edge(l2, v3);
    }
    let at = c.names[l1].clone();
    acyclic_or(c, &at)
}

/// Replaces `[v1 -> v2, l1 -> v2, l1 -> v3]` by `[v1 -> l1, l1 -> v2,
/// l1 -> v3]`, adding a fresh latent `l2 -> v2, l2 -> v3` unless `star`.
pub fn embed_latent(
    m: &CausalModel,
    v1: &str,
    v2: &str,
    v3: &str,
    l1: &str,
    star: bool,
) -> Result<CausalModel> {
    let c = Model::from_graph(m);
    let ids = [index(&c, v1)?, index(&c, v2)?, index(&c, v3)?, index(&c, l1)?];
    embed(&c, ids[0], ids[1], ids[2], ids[3], star)?.to_causal()
}

pub(crate) fn connect(m: &Model, l1: usize, l2: usize, v: usize) -> Result<Model> {
    require_distinct(&[l1, l2, v])?;
    require_kind(m, l1, Kind::Latent)?;
    require_kind(m, l2, Kind::Latent)?;
    require_kind(m, v, Kind::Observable)?;
    require_edge(m, l1, v)?;
    require_edge(m, l2, v)?;
    let mut c = m.clone();
    c.remove_edge(l1, v);
    c.add_edge(l1, l2);
    let at = c.names[l2].clone();
    acyclic_or(c, &at)
}

/// Replaces `[l1 -> v, l2 -> v]` by `[l1 -> l2, l2 -> v]`.
pub fn connect_latents(m: &CausalModel, l1: &str, l2: &str, v: &str) -> Result<CausalModel> {
    let c = Model::from_graph(m);
    let ids = [index(&c, l1)?, index(&c, l2)?, index(&c, v)?];
    connect(&c, ids[0], ids[1], ids[2])?.to_causal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, serialize_graph, Format};

    fn cm(body: &str) -> CausalModel {
        CausalModel::new(parse_graph(&format!("role causal-dag\n{body}")).unwrap()).unwrap()
    }

    fn text(m: &CausalModel) -> String {
        serialize_graph(m, Format::Native)
    }

    #[test]
    fn remove_edge_examples() {
        let m = cm("obs A B C\nedge A -> B\nedge B -> C");
        assert_eq!(text(&remove_edge(&m, "B", "C").unwrap()), text(&cm("obs A B C\nedge A -> B")));
        let m = cm("obs A B\nedge A -> B");
        assert_eq!(text(&remove_edge(&m, "A", "B").unwrap()), text(&cm("obs A B")));
        assert!(matches!(remove_edge(&m, "B", "A"), Err(Error::MissingEdge(..))));
    }

    #[test]
    fn collapse_examples() {
        let m = cm("obs A B C\nlat L1 L2\nedge L1 -> A\nedge L1 -> B\nedge L2 -> B\nedge L2 -> C");
        let c = collapse_vertices(&m, "L1", "L2").unwrap();
        assert_eq!(text(&c), text(&cm("obs A B C\nlat L2\nedge L2 -> A\nedge L2 -> B\nedge L2 -> C")));
        let m = cm("obs A B\nlat L\nedge A -> L\nedge L -> B");
        assert_eq!(text(&collapse_vertices(&m, "L", "A").unwrap()), text(&cm("obs A B\nedge A -> B")));
        let m = cm("obs A B C\nedge A -> B\nedge B -> C");
        assert!(matches!(collapse_vertices(&m, "A", "C"), Err(Error::Cycle(_))));
    }

    #[test]
    fn embed_examples() {
        let m = cm("obs A B C\nlat L\nedge A -> B\nedge L -> B\nedge L -> C");
        let star = embed_latent(&m, "A", "B", "C", "L", true).unwrap();
        assert_eq!(text(&star), text(&cm("obs A B C\nlat L\nedge A -> L\nedge L -> B\nedge L -> C")));
        let full = embed_latent(&m, "A", "B", "C", "L", false).unwrap();
        assert_eq!(
            text(&full),
            text(&cm("obs A B C\nlat L L_2\nedge A -> L\nedge L -> B\nedge L -> C\nedge L_2 -> B\nedge L_2 -> C"))
        );
        let m = cm("obs A B C\nlat L\nedge A -> B\nedge L -> C");
        assert!(matches!(embed_latent(&m, "A", "B", "C", "L", false), Err(Error::PatternAbsent(_))));
        let m = cm("obs A B C\nlat L\nedge A -> B\nedge L -> B\nedge L -> C\nedge L -> A");
        assert!(matches!(embed_latent(&m, "A", "B", "C", "L", true), Err(Error::Cycle(_))));
    }

    #[test]
    fn connect_examples() {
        let m = cm("obs A B V\nlat L1 L2\nedge L1 -> A\nedge L1 -> V\nedge L2 -> V\nedge L2 -> B");
        assert_eq!(
            text(&connect_latents(&m, "L1", "L2", "V").unwrap()),
            text(&cm("obs A B V\nlat L1 L2\nedge L1 -> A\nedge L1 -> L2\nedge L2 -> V\nedge L2 -> B"))
        );
        let m = cm("obs V\nlat L1 L2\nedge L1 -> V\nedge L2 -> V");
        assert_eq!(
            text(&connect_latents(&m, "L2", "L1", "V").unwrap()),
            text(&cm("obs V\nlat L1 L2\nedge L2 -> L1\nedge L1 -> V"))
        );
        let m = cm("obs V\nlat L1 L2\nedge L1 -> V");
        assert!(matches!(connect_latents(&m, "L1", "L2", "V"), Err(Error::PatternAbsent(_))));
    }

    #[test]
    fn steps_apply() {
        let m = cm("obs A B\nlat L\nedge L -> A\nedge L -> B\nedge A -> B");
        let step = ReductionStep::RemoveEdge { from: "A".into(), to: "B".into() };
        assert_eq!(step.to_string(), "RE(A -> B)");
        assert_eq!(step.apply(&m).unwrap().edges().len(), 2);
        let step = ReductionStep::Collapse { gone: "L".into(), keep: "A".into() };
        assert_eq!(step.apply(&m).unwrap().edges().len(), 1);
    }
}
