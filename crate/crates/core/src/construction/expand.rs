//! Expansions of an IPG and edge essentiality.

use std::fmt;

use itertools::Itertools;

use crate::bits::{has, members};
use crate::calculus::{is_valid_ipg, Ipg};
use crate::error::{Error, Result};
use crate::model::{CausalModel, Marks, Model};
use crate::separation::ipg_marks;
use crate::Bounds;

/// Hidden edge chosen for one bidirected pair `a <-> b` (with `a < b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hidden {
    None,
    AtoB,
    BtoA,
}

/// One hidden-edge choice per bidirected edge of the source IPG.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpansionChoice {
    pub pairs: Vec<(String, String)>,
    pub hidden: Vec<Hidden>,
}

impl fmt::Display for ExpansionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "no bidirected edges");
        }
        let parts = self.pairs.iter().zip(&self.hidden).map(|((a, b), h)| match h {
            Hidden::None => format!("{a} <-> {b}: none"),
            Hidden::AtoB => format!("{a} <-> {b}: hidden {a} -> {b}"),
            Hidden::BtoA => format!("{a} <-> {b}: hidden {b} -> {a}"),
        });
        write!(f, "{}", parts.format(", "))
    }
}

/// Every expansion of the IPG `g` (marks over `names`) that is acyclic and
/// entails `g` again, in choice order: per bidirected edge, no hidden edge
/// first, then `a -> b`, then `b -> a`.
pub(crate) fn expansion_models(g: &Marks, names: &[String]) -> Vec<(Vec<Hidden>, Model)> {
    let n = g.n();
    let bidir = g.bidirected();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| members(bidir[a]).filter(move |&b| b > a).map(move |b| (a, b)))
        .collect();
    let mut base = Model {
        names: names[..n].to_vec(),
        n_obs: n,
        parents: g.directed_parents(),
        hidden: vec![0; n],
    };
    for &(a, b) in &pairs {
        let l = base.fresh_latent(&format!("L_{}_{}", names[a], names[b]));
        base.add_edge(l, a);
        base.add_edge(l, b);
    }
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        // base-3 digits, first pair most significant
        let choice: Vec<Hidden> = (0..pairs.len())
            .map(|k| match code / 3usize.pow((pairs.len() - 1 - k) as u32) % 3 {
                0 => Hidden::None,
                1 => Hidden::AtoB,
                _ => Hidden::BtoA,
            })
            .collect();
        let mut m = base.clone();
        for (&(a, b), h) in pairs.iter().zip(&choice) {
            let (u, v) = match h {
                Hidden::None => continue,
                Hidden::AtoB => (a, b),
                Hidden::BtoA => (b, a),
            };
            m.add_edge(u, v);
            m.hidden[v] |= crate::bits::bit(u);
        }
        if m.is_acyclic() && ipg_marks(&m) == *g {
            out.push((choice, m));
        }
    }
    out
}

fn valid_marks(g: &Ipg) -> Result<(Marks, Vec<String>)> {
    let d = is_valid_ipg(g);
    if let Some(v) = d.violations.first() {
        return Err(Error::pre(format!("not a valid IPG: {v}")));
    }
    Ok((Marks::from_graph(g), g.observable_names()))
}

/// Valid expansions of `g` paired with the hidden-edge choice behind each.
pub fn expansions_with_choices(g: &Ipg, bounds: &Bounds) -> Result<Vec<(ExpansionChoice, CausalModel)>> {
    let (marks, names) = valid_marks(g)?;
    let bidir = marks.bidirected();
    let pairs: Vec<(String, String)> = (0..marks.n())
        .flat_map(|a| members(bidir[a]).filter(move |&b| b > a).map(move |b| (a, b)))
        .map(|(a, b)| (names[a].clone(), names[b].clone()))
        .collect();
    bounds.check_vertices(marks.n() + pairs.len())?;
    expansion_models(&marks, &names)
        .into_iter()
        .map(|(hidden, m)| Ok((ExpansionChoice { pairs: pairs.clone(), hidden }, m.to_causal()?)))
        .collect()
}

/// Expansions of `g` that are acyclic and entail `g`.
pub fn expansions(g: &Ipg, bounds: &Bounds) -> Result<Vec<CausalModel>> {
    Ok(expansions_with_choices(g, bounds)?.into_iter().map(|(_, m)| m).collect())
}

/// Whether removing `u -> v` changes the IPG from `target`.
pub(crate) fn essential(m: &Model, target: &Marks, u: usize, v: usize) -> bool {
    let mut c = m.clone();
    c.remove_edge(u, v);
    ipg_marks(&c) != *target
}

fn edge_ids(m: &Model, x: &str, y: &str) -> Result<(usize, usize)> {
    let id = |s: &str| m.index_of(s).ok_or_else(|| Error::UnknownVertex(s.to_string()));
    let (u, v) = (id(x)?, id(y)?);
    if !m.has_edge(u, v) {
        return Err(Error::MissingEdge(x.to_string(), y.to_string()));
    }
    Ok((u, v))
}

/// Whether removing `x -> y` from `m` changes its IPG.
pub fn is_essential_edge(m: &CausalModel, x: &str, y: &str) -> Result<bool> {
    let c = Model::from_graph(m);
    let (u, v) = edge_ids(&c, x, y)?;
    Ok(essential(&c, &ipg_marks(&c), u, v))
}

/// The graphical redundancy test: some path `a -> c <- l -> b` with `c`
/// observable, `l` latent and `c` an ancestor of `b`.
pub(crate) fn redundancy_pattern(m: &Model, a: usize, b: usize) -> bool {
    let anc = m.ancestors();
    let children = m.children();
    members(children[a] & m.observed_mask())
        .filter(|&c| c != b && has(anc[b], c))
        .any(|c| m.latents().any(|l| m.has_edge(l, c) && m.has_edge(l, b)))
}

/// Redundancy of the non-hidden observable edge `a -> b` in an expansion,
/// decided by the pattern `a -> c <- l -> b` with `c` an ancestor of `b`.
///
/// `m` must look like an expansion: every latent is a root with exactly two
/// children, both observable.
pub fn lemma4_nonessential(m: &CausalModel, a: &str, b: &str) -> Result<bool> {
    let c = Model::from_graph(m);
    for l in c.latents() {
        let kids: Vec<usize> = members(c.children()[l]).collect();
        if c.parents[l] != 0 || kids.len() != 2 || kids.iter().any(|&k| !c.is_observable(k)) {
            return Err(Error::pre(format!(
                "latent `{}` is not a root with two observable children",
                c.names[l]
            )));
        }
    }
    let (u, v) = edge_ids(&c, a, b)?;
    if !c.is_observable(u) || !c.is_observable(v) {
        return Err(Error::pre("edge must join two observables"));
    }
    if c.is_hidden(u, v) {
        return Err(Error::pre("edge must not be hidden"));
    }
    Ok(redundancy_pattern(&c, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{parse_graph, serialize_graph, Format};

    fn ipg(text: &str) -> Ipg {
        Ipg::new(parse_graph(&format!("role ipg\n{text}")).unwrap()).unwrap()
    }

    fn cm(body: &str) -> CausalModel {
        CausalModel::new(parse_graph(&format!("role causal-dag\n{body}")).unwrap()).unwrap()
    }

    #[test]
    fn expansion_examples() {
        let b = Bounds::default();
        let e = expansions(&ipg("obs A B\nedge A -> B"), &b).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(serialize_graph(&e[0], Format::Native), "role causal-dag\nobs A B\nedge A -> B\n");

        let e = expansions_with_choices(&ipg("obs A B\nedge A <-> B"), &b).unwrap();
        let texts: Vec<String> = e.iter().map(|(_, m)| serialize_graph(m, Format::Native)).collect();
        assert_eq!(
            texts,
            vec![
                "role causal-dag\nobs A B\nlat L_A_B\nedge L_A_B -> A\nedge L_A_B -> B\n",
                "role causal-dag\nobs A B\nlat L_A_B\nhidden A -> B\nedge L_A_B -> A\nedge L_A_B -> B\n",
                "role causal-dag\nobs A B\nlat L_A_B\nhidden B -> A\nedge L_A_B -> A\nedge L_A_B -> B\n",
            ]
        );
        assert_eq!(e[1].0.to_string(), "A <-> B: hidden A -> B");

        let bad = parse_graph("role ipg\nobs A B C D\nedge A -> B\nedge B <-> C\nedge B -> D\nedge D -> C").unwrap();
        assert!(matches!(expansions(&Ipg::new(bad).unwrap(), &b), Err(Error::Precondition(_))));
    }

    #[test]
    fn invalid_hidden_choice_is_filtered() {
        // a hidden A -> B would open C -> A <- L -> B into an inducing path
        let g = ipg("obs A B C\nedge A <-> B\nedge C -> A");
        let e = expansions_with_choices(&g, &Bounds::default()).unwrap();
        let hidden: Vec<Hidden> = e.iter().map(|(c, _)| c.hidden[0]).collect();
        assert_eq!(hidden, vec![Hidden::None, Hidden::BtoA]);
    }

    #[test]
    fn essential_examples() {
        assert!(!is_essential_edge(&fixtures::redundant_edge(), "A", "B").unwrap());
        assert!(is_essential_edge(&fixtures::chain(), "A", "B").unwrap());
        let m = cm("obs A B\nlat L\nedge L -> A\nedge L -> B\nhidden A -> B");
        assert!(!is_essential_edge(&m, "A", "B").unwrap());
        assert!(is_essential_edge(&m, "B", "A").is_err());
    }

    #[test]
    fn redundancy_examples() {
        assert!(lemma4_nonessential(&fixtures::redundant_edge(), "A", "B").unwrap());
        let m = cm("obs A B\nlat L\nedge A -> B\nedge L -> A\nedge L -> B");
        assert!(!lemma4_nonessential(&m, "A", "B").unwrap());
        let m = cm("obs A B C\nlat L\nedge A -> B\nedge A -> C\nedge L -> C\nedge L -> B");
        assert!(!lemma4_nonessential(&m, "A", "B").unwrap());
        let m = cm("obs A B C\nlat L\nedge A -> B\nedge L -> A\nedge L -> B\nedge L -> C");
        assert!(matches!(lemma4_nonessential(&m, "A", "B"), Err(Error::Precondition(_))));
    }
}
