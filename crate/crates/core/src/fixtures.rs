//! Small named models that recur in examples, tests and the CLI.

use crate::equivalence::PearlModel;
use crate::graph::{parse_graph, MixedGraph};
use crate::model::CausalModel;

fn model(text: &str) -> CausalModel {
    CausalModel::new(parse_graph(text).expect("fixture parses")).expect("fixture is a causal model")
}

/// A latent common cause of two observables.
pub fn conf() -> CausalModel {
    model("role causal-dag\nobs A B\nlat L\nedge L -> A\nedge L -> B")
}

/// `A -> B -> C`.
pub fn chain() -> CausalModel {
    model("role causal-dag\nobs A B C\nedge A -> B\nedge B -> C")
}

/// An edge `A -> B` made redundant by `A -> C <- L -> B` with `C -> B`.
pub fn redundant_edge() -> CausalModel {
    model("role causal-dag\nobs A B C\nlat L\nedge A -> B\nedge A -> C\nedge C -> B\nedge L -> C\nedge L -> B")
}

/// Correlated-error model `A -> B <-> C`, `B -> D <- C`.
pub fn pm_reversal() -> PearlModel {
    let g: MixedGraph = parse_graph("role pearl\nobs A B C D\nedge A -> B\nedge B <-> C\nedge B -> D\nedge C -> D")
        .expect("fixture parses");
    PearlModel::new(g).expect("fixture is a pearl model")
}

/// [`pm_reversal`] with its correlated error made explicit.
pub fn reversal_m1() -> CausalModel {
    model("role causal-dag\nobs A B C D\nlat K_B_C\nedge A -> B\nedge B -> D\nedge C -> D\nedge K_B_C -> B\nedge K_B_C -> C")
}

/// [`reversal_m1`] with `C -> D` reversed.
pub fn reversal_m2() -> CausalModel {
    model("role causal-dag\nobs A B C D\nlat K_B_C\nedge A -> B\nedge B -> D\nedge D -> C\nedge K_B_C -> B\nedge K_B_C -> C")
}
