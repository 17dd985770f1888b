//! Graphical calculus for causal models with latent variables.
//!
//! The crate covers d-separation and inducing paths ([`separation`]), the
//! closure rules and completion enumeration for inducing path graphs
//! ([`calculus`]), expansions, reductions and minimal models
//! ([`construction`]), and marginal dependency graphs, equivalence and the
//! Pearl edge rules ([`equivalence`]). Everything works on [`MixedGraph`]
//! values, which carry one mark per edge endpoint.

pub mod bits;
pub mod calculus;
pub mod cli;
pub mod construction;
pub mod equivalence;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub(crate) mod model;
pub mod separation;

pub use calculus::{Ipg, Mdg};
pub use error::{Error, Result};
pub use graph::{Edge, Kind, Mark, MixedGraph, Path, Role, Vertex};
pub use model::CausalModel;

/// Size limits for the exponential searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Observables in a signature or an MDG extraction.
    pub max_observables: usize,
    /// Circle marks resolved by completion enumeration.
    pub max_circles: usize,
    /// Vertices of a model handed to reduction or minimal-model search.
    pub max_vertices: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_observables: 10, max_circles: 16, max_vertices: 12 }
    }
}

impl Bounds {
    fn check(what: &'static str, limit: usize, actual: usize) -> Result<()> {
        if actual > limit {
            return Err(Error::BoundExceeded { what, limit, actual });
        }
        Ok(())
    }

    pub fn check_observables(&self, n: usize) -> Result<()> {
        Self::check("observable", self.max_observables, n)
    }

    pub fn check_circles(&self, n: usize) -> Result<()> {
        Self::check("circle", self.max_circles, n)
    }

    pub fn check_vertices(&self, n: usize) -> Result<()> {
        Self::check("vertex", self.max_vertices, n)
    }
}
