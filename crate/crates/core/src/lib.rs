//! Threshold-coincidence cascades on directed labeled networks, their
//! pyramid decomposition on paths, and exact enumeration of cascade
//! families.

pub mod algebra;
pub mod cascade;
pub mod enumeration;
pub mod error;
pub mod graph;
pub mod persistence;
pub mod pyramid;
pub mod render;
pub mod triangular;

pub use cascade::{activation_closure, stv, ActivationDiagram, StimulusSet, Stv};
pub use error::{Error, Result};
pub use graph::{make_clique, make_cycle, make_path, make_rooted_tree, Edge, Network, VertexId};
