//! Node sets, boundary reconstruction and domain adaptation.

pub mod boundary;
pub mod domain;
pub mod io;
pub mod nodes;

pub use boundary::{fit_boundary, Orientation, ParametricBoundary};
pub use domain::{adapt_nodes, advect_seeds, classify, rk3_step, DomainModel, Side};
pub use nodes::{generate_reference_nodes, spacing_for_target, ExtendedSet, NodeSet, Role};
