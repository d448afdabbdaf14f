//! Differentiation matrices, interpolation bundles and their updates.

pub mod diffmatrix;
pub mod interp;
pub mod sweep;

pub use diffmatrix::{assemble, update, AssemblyStats, DiffMatrix, OpData, Part};
pub use interp::{build_interp_bundle, update_interp_bundle, InterpBundle};
pub use sweep::StencilRecord;
