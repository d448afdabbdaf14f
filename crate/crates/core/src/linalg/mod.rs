//! Dense and sparse linear algebra used by the solver.

pub mod dense;
pub mod eig;
pub mod gmres;
pub mod precond;
pub mod sparse;

pub use dense::{lu_factor, LuFactors, Mat};
pub use eig::eig_dense;
pub use gmres::{gmres, GmresOutput, Identity, LinearOperator, Preconditioner};
pub use precond::{equilibrate, Equilibrated, SaddlePrecond};
pub use sparse::SparseMat;
