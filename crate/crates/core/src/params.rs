//! Discretization parameters per operator.
//!
//! Given a target order of accuracy `xi`, each operator gets its own
//! polynomial degree, PHS exponent and stencil size:
//!
//! | operator          | degree     | PHS exponent          | stencil size     |
//! |-------------------|------------|-----------------------|------------------|
//! | Laplacian         | `xi + 1`   | [`phs_degree`]        | `2 * M + 1`      |
//! | Robin / Neumann   | `xi`       | [`phs_degree`]        | `2 * M + 1`      |
//! | point evaluation  | `xi`       | [`phs_degree`]        | `2 * M + 1`      |
//!
//! where `M = (ell + 1)(ell + 2) / 2` is the dimension of bivariate
//! polynomials of total degree `ell`.

use serde::{Deserialize, Serialize};

/// The linear operator a set of weights approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    Laplacian,
    BoundaryRobin,
    PointEvaluation,
}

impl OperatorKind {
    /// Differential order of the operator.
    pub fn order(self) -> u32 {
        match self {
            OperatorKind::Laplacian => 2,
            OperatorKind::BoundaryRobin => 1,
            OperatorKind::PointEvaluation => 0,
        }
    }
}

/// Relationship between the polynomial degree and the PHS exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingLaw {
    /// `m = 2 ell + 1`.
    Classical,
    /// `m = ell` for odd `ell`, `ell + 1` for even `ell`.
    PlusOne,
    /// `m = ell` for odd `ell`, `ell - 1` for even `ell`.
    MinusOne,
}

impl std::str::FromStr for ScalingLaw {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classical" | "2l+1" => Ok(ScalingLaw::Classical),
            "plus-one" | "plusone" | "l+1" => Ok(ScalingLaw::PlusOne),
            "minus-one" | "minusone" | "l-1" => Ok(ScalingLaw::MinusOne),
            other => Err(format!("unknown scaling law `{other}`")),
        }
    }
}

/// PHS exponent used throughout the solver: `ell` if odd, `ell - 1` if
/// even, never below 3.
pub fn phs_degree(ell: u32) -> u32 {
    let m = if ell % 2 == 1 { ell } else { ell.saturating_sub(1) };
    m.max(3)
}

/// PHS exponent under an explicit scaling law. All results are odd and at
/// least 3.
pub fn phs_degree_alt(ell: u32, law: ScalingLaw) -> u32 {
    match law {
        ScalingLaw::Classical => 2 * ell + 1,
        ScalingLaw::PlusOne => {
            let m = if ell % 2 == 1 { ell } else { ell + 1 };
            m.max(3)
        }
        ScalingLaw::MinusOne => phs_degree(ell),
    }
}

/// Number of bivariate polynomials of total degree at most `ell`.
pub fn poly_dim(ell: u32) -> usize {
    let l = ell as usize;
    (l + 1) * (l + 2) / 2
}

/// Full parameter set for one operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub xi: u32,
    /// Polynomial degree.
    pub ell: u32,
    /// PHS exponent.
    pub m: u32,
    /// Stencil size.
    pub n: usize,
    /// Polynomial space dimension.
    pub poly_dim: usize,
}

impl OperatorSpec {
    /// Spec with an explicit degree and exponent, used by the stability
    /// studies. `xi` is recorded as `ell`.
    pub fn with_degrees(kind: OperatorKind, ell: u32, m: u32) -> Self {
        let poly_dim = poly_dim(ell);
        OperatorSpec {
            kind,
            xi: ell,
            ell,
            m,
            n: 2 * poly_dim + 1,
            poly_dim,
        }
    }
}

/// Parameters for `kind` at target order `xi`.
pub fn build_spec(kind: OperatorKind, xi: u32) -> OperatorSpec {
    assert!(xi >= 1, "approximation order must be at least 1");
    let ell = match kind {
        OperatorKind::Laplacian => xi + 1,
        OperatorKind::BoundaryRobin | OperatorKind::PointEvaluation => xi,
    };
    OperatorSpec {
        xi,
        ..OperatorSpec::with_degrees(kind, ell, phs_degree(ell))
    }
}
