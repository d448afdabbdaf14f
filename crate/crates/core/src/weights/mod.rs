//! Augmented PHS RBF-FD weights and stability indicators.

pub mod basis;
pub mod local;

pub use local::{center_condition, indicators, Functional, IndicatorResult, LocalSystem, Weights};
