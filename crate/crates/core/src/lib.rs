//! Riemann-Stieltjes Δ-integrals on time scales with certified enclosures,
//! and numerical checks of integral inequalities for convex functions.

pub mod error;
pub mod expr;
pub mod func;
pub mod inequalities;
pub mod integrate;
pub mod interval;
pub mod numeric;
pub mod timescale;

pub use error::{Error, Result};
pub use expr::{ConvexFn, ConvexKind, ExprFn, ScaleSpec};
pub use func::{Identity, Lambda, RealFn, RealFn2};
pub use integrate::{rs_integral, IntegralResult, Options};
pub use interval::Interval;
pub use timescale::{Component, QTail, TimeScale};
