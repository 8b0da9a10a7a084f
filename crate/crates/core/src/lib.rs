//! Exact continued-fraction approximation coefficients `Θ_n`, `C_n`, `D_n`,
//! sharp case-classified bounds on `D_{n-1}` and `C_{n-1}`, and the
//! asymptotic frequencies of the bound events.
//!
//! - [`cf`]: digit extraction, convergents, futures/pasts and coefficients,
//!   all in exact rational arithmetic ([`rational`]).
//! - [`natural_extension`]: the maps `T` and `𝒯`, the invariant density and
//!   the boundary curves `f_{a,r}`, `g_{b,R}` on the rectangles `Δ_{a,b}`.
//! - [`bounds`]: case classification, the sharp bounds, Tong's values and
//!   witnesses realizing the bounds.
//! - [`frequency`]: closed-form region measures, a quadrature oracle and an
//!   ergodic Monte Carlo estimator.

pub mod bounds;
pub mod cf;
pub mod frequency;
pub mod natural_extension;
pub mod quadrature;
pub mod rational;

pub use bounds::{BoundKind, BoundResult, CaseLabel, Direction};
pub use cf::{CoefficientTriple, ConvergentPair, DigitSequence, Exactness};
pub use natural_extension::{CurveConfig, OrbitPoint, Rectangle};
pub use rational::Rational;
