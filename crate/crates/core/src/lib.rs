//! Polynomial holomorphic curves `f(z) = [I₂, F(z)]` in the complex
//! Grassmannian G(2, n+2; ℂ), the quadratic constraint system that
//! characterises constant Gauss curvature `4/d`, and the analytic invariants
//! attached to such curves.
//!
//! Module map:
//!
//! - [`exterior`]: Λᵏℂⁿ for k ≤ 4 and its index combinatorics.
//! - [`curve`]: the [`Curve`] model, coefficient vectors `W_α`, `V_p`, the
//!   Gram residual and fullness rank.
//! - [`invariants`]: the g-vector, `|det A₁|²`, ramification, Gauss curvature
//!   and the lower-bound machinery (`lemma_q`, `tail_probe`).
//! - [`families`]: Veronese coefficients and the two degenerate families.
//! - [`gauge`]: congruence moves (GL(2) frame change, unitary action,
//!   Möbius reparametrisation, SVD canonical form of `A₁`).
//! - [`solver`]: Levenberg–Marquardt feasibility search over `W_1, …, W_d`.

pub mod curve;
pub mod error;
pub mod exterior;
pub mod families;
pub mod gauge;
pub mod invariants;
pub mod parse;
pub mod poly;
pub mod solver;

pub use curve::{Curve, GramReport, VerifyReport};
pub use error::{Error, Result};
pub use exterior::MultiVec;
pub use gauge::Mobius;
pub use num_complex::Complex64;
