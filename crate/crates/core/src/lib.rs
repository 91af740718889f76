//! Convex `C^{1,1}` extension of 1-jets.
//!
//! A 1-jet `(f, G)` on a finite set `E` extends to a convex function with
//! `M`-Lipschitz gradient iff
//!
//! ```text
//! f(x) - f(y) - <G(y), x - y> >= |G(x) - G(y)|^2 / (2M)    for all x, y in E.
//! ```
//!
//! This crate checks that condition ([`cw`]), and extends valid jets one point
//! at a time ([`extension`]) by intersecting the pairwise balls of [`balls`]
//! through the minimax of [`minimax`]. [`body`] checks the analogous
//! conditions for convex bodies with prescribed outer normals, and [`cex`]
//! evaluates a bounded convex function on the unit ball of a truncated `l2`
//! whose minimal convex extension blows up.

pub mod balls;
pub mod body;
pub mod cex;
pub mod cw;
pub mod error;
pub mod extension;
pub mod format;
pub mod jet;
pub mod minimax;
pub mod sample;
pub mod serde_ext;
pub mod tolerance;

pub use balls::{gamma_pairs, membership_margin, pair_balls, phi_diagnostic, GammaPair, PairBall};
pub use body::{check_body, check_kw11, check_outer, BodyData, BodyReport, Kw11Report};

pub use cw::{
    cw11_gap, legruyer_gamma, lip_gradient, minimal_cw11_constant, quadratic_growth_bound, CwReport,
};
pub use error::{Error, ErrorClass, Result};
pub use extension::{
    bracket, extend_many, extend_point, minimal_convex_extension, ExtensionStep, ExtensionTrace,
    QueryOrder,
};
pub use jet::{Jet, JetEntry, Point};
pub use minimax::{minimize_max_ratio, solve_minimax, MinimaxResult};
pub use tolerance::Tolerances;
