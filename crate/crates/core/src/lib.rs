//! Radially symmetric gradient reaction-diffusion laboratory.
//!
//! Simulates `u_t = -grad V(u) + (d-1)/r u_r + u_rr` with `u_r(0) = 0`,
//! solves bistable travelling fronts, evaluates localized energy and
//! firewall diagnostics, and fits propagating terraces to late-time
//! solutions.
//!
//! Everything numerical is generic over [`scalar::Real`]; the aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod front;
pub mod linalg;
pub mod potential;
pub mod radial;
pub mod scalar;
pub mod terrace;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PotentialSpec = potential::PotentialSpec<f64>;
pub type PotentialAnalysis = potential::PotentialAnalysis<f64>;
pub type MinimumPoint = potential::MinimumPoint<f64>;
pub type SearchBox = potential::SearchBox<f64>;
pub type FrontProfile = front::FrontProfile<f64>;
pub type RadialGrid = radial::RadialGrid<f64>;
pub type RadialField = radial::RadialField<f64>;
pub type IntegratorConfig = radial::IntegratorConfig<f64>;
