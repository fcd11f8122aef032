//! Lorentzian optimal transport on discretized spacetimes.
//!
//! The crate solves the ℓ_p optimal transport problem for the time
//! separation cost on sampled Lorentzian spaces and uses the resulting
//! displacement interpolations to check timelike curvature-dimension
//! conditions numerically:
//!
//! - [`coeffs`]: distortion coefficients σ, τ and their auxiliary functions.
//! - [`spacetime`]: Minkowski kernels, sampled grids, τ-balls and diamonds.
//! - [`transport`]: the transportation simplex over causal couplings.
//! - [`geodesics`]: geodesic plans, interpolation, restriction, densities.
//! - [`entropy`]: Rényi and Boltzmann entropies, the excess functional.
//! - [`curvature`]: TCD / TMCP checkers and geometric inequalities.
//! - [`smoothlab`]: Jacobians, Riccati flow and Bakry–Émery Ricci in flat space.
//! - [`cli`]: the experiment runner behind the `lorot` binary.
//!
//! Runnable walkthroughs of every capability live in `examples/`:
//!
//! ```text
//! cargo run -p lorot --example coefficients
//! cargo run -p lorot --example tcd_translation
//! cargo run -p lorot --example bishop_gromov
//! ```

// `!(x >= lo)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeffs;
pub mod curvature;
pub mod entropy;
pub mod error;
pub mod extreal;
pub mod geodesics;
pub mod quadrature;
pub mod report;
pub mod smoothlab;
pub mod spacetime;
pub mod transport;

pub use error::{Error, Result};
pub use extreal::ExtReal;
