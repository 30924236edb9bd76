//! Deep asymptotic expansion for moving internal layers.
//!
//! The crate solves singularly perturbed reaction-advection-diffusion problems
//!
//! ```text
//! μ Δu − u_t = A(u, x) (1·∇u) + f(x)
//! ```
//!
//! whose solutions develop a thin moving transition layer. Instead of fitting
//! the full field, a small network learns the layer position h₀(x*, t) by
//! minimizing the residual of the interface integral equation. The asymptotic
//! solution is then assembled in closed form around the learned front.
//!
//! Main entry points:
//! - [`problems`]: the 1D/2D/3D benchmarks and the classical front oracle.
//! - [`asymptotics`]: inner profiles and the zero/first-order composite solutions.
//! - [`dae`]: interface residual, DAE training, residual-based refinement, first order.
//! - [`pinn`]: the full-field PINN baseline.
//! - [`run`]: configuration, presets and artifact emission used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod autodiff;
pub mod config;
pub mod dae;
pub mod error;
pub mod metrics;
pub mod network;
pub mod pinn;
pub mod problems;
pub mod quadrature;
pub mod run;
pub mod sampling;

pub use error::{Error, Result};

/// Sizes the global worker pool from `LAYERFRONT_THREADS` if set.
///
/// Safe to call more than once; only the first call has an effect.
pub fn init_threads() {
    if let Some(n) = std::env::var("LAYERFRONT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
