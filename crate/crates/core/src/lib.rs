//! Fractional curve flows: Caputo calculus, N-adapted geometry, the
//! bi-Hamiltonian mKdV / sine-Gordon hierarchy and its numerical flows.

pub mod diffpoly;
pub mod flow;
pub mod frac;
pub mod geometry;
pub mod klein;
pub mod parallel;

pub use frac::{FracError, FractionalOrder, PowerTerm, SampledFunction};
pub use parallel::ExecMode;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
