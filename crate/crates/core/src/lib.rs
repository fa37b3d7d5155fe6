//! Critical-window scaling functions for the Erdős–Rényi random graph.
//!
//! The crate evaluates the scaling moments `f_k(λ)` of the component sizes of
//! `G(n, p)` with `p = (1 + λ n^{-1/3}) / n`, locates the maximiser of the
//! rescaled susceptibility ratio, and provides Monte Carlo and exact
//! enumeration oracles that cross-check the analytic pieces.

pub mod error;
pub mod excursion;
pub mod format;
pub mod maximizer;
pub mod oracles;
pub mod percolation;
pub mod quadrature;
pub mod rng;
pub mod scaling;
pub mod specfun;
pub mod stats;

pub use error::{Error, QuadratureFailure, Result};
