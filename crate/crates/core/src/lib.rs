//! Spectral solution and filter regularization of the final-value problem
//! for the ultraparabolic equation `u_t + u_s − Δu = f` on `[0, π] × [0, T]²`
//! with homogeneous Dirichlet conditions.
//!
//! The unregularized backward solution amplifies mode `n` by `e^{(T−t)n²}`;
//! [`regularizer`] replaces that factor with `(ε + e^{−pn²})^{(t−T)/p}`,
//! which is bounded by `ε^{(t−T)/p}` for every mode.

pub mod error;
pub mod experiments;
pub mod problem;
pub mod quadrature;
pub mod regularizer;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
