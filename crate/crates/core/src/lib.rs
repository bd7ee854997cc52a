//! Mild solutions and quantitative bounds for impulsive delay Volterra
//! integro-differential equations with integral jump conditions.
//!
//! The problem class is
//!
//! ```text
//! w'(t)   = A w(t) + V(t, w_t, ∫_0^t U(t, s, w_s) ds),   t ∈ [0, b], t ≠ t_k
//! w(t)    = ς(t),                                       t ∈ [-r, 0]
//! Δw(t_k) = I_k(∫_{t_k-τ_k}^{t_k-θ_k} G(s, w_s) ds),      k = 1..m
//! ```
//!
//! on `ℝⁿ` with the sup norm. The crate is `no_std` and only needs `alloc`.
//!
//! - [`model`]: problem data, Lipschitz data, validation and the built-in catalog.
//! - [`trajectory`]: left-continuous piecewise trajectories, history segments, Σ-norm.
//! - [`semigroup`]: `e^{At}` by scaling and squaring, finite-horizon norm bound `M`.
//! - [`solver`]: segment-wise Picard iteration of the mild formula and its residual.
//! - [`bounds`]: impulsive Pachpatte inequality, existence certificate, a-priori
//!   and dependence bounds.
#![no_std]
#![forbid(unsafe_code)]
// `!(x >= 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
mod error;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod semigroup;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
