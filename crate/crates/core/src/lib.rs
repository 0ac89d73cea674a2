//! Subcritical multitype Galton–Watson processes with immigration.
//!
//! A `p`-type process evolves by
//!
//! ```text
//! X_n = Σ_i Σ_{k=1}^{X_{n-1,i}} ξ_i(n,k) + η(n)
//! ```
//!
//! where every individual of type `i` independently produces an offspring
//! vector distributed as `ξ_i` and an immigration vector `η` arrives each
//! generation. All laws here have finite support and exact rational weights.
//!
//! The crate is `no_std` (it needs `alloc`). Modules:
//!
//! - [`model`]: process specification, mean matrix, criticality and the
//!   dominating Perron–Frobenius pair `(λ, v)` with `Mv ≤ λv`.
//! - [`structure`]: dead types, degeneracy certificates and the predicted
//!   affine hull of the recurrent class.
//! - [`simulate`]: seeded realizations, lineage decomposition and empirical
//!   stationary distributions.
//! - [`exact`]: truncated exact transition kernels, class analysis,
//!   stationary solves, `F_r` distances, rate fits and drift diagnostics.
//! - [`estimate`]: conditional least squares estimation of `M` and `Eη`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod estimate;
pub mod exact;
pub mod fixtures;
mod graph;
pub mod law;
pub mod model;
mod rational;
pub mod simulate;
pub mod structure;
pub mod vector;

pub use law::FiniteLaw;
pub use model::{GwiModel, MeanMatrix};
pub use num_rational::BigRational;
pub use vector::CountVector;
