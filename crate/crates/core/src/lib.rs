//! Sampling of simple graphs with a prescribed degree sequence and a target
//! edge-length distribution over a fixed weight table, plus the tooling to
//! validate the resulting empirical length law (Wasserstein-1 diagnostics,
//! early-stop studies, brute-force oracles for tiny instances).

// Validation guards spell `!(x > 0.0)` instead of `x <= 0.0` on purpose:
// the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degree;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod fenwick;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod sampler;

pub use error::{Error, Result};
