//! Set-indexed Brownian motion on the collection of rectangles `[0, x]` in
//! the positive orthant.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`geometry`]: rectangles, finite unions in canonical antichain form,
//!   strictly monotone product measures and the scaling action.
//! * [`lattice`]: intersection closure, numberings consistent with the
//!   strong past, left-neighborhood cells and strictly increasing flows.
//! * [`processes`]: counter-keyed samplers in exact path mode and grid field
//!   mode, with additive set evaluation.
//! * [`timechange`]: clock inversion and retiming of projected paths.
//! * [`verify`]: the statistical harness (Brownian test suite, quadratic
//!   variation, hitting and exit probabilities, stationarity, diagnostics).
//!
//! Enable the `parallel` feature to spread replicate loops over a rayon
//! pool. Every draw is keyed by `(seed, replicate, index)`, so serial and
//! parallel runs produce identical bits.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;
pub mod par;

pub mod geometry;
pub mod lattice;
pub mod processes;
pub mod rng;
pub mod stats;
pub mod timechange;
pub mod verify;

pub use error::{Error, Result};
