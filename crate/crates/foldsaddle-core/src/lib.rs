//! Filippov systems built on the planar fold-saddle normal form.
//!
//! The upper field `X` has a quadratic tangency with the switching line
//! `y = 0`, the lower field `Y` is a linear saddle. Modules follow the
//! analysis pipeline: [`family`] builds the fields, [`sigma`] classifies the
//! switching line, [`flow`] integrates orbits and return maps, [`structures`]
//! finds canard cycles and Σ-graphs, and [`bifurcation`] places parameters in
//! the bifurcation diagram.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bifurcation;
mod error;
pub mod family;
pub mod flow;
mod math;
pub mod roots;
pub mod sigma;
pub mod structures;

pub use error::{Error, Result};
pub use family::{make_system, FamilyParams, FilippovSystem, KeyPoints, Point, Side, TauKind, Visibility, Window};
