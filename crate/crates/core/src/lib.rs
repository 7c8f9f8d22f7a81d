//! Exact-arithmetic toolkit for interval exchange maps with gaps.
//!
//! The crate models partially defined piecewise affine bijections between
//! finite unions of right-open intervals, runs the gap-aware Rauzy–Veech
//! induction on them, and assembles a decomposition of the ambient interval
//! into a transition part and periodic or quasiminimal recurrence domains.
//!
//! All arithmetic is exact: see [`scalar::Scalar`].

// A Scalar alone is 136 bytes and errors carry them by value.
#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod cli;
pub mod decompose;
pub mod ggiet;
pub mod induction;
pub mod intervals;
pub mod io;
pub mod orbit;
pub mod scalar;
pub mod svg;
pub mod towers;

pub use ggiet::{CombData, GGiet, GietError, Image, Item, ItemKind, Label, Layout};
pub use intervals::{Interval, IntervalSet};
pub use scalar::Scalar;
