//! Exact computations around central leaves of Shimura-variety deformation
//! spaces: extended affine Weyl groups with Frobenius action, Newton points
//! and Kottwitz classes, isocrystal slopes, admissible sets, lattice models of
//! affine Deligne–Lusztig sets, and truncated Witt vectors with displays.
//!
//! All arithmetic is exact (arbitrary-precision integers and rationals).

#![allow(clippy::needless_range_loop)]

pub mod adlv;
pub mod affine_weyl;
pub mod error;
pub mod exec;
pub mod isocrystal;
pub mod job;
pub mod linalg;
pub mod newton;
pub mod rational;
pub mod root_datum;
pub mod serial;
pub mod witt;

pub use error::{Error, Result};
pub use exec::Exec;
