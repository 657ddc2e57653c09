//! Exact computation of eta-inverted stable stems by cobar-complex methods.
//!
//! The crate computes, from first principles and in exact arithmetic:
//! the cohomology of the quotient dual Steenrod algebra P = F2[z1, z2, ...]
//! with coefficients in the graded comodule Q = F2[q0, q1, ...]; the
//! algebraic Novikov spectral sequence attached to the 2-adic filtration of
//! the Hopf algebroid of the Brown-Peterson spectrum, together with its
//! h0-localization; explicit integral cocycles for the image-of-J family;
//! the tau-extended and motivic counterparts over F2[tau]; and deterministic
//! SVG/TSV charts of the results. Two independent routes to the eta-local
//! motivic stable stems are computed and compared.

pub mod cache;
pub mod chart;
pub mod cobar;
pub mod config;
pub mod error;
pub mod ext;
pub mod grading;
pub mod hopf;
pub mod linalg;
pub mod motivic;
pub mod novikov;
pub mod poly;
pub mod rat;
pub mod sseq;

pub use error::{Error, Result};
