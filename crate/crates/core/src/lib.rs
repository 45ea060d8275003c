//! Computational tools for fold lines in Outer Space: Brun expansions,
//! fold-matrix calculus on marked metric graphs, positive loop decompositions,
//! rose-to-rose fold lines and a certified dense fold ray.

pub mod brun;
pub mod cli;
pub mod decompose;
pub mod error;
pub mod foldlines;
pub mod graphs;
pub mod matrices;
pub mod numeric;
pub mod ray;
pub mod serial;

pub use error::{Category, OslError, Result};
