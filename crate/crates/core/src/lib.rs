//! Exact machinery for the isospectral problem of flat tori.
//!
//! Modules cover exact rational linear algebra, quadratic forms and their
//! representation numbers, Minkowski and Schiemann reduction, an exact
//! pointed-cone engine, minimal sets, the covering-refinement proof that
//! ternary forms are determined by their representation numbers, integral
//! equivalence, modular-form certificates, linear codes and a catalog of
//! classical examples.

pub mod error;
pub mod exact_linalg;
pub mod cones;
pub mod forms;
pub mod reduction;
pub mod minset;
pub mod symphony;
pub mod congruence;
pub mod modular;
pub mod codes;
pub mod catalog;

pub use error::{Error, Result};
