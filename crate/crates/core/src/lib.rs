//! Twisted Selberg zeta functions of non-cofinite Hecke triangle groups.
//!
//! The group `Γ_w` (cusp width `w > 2`) is generated by `S: z ↦ -1/z` and
//! `T_w: z ↦ z + w`. Its Selberg zeta function, twisted by a finite-dimensional
//! unitary representation, is the Fredholm determinant `det(1 - L_s)` of the
//! transfer operator built from the branch maps `γ_n = S T_w^n`. This crate
//! discretizes that operator with closed-form, meromorphically continued
//! matrix entries and builds the numerical tooling around it:
//!
//! * [`group`]: Möbius maps, words, primitive conjugacy classes, representations.
//! * [`specfun`]: Gamma, Hurwitz, periodic and Lerch zeta functions.
//! * [`limit_set`]: interval covers of the limit set and their thickenings.
//! * [`transfer`]: transfer matrices, determinants, singular values, oracles.
//! * [`zeta`]: the zeta function itself, Euler products and growth scans.
//! * [`resonance`]: the dimension `δ_w`, zero counting and zero refinement.

pub mod error;
pub mod fit;
pub mod group;
pub mod limit_set;
pub mod resonance;
pub mod specfun;
pub mod transfer;
pub mod zeta;

pub use error::{Error, ErrorKind, Result};
pub use group::{GroupWord, MoebiusMap, UnitaryRep};

/// Complex double used throughout the crate.
pub type C64 = num_complex::Complex64;
