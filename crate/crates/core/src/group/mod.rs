//! Exact algebra of the Hecke triangle group `Γ_w = ⟨S, T_w⟩ ≅ ℤ/2 ∗ ℤ`.

mod classes;
mod moebius;
mod rep;
mod word;

pub use classes::{enumerate_primitive_classes, ClassEnumeration, PrimitiveClass};
pub use moebius::{branch_map, MoebiusMap};
pub use rep::{evaluate_rep, induce_from_index2, CMatrix, InducedRep, UnitaryRep};
pub use word::{geodesic_length, GroupWord};

use crate::{Error, Result};

/// Tolerance on `|trace| - 2` below which a word is not treated as hyperbolic.
pub const HYPERBOLIC_TOL: f64 = 1e-12;

pub fn check_width(w: f64) -> Result<()> {
    if w.is_finite() && w > 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("cusp width must satisfy w > 2, got {w}")))
    }
}

/// Right endpoint `a = (w - sqrt(w² - 4))/2` of the convex hull `[-a, a]` of `Λ_0`.
///
/// `a` is the attracting fixed point of `S T_w^{-1}` and solves `a (w - a) = 1`.
pub fn hull_endpoint(w: f64) -> Result<f64> {
    check_width(w)?;
    // 2/(w + sqrt(w²-4)) is the same root without cancellation.
    Ok(2.0 / (w + (w * w - 4.0).sqrt()))
}
