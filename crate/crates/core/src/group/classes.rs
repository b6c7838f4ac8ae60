use super::word::{is_least_rotation, smallest_period};
use super::{check_width, geodesic_length, hull_endpoint, GroupWord, HYPERBOLIC_TOL};
use crate::{Error, Result};

/// A primitive hyperbolic conjugacy class with its canonical cyclic word.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveClass {
    pub word: GroupWord,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassEnumeration {
    /// Sorted by length, ties broken by the canonical word.
    pub classes: Vec<PrimitiveClass>,
    /// Candidate words whose trace fell within tolerance of 2.
    pub skipped_non_hyperbolic: usize,
    /// Number of exponent tuples visited by the search.
    pub visited: usize,
}

/// Lower bound on the length contributed by the letter `S T^n`.
///
/// Every branch `z ↦ -1/(z+nw)` has derivative at most `(|n|w - a)^{-2}` on the
/// hull `[-a, a]`, and `e^{-ℓ}` is the product of those derivatives at the
/// attracting fixed point, so `ℓ ≥ Σ 2 ln(|n_i| w - a)`.
fn letter_cost(n: i64, w: f64, a: f64) -> f64 {
    2.0 * ((n.unsigned_abs() as f64) * w - a).ln()
}

/// All primitive hyperbolic conjugacy classes of `Γ_w` with `ℓ(γ) ≤ ell_max`.
///
/// A class and its inverse are distinct entries whenever they are not conjugate.
pub fn enumerate_primitive_classes(w: f64, ell_max: f64) -> Result<ClassEnumeration> {
    check_width(w)?;
    if !(ell_max.is_finite() && ell_max > 0.0) {
        return Err(Error::domain(format!("ell_max must be positive, got {ell_max}")));
    }
    let a = hull_endpoint(w)?;
    let mut out = ClassEnumeration::default();
    let mut prefix = Vec::new();
    search(w, a, ell_max, ell_max, &mut prefix, &mut out);
    out.classes.sort_by(|x, y| {
        x.length
            .total_cmp(&y.length)
            .then_with(|| x.word.cmp(&y.word))
    });
    Ok(out)
}

fn search(w: f64, a: f64, ell_max: f64, budget: f64, prefix: &mut Vec<i64>, out: &mut ClassEnumeration) {
    let mut n = 1i64;
    while letter_cost(n, w, a) <= budget {
        let cost = letter_cost(n, w, a);
        for signed in [-n, n] {
            prefix.push(signed);
            out.visited += 1;
            consider(w, ell_max, prefix, out);
            search(w, a, ell_max, budget - cost, prefix, out);
            prefix.pop();
        }
        n += 1;
    }
}

fn consider(w: f64, ell_max: f64, ns: &[i64], out: &mut ClassEnumeration) {
    if !is_least_rotation(ns) || smallest_period(ns) != ns.len() {
        return;
    }
    let word = GroupWord::Mixed(ns.to_vec());
    if word.abs_trace(w) <= 2.0 + HYPERBOLIC_TOL {
        out.skipped_non_hyperbolic += 1;
        return;
    }
    if let Ok(length) = geodesic_length(&word, w) {
        if length <= ell_max {
            out.classes.push(PrimitiveClass { word, length });
        }
    }
}
