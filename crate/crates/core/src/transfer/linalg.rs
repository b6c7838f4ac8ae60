use nalgebra::{Complex, Schur};

use super::{build_closed, CMatrix, DiscretizationParams};
use crate::fit::{linear_fit, LinearFit};
use crate::{Result, C64};

/// `det(1 - A)` by partial-pivot LU.
pub(crate) fn det_one_minus(a: &CMatrix) -> C64 {
    let n = a.nrows();
    let m = CMatrix::identity(n, n) - a;
    m.lu().determinant()
}

/// `det(1 - L_{s,ρ})` from the closed-form matrix in the Bergman basis.
pub fn fredholm_det(s: C64, params: &DiscretizationParams) -> Result<C64> {
    Ok(build_closed(s, params)?.det_one_minus())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularValues {
    /// Decreasing.
    pub values: Vec<f64>,
    /// Fit of `ln μ_k` against `k` over the resolved part of the spectrum.
    pub fit: Option<LinearFit>,
}

impl SingularValues {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Singular values of a matrix, sorted decreasingly.
pub(crate) fn svd_values(a: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Singular values of the Bergman-basis matrix with an exponential-decay fit.
///
/// The fit skips the first five values and stops where `μ_k` reaches `1e-14 μ_0`.
pub fn singular_values(s: C64, params: &DiscretizationParams) -> Result<SingularValues> {
    let a = build_closed(s, params)?.a;
    let values = svd_values(&a);
    Ok(SingularValues { fit: decay_fit(&values), values })
}

pub(crate) fn decay_fit(values: &[f64]) -> Option<LinearFit> {
    let top = *values.first()?;
    let (k, y): (Vec<f64>, Vec<f64>) = values
        .iter()
        .enumerate()
        .skip(5)
        .take_while(|(_, v)| **v > 1e-14 * top)
        .map(|(k, v)| (k as f64, v.ln()))
        .unzip();
    linear_fit(&k, &y)
}

/// Eigenvalue of largest modulus.
pub fn leading_eigenvalue(s: C64, params: &DiscretizationParams) -> Result<C64> {
    let a = build_closed(s, params)?.a;
    Ok(largest_eigenvalue(&a))
}

pub(crate) fn largest_eigenvalue(a: &CMatrix) -> C64 {
    let schur = Schur::new(a.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows())
        .map(|i| t[(i, i)])
        .max_by(|x: &Complex<f64>, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or_default()
}

/// Number of singular values above `threshold · μ_0`.
pub fn numerical_rank(a: &CMatrix, threshold: f64) -> usize {
    let v = svd_values(a);
    match v.first() {
        Some(&top) if top > 0.0 => v.iter().filter(|x| **x > threshold * top).count(),
        _ => 0,
    }
}

pub fn operator_norm(a: &CMatrix) -> f64 {
    svd_values(a).first().copied().unwrap_or(0.0)
}

/// `ln|det(1 - A)|` against `Σ ln(1 + μ_k(A))`.
pub fn weyl_bound(a: &CMatrix) -> (f64, f64) {
    let lhs = det_one_minus(a).norm().ln();
    let rhs = svd_values(a).iter().map(|m| m.ln_1p()).sum();
    (lhs, rhs)
}

/// Both sides of `ln|det(1 + F + T)| ≤ rank(F) ln(1 + ‖F‖) + Σ ln(1 + μ_m(T))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeilerSimon {
    pub lhs: f64,
    pub rhs: f64,
    pub rank: usize,
}

impl SeilerSimon {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-10 * self.rhs.abs().max(1.0)
    }
}

pub fn seiler_simon(f: &CMatrix, t: &CMatrix) -> SeilerSimon {
    let n = f.nrows();
    let lhs = (CMatrix::identity(n, n) + f + t).lu().determinant().norm().ln();
    let rank = numerical_rank(f, 1e-10);
    let rhs = rank as f64 * operator_norm(f).ln_1p() + svd_values(t).iter().map(|m| m.ln_1p()).sum::<f64>();
    SeilerSimon { lhs, rhs, rank }
}
