//! Matrix discretizations of the transfer operator `L_{s,ρ}` and the checks built on them.

mod closed;
mod collocation;
mod direct;
mod linalg;
mod params;
mod recursion;
mod trace;

pub use closed::{branch_matrix, build_closed, build_raw};
pub use collocation::{collocation_det, collocation_matrix, CollocationParams};
pub use direct::build_direct;
pub use linalg::{
    fredholm_det, leading_eigenvalue, numerical_rank, operator_norm, seiler_simon, singular_values,
    weyl_bound, SeilerSimon, SingularValues,
};
pub use params::{DiscretizationParams, DEFAULT_SIZE_CAP};
pub use recursion::{psi1_matrix, rank_one_f, recursion_check, RecursionReport};
pub use trace::{fixed_point, trace_oracle};

use nalgebra::DMatrix;

use crate::C64;

pub type CMatrix = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Coefficients of the monomials `z^j`.
    RawTaylor,
    /// Orthonormal monomials of the Bergman space on `D(0, R)`.
    Bergman,
}

/// Which branches `γ_n` enter the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchPart {
    Full,
    /// `n ≥ 1`
    Positive,
    /// `n ≤ -1`
    Negative,
}

/// A discretized transfer operator together with its build data.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub a: CMatrix,
    pub s: C64,
    pub params: DiscretizationParams,
    pub basis: Basis,
    pub part: BranchPart,
    /// Estimate of the neglected branch tail (direct builder only).
    pub tail_bound: Option<f64>,
    /// Set when the tail estimate exceeds the builder tolerance.
    pub tail_warning: bool,
}

impl TransferMatrix {
    /// Re-expresses the matrix under the diagonal similarity `D_j = R^{j+1}/√(j+1)`.
    pub fn to_basis(&self, basis: Basis) -> TransferMatrix {
        if basis == self.basis {
            return self.clone();
        }
        let d = self.params.d();
        let r = self.params.r;
        let scale: Vec<f64> = (0..self.a.nrows())
            .map(|idx| {
                let j = (idx / d) as i32;
                r.powi(j + 1) / ((j + 1) as f64).sqrt()
            })
            .collect();
        let a = CMatrix::from_fn(self.a.nrows(), self.a.ncols(), |row, col| {
            let ratio = match basis {
                Basis::Bergman => scale[row] / scale[col],
                Basis::RawTaylor => scale[col] / scale[row],
            };
            self.a[(row, col)] * ratio
        });
        TransferMatrix { a, basis, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `det(1 - A)`.
    pub fn det_one_minus(&self) -> C64 {
        linalg::det_one_minus(&self.a)
    }
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}
