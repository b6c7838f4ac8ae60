use super::{build_raw, max_abs, Basis, BranchPart, CMatrix, DiscretizationParams, TransferMatrix};
use crate::transfer::linalg::numerical_rank;
use crate::{Error, Result, C64};

/// `Ψ_1 f = -(f - f(0))/z`: raw entries `(Ψ_1)_{j,m} = -δ_{m,j+1}` on every component.
pub fn psi1_matrix(params: &DiscretizationParams, basis: Basis) -> CMatrix {
    let d = params.d();
    let size = params.dim();
    let r = params.r;
    let mut psi = CMatrix::zeros(size, size);
    for j in 0..params.m {
        let m = j + 1;
        let value = match basis {
            Basis::RawTaylor => -1.0,
            // D_j / D_m with D_j = R^{j+1}/√(j+1)
            Basis::Bergman => -((m + 1) as f64 / (j + 1) as f64).sqrt() / r,
        };
        for k in 0..d {
            psi[(params.index(j, k), params.index(m, k))] = C64::new(value, 0.0);
        }
    }
    psi
}

/// Keeps only the column block `m = 0` of a matrix.
fn first_block_column(a: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |row, col| if col < d { a[(row, col)] } else { C64::new(0.0, 0.0) })
}

/// The rank-`d` operator `f ↦ E_s(z) ρ(S) f(0)`: column block 0 of `A(s)`.
pub fn rank_one_f(s: C64, params: &DiscretizationParams, basis: Basis) -> Result<CMatrix> {
    let a = build_raw(s, params, BranchPart::Full)?.to_basis(basis).a;
    Ok(first_block_column(&a, params.d()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionReport {
    /// Largest entry mismatch, relative to the largest entry of `A(s)`.
    pub residual: f64,
    /// Numerical rank (1e-10 threshold) of the accumulated finite-rank term.
    pub finite_rank: usize,
    /// `k · d`.
    pub rank_bound: usize,
}

/// `X_j(s)`: `A(s)` for even `j`, `A⁺(s) - A⁻(s)` for odd `j`, in the Bergman basis.
fn alternating(s: C64, params: &DiscretizationParams, j: usize) -> Result<CMatrix> {
    let raw = |part| -> Result<TransferMatrix> {
        build_raw(s, params, part).map_err(|e| match e {
            Error::MatrixPole { m, j: jj, k } => Error::ShiftedPole { shift: j, m, j: jj, k },
            other => other,
        })
    };
    if j.is_multiple_of(2) {
        Ok(raw(BranchPart::Full)?.to_basis(Basis::Bergman).a)
    } else {
        let plus = raw(BranchPart::Positive)?.to_basis(Basis::Bergman).a;
        let minus = raw(BranchPart::Negative)?.to_basis(Basis::Bergman).a;
        Ok(plus - minus)
    }
}

/// Checks the branch-signed recursion
/// `A(s)[:, m] = (A⁻ - A⁺)(s+½)[:, m-1]` for `m ≥ 1`, iterated `k` times as
/// `A(s) = Σ_{j<k} F^{(j)}(s + j/2) Ψ_1^j + X_k(s + k/2) Ψ_1^k`,
/// where `F^{(j)}` is the first block column of `X_j`.
pub fn recursion_check(s: C64, k: usize, params: &DiscretizationParams) -> Result<RecursionReport> {
    if k == 0 {
        return Err(Error::domain("recursion depth k must be positive"));
    }
    let d = params.d();
    let a = alternating(s, params, 0)?;
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);
    let psi = psi1_matrix(params, Basis::Bergman);

    // One step, column by column.
    let shifted = alternating(s + 0.5, params, 1)?;
    let size = params.dim();
    let mut one_step: f64 = 0.0;
    for col in d..size {
        for row in 0..size {
            // (A⁻ - A⁺)[:, m-1] in raw terms is X_1[:, m-1] Ψ_1[m-1, m] in any basis.
            let predicted = shifted[(row, col - d)] * psi[(col - d, col)];
            one_step = one_step.max((a[(row, col)] - predicted).norm());
        }
    }

    let mut finite = CMatrix::zeros(size, size);
    let mut power = CMatrix::identity(size, size);
    for j in 0..k {
        let x = alternating(s + 0.5 * j as f64, params, j)?;
        finite += first_block_column(&x, d) * &power;
        power = &power * &psi;
    }
    let remainder = alternating(s + 0.5 * k as f64, params, k)? * &power;
    let k_step = max_abs(&(&finite + remainder - &a));
    Ok(RecursionReport {
        residual: one_step.max(k_step) / scale,
        finite_rank: numerical_rank(&finite, 1e-10),
        rank_bound: k * d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{induce_from_index2, UnitaryRep};
    use crate::transfer::build_closed;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn psi_lowers_degree() {
        let p = DiscretizationParams::new(3.0, UnitaryRep::trivial()).unwrap().degree(5).unwrap();
        let psi = psi1_matrix(&p, Basis::RawTaylor);
        let mut z2 = nalgebra::DVector::from_element(6, c(0.0, 0.0));
        z2[2] = c(1.0, 0.0);
        let out = &psi * z2;
        let mut expected = nalgebra::DVector::from_element(6, c(0.0, 0.0));
        expected[1] = c(-1.0, 0.0);
        assert_eq!(out, expected);
    }

    #[test]
    fn rank_one_part() {
        let p = DiscretizationParams::new(3.0, UnitaryRep::trivial()).unwrap();
        let s = c(1.3, 2.0);
        let f = rank_one_f(s, &p, Basis::Bergman).unwrap();
        let a = build_closed(s, &p).unwrap().a;
        assert_eq!(numerical_rank(&f, 1e-10), 1);
        assert_eq!(f.column(0), a.column(0));
        let ind = DiscretizationParams::new(3.0, induce_from_index2(3.0).unwrap().rep).unwrap();
        assert_eq!(numerical_rank(&rank_one_f(s, &ind, Basis::Bergman).unwrap(), 1e-10), 2);
    }

    #[test]
    fn identity_holds_in_both_regimes() {
        let p = DiscretizationParams::new(3.0, UnitaryRep::trivial()).unwrap();
        let r1 = recursion_check(c(2.0, 3.0), 1, &p).unwrap();
        assert!(r1.residual < 1e-10, "{r1:?}");
        assert!(r1.finite_rank <= r1.rank_bound);
        let r2 = recursion_check(c(0.2, 5.0), 2, &p).unwrap();
        assert!(r2.residual < 1e-10, "{r2:?}");
        assert!(r2.finite_rank <= 2);
        let chi = DiscretizationParams::new(3.0, UnitaryRep::character(0.3).unwrap()).unwrap();
        let r3 = recursion_check(c(-0.3, 1.0), 3, &chi).unwrap();
        assert!(r3.residual < 1e-10, "{r3:?}");
    }

    #[test]
    fn shifted_pole_names_shift() {
        let p = DiscretizationParams::new(3.0, UnitaryRep::trivial()).unwrap().degree(4).unwrap();
        match recursion_check(c(-1.0, 0.0), 2, &p) {
            Err(Error::ShiftedPole { shift, .. }) => assert_eq!(shift, 0),
            other => panic!("unexpected {other:?}"),
        }
        // 2s = -8 is regular for m + j ≤ 8, but 2(s + 1/2) + 8 = 1.
        match recursion_check(c(-4.0, 0.0), 2, &p) {
            Err(Error::ShiftedPole { shift, .. }) => assert_eq!(shift, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
