use std::f64::consts::TAU;

use nalgebra::DMatrix;

use super::{check_width, GroupWord};
use crate::{Error, Result, C64};

const UNITARY_TOL: f64 = 1e-12;
/// Eigenphases this close to an integer are snapped to λ = 0.
const LAMBDA_SNAP: f64 = 1e-12;

pub type CMatrix = DMatrix<C64>;

/// Finite-dimensional unitary representation of `Γ_w ≅ ℤ/2 ∗ ℤ`.
///
/// Determined by `U_S` (an involution) and `U_T`; the columns of `Q` diagonalize
/// `U_T` as `Q* U_T Q = diag(e^{-2πiλ_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryRep {
    label: String,
    us: CMatrix,
    ut: CMatrix,
    q: CMatrix,
    lambdas: Vec<f64>,
}

impl UnitaryRep {
    pub fn trivial() -> Self {
        Self::character_with_sign(0.0, 1.0, "trivial".into())
    }

    /// `U_S = -1`, `U_T = 1`.
    pub fn sign() -> Self {
        Self::character_with_sign(0.0, -1.0, "sign".into())
    }

    /// One-dimensional `U_S = 1`, `U_T = e^{-2πiλ}`.
    pub fn character(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::domain("character parameter must be finite"));
        }
        let lambda = reduce_lambda(lambda);
        Ok(Self::character_with_sign(lambda, 1.0, format!("character({lambda})")))
    }

    fn character_with_sign(lambda: f64, s_value: f64, label: String) -> Self {
        Self {
            label,
            us: CMatrix::from_element(1, 1, C64::new(s_value, 0.0)),
            ut: CMatrix::from_element(1, 1, C64::from_polar(1.0, -TAU * lambda)),
            q: CMatrix::identity(1, 1),
            lambdas: vec![lambda],
        }
    }

    /// Validates `U_S² = I` and unitarity, then diagonalizes `U_T`.
    pub fn from_matrices(us: CMatrix, ut: CMatrix, label: impl Into<String>) -> Result<Self> {
        let d = us.nrows();
        if d == 0 || !us.is_square() || ut.shape() != (d, d) {
            return Err(Error::InvalidRep("U_S and U_T must be square of equal positive size".into()));
        }
        if us.iter().chain(ut.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidRep("non-finite matrix entry".into()));
        }
        let id = CMatrix::identity(d, d);
        let tol = UNITARY_TOL * d as f64;
        if max_abs(&(us.adjoint() * &us - &id)) > tol {
            return Err(Error::InvalidRep("U_S is not unitary".into()));
        }
        if max_abs(&(&us * &us - &id)) > tol {
            return Err(Error::InvalidRep("U_S is not an involution".into()));
        }
        if max_abs(&(ut.adjoint() * &ut - &id)) > tol {
            return Err(Error::InvalidRep("U_T is not unitary".into()));
        }
        let (q, lambdas) = diagonalize_unitary(&ut)?;
        Ok(Self { label: label.into(), us, ut, q, lambdas })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn u_s(&self) -> &CMatrix {
        &self.us
    }

    pub fn u_t(&self) -> &CMatrix {
        &self.ut
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `Ŝ = Q* U_S Q`, the image of `S` in the eigenbasis of `U_T`.
    pub fn s_hat(&self) -> CMatrix {
        self.q.adjoint() * &self.us * &self.q
    }

    /// Both generator matrices are real, so the representation equals its conjugate.
    pub fn is_real(&self) -> bool {
        self.us.iter().chain(self.ut.iter()).all(|z| z.im.abs() <= 1e-14)
    }

    /// `U_T^n`, through the eigenbasis so that negative powers cost nothing extra.
    pub fn t_power(&self, n: i64) -> CMatrix {
        let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.lambdas.iter().map(|l| C64::from_polar(1.0, -TAU * reduce_lambda(l * n as f64))),
        ));
        &self.q * phases * self.q.adjoint()
    }
}

fn reduce_lambda(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r < LAMBDA_SNAP || 1.0 - r < LAMBDA_SNAP {
        0.0
    } else {
        r
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigen-decomposition of a unitary matrix through a Hermitian pencil.
///
/// `H = (U + U*)/2 + φ (U - U*)/(2i)` shares the eigenvectors of `U` and maps the
/// eigenvalue `e^{iθ}` to `cos θ + φ sin θ`; a few values of φ are tried so that
/// distinct eigenphases stay separated.
fn diagonalize_unitary(u: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let d = u.nrows();
    let ua = u.adjoint();
    let i2 = C64::new(0.0, 2.0);
    for phi in [0.618_033_988_749_894_8, std::f64::consts::SQRT_2, 0.303_847_577_293_368_1] {
        let h = (u + &ua) * C64::new(0.5, 0.0) + (u - &ua) * (C64::new(phi, 0.0) / i2);
        let eig = nalgebra::SymmetricEigen::new(h);
        let q = eig.eigenvectors;
        let diag = q.adjoint() * u * &q;
        let off = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .fold(0.0f64, |m, (i, j)| m.max(diag[(i, j)].norm()));
        if off <= UNITARY_TOL * d as f64 {
            let lambdas = (0..d)
                .map(|k| reduce_lambda(-diag[(k, k)].arg() / TAU))
                .collect();
            return Ok((q, lambdas));
        }
    }
    Err(Error::InvalidRep("could not diagonalize U_T to tolerance".into()))
}

/// Matrix of `word` under `rep`; multiplicative in concatenation of words.
pub fn evaluate_rep(rep: &UnitaryRep, word: &GroupWord) -> CMatrix {
    match word {
        GroupWord::S => rep.us.clone(),
        GroupWord::TPower(n) => rep.t_power(*n),
        GroupWord::Mixed(ns) => {
            let d = rep.dim();
            ns.iter().fold(CMatrix::identity(d, d), |acc, &n| acc * &rep.us * rep.t_power(n))
        }
    }
}

/// Representation induced from the trivial character of `⟨T_w, S T_w S⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedRep {
    pub rep: UnitaryRep,
    /// The one-dimensional summands (trivial, sign).
    pub summands: [UnitaryRep; 2],
}

pub fn induce_from_index2(w: f64) -> Result<InducedRep> {
    check_width(w)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    // Cosets {H, SH}: T fixes both (it lies in H and S T S ∈ H), S swaps them.
    let us = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let ut = CMatrix::identity(2, 2);
    let rep = UnitaryRep::from_matrices(us, ut, "induced-index2")?;
    Ok(InducedRep { rep, summands: [UnitaryRep::trivial(), UnitaryRep::sign()] })
}
