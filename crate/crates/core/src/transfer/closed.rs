use std::collections::HashMap;

use rayon::prelude::*;

use super::{Basis, BranchPart, CMatrix, DiscretizationParams, TransferMatrix};
use crate::specfun::periodic_zeta;
use crate::{Error, Result, C64};

/// Distance from the pole `2s + m + j = 1` below which entries are refused.
pub(crate) const POLE_GUARD: f64 = 1e-8;

/// Closed-form transfer matrix in the Bergman basis.
///
/// Entries are periodic zeta values, which makes this the meromorphic
/// continuation in `s`; valid off the poles `2s + m + j = 1` of components with `λ_k = 0`.
pub fn build_closed(s: C64, params: &DiscretizationParams) -> Result<TransferMatrix> {
    Ok(build_raw(s, params, BranchPart::Full)?.to_basis(Basis::Bergman))
}

/// The `n ≥ 1` or `n ≤ -1` half of the branch sum, in the Bergman basis.
pub fn branch_matrix(s: C64, params: &DiscretizationParams, part: BranchPart) -> Result<TransferMatrix> {
    Ok(build_raw(s, params, part)?.to_basis(Basis::Bergman))
}

/// Per-component series `F(λ_k, 2s+q)` and `F(1-λ_k, 2s+q)` for `q = 0..=2M`.
struct ZetaTable {
    plus: Vec<C64>,
    minus: Vec<C64>,
}

fn zeta_tables(s: C64, params: &DiscretizationParams) -> Result<Vec<ZetaTable>> {
    let lambdas = params.rep.lambdas();
    let qmax = 2 * params.m;
    let mut cache: HashMap<u64, Vec<C64>> = HashMap::new();
    let mut needed: Vec<f64> = Vec::new();
    for (k, &l) in lambdas.iter().enumerate() {
        if l == 0.0 {
            if let Some(q) = (0..=qmax).find(|&q| (2.0 * s + q as f64 - 1.0).norm() < POLE_GUARD) {
                let m = q.min(params.m);
                return Err(Error::MatrixPole { m, j: q - m, k });
            }
        }
        for x in [l, mirror(l)] {
            if !needed.iter().any(|y| y.to_bits() == x.to_bits()) {
                needed.push(x);
            }
        }
    }
    for lambda in needed {
        let values = (0..=qmax)
            .into_par_iter()
            .map(|q| periodic_zeta(lambda, 2.0 * s + q as f64))
            .collect::<Result<Vec<_>>>()?;
        cache.insert(lambda.to_bits(), values);
    }
    Ok(lambdas
        .iter()
        .map(|&l| ZetaTable {
            plus: cache[&l.to_bits()].clone(),
            minus: cache[&mirror(l).to_bits()].clone(),
        })
        .collect())
}

fn mirror(lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        1.0 - lambda
    }
}

/// Raw-Taylor closed form:
/// `A[(j,k),(m,l)] = Ŝ_{kl} (a)_j/j! w^{-(a+j)} [(-1)^{m+j} F(λ_k, a+j) + F(1-λ_k, a+j)]`, `a = 2s+m`.
pub fn build_raw(s: C64, params: &DiscretizationParams, part: BranchPart) -> Result<TransferMatrix> {
    params.validate()?;
    let tables = zeta_tables(s, params)?;
    let d = params.d();
    let s_hat = params.rep.s_hat();
    let ln_w = params.w.ln();
    let size = params.dim();
    let mut a = CMatrix::zeros(size, size);
    let columns: Vec<Vec<C64>> = (0..=params.m)
        .into_par_iter()
        .map(|m| {
            // column block m, entries (j, k) for the scalar factor before Ŝ
            let base = 2.0 * s + m as f64;
            let mut out = vec![C64::new(0.0, 0.0); (params.m + 1) * d];
            let mut poch = C64::new(1.0, 0.0);
            for j in 0..=params.m {
                if j > 0 {
                    poch *= (base + (j - 1) as f64) / j as f64;
                }
                let order = base + j as f64;
                let weight = poch * (-order * ln_w).exp();
                let sign = if (m + j) % 2 == 0 { 1.0 } else { -1.0 };
                for (k, t) in tables.iter().enumerate() {
                    let q = m + j;
                    let bracket = match part {
                        BranchPart::Full => t.plus[q] * sign + t.minus[q],
                        BranchPart::Positive => t.plus[q] * sign,
                        BranchPart::Negative => t.minus[q],
                    };
                    out[j * d + k] = weight * bracket;
                }
            }
            out
        })
        .collect();
    for (m, col) in columns.iter().enumerate() {
        for j in 0..=params.m {
            for k in 0..d {
                let v = col[j * d + k];
                for l in 0..d {
                    a[(params.index(j, k), params.index(m, l))] = s_hat[(k, l)] * v;
                }
            }
        }
    }
    Ok(TransferMatrix {
        a,
        s,
        params: params.clone(),
        basis: Basis::RawTaylor,
        part,
        tail_bound: None,
        tail_warning: false,
    })
}
