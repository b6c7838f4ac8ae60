use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{Basis, BranchPart, CMatrix, DiscretizationParams, TransferMatrix};
use crate::{Error, Result, C64};

/// Tail estimates above this set the warning flag.
const TAIL_TOLERANCE: f64 = 1e-8;

/// Transfer matrix by explicit summation over `1 ≤ |n| ≤ N_direct`, Bergman basis.
///
/// Only valid for `Re s > 1/2`. Each branch contributes the Taylor coefficients of
/// `(z + nw)^{-2s-m}` (for `n ≥ 1`) or `(|n|w - z)^{-2s-m}` (for `n ≤ -1`). For
/// components with `λ_k = 0` the remaining non-oscillating tail is added by the midpoint
/// rule; `tail_bound` estimates what is left.
pub fn build_direct(s: C64, params: &DiscretizationParams) -> Result<TransferMatrix> {
    params.validate()?;
    if s.re <= 0.5 {
        return Err(Error::Regime(format!("direct summation needs Re s > 1/2, got {s}")));
    }
    let n_max = params.n_direct.max(1);
    let w = params.w;
    let d = params.d();
    let qmax = 2 * params.m;
    let lambdas = params.rep.lambdas().to_vec();
    // sums[k].0[q] = Σ_{n≥1} e^{2πinλ_k} (nw)^{-(2s+q)}, .1 the same with 1-λ_k
    let sums: Vec<(Vec<C64>, Vec<C64>)> = lambdas
        .par_iter()
        .map(|&lambda| {
            let plus = branch_power_sums(s, w, lambda, n_max, qmax);
            let minus = branch_power_sums(s, w, 1.0 - lambda, n_max, qmax);
            (plus, minus)
        })
        .collect();
    let s_hat = params.rep.s_hat();
    let size = params.dim();
    let mut a = CMatrix::zeros(size, size);
    for m in 0..=params.m {
        let order = 2.0 * s + m as f64;
        // coefficient of z^j in (z + x)^{-a} is (-1)^j (a)_j/j! x^{-a-j}
        let mut binom = C64::new(1.0, 0.0);
        for j in 0..=params.m {
            if j > 0 {
                binom *= (order + (j - 1) as f64) / j as f64;
            }
            let sign = if (m + j) % 2 == 0 { 1.0 } else { -1.0 };
            for k in 0..d {
                let (plus, minus) = &sums[k];
                let v = binom * (plus[m + j] * sign + minus[m + j]);
                for l in 0..d {
                    a[(params.index(j, k), params.index(m, l))] = s_hat[(k, l)] * v;
                }
            }
        }
    }
    // Σ_{n>N} (nw - R)^{-2Re s - m}, largest at m = 0; counted for both branch signs.
    let sigma = 2.0 * s.re;
    let edge = (n_max as f64 + 0.5) * w - params.r;
    let tail_bound = 2.0 * edge.powf(1.0 - sigma) / (w * (sigma - 1.0));
    let raw = TransferMatrix {
        a,
        s,
        params: params.clone(),
        basis: Basis::RawTaylor,
        part: BranchPart::Full,
        tail_bound: Some(tail_bound),
        tail_warning: tail_bound > TAIL_TOLERANCE,
    };
    Ok(raw.to_basis(Basis::Bergman))
}

/// `Σ_{n=1}^{N} e^{2πinλ} (nw)^{-(2s+q)}` for `q = 0..=qmax`, plus the midpoint tail when `λ = 0`.
fn branch_power_sums(s: C64, w: f64, lambda: f64, n_max: usize, qmax: usize) -> Vec<C64> {
    let lambda = lambda.rem_euclid(1.0);
    let integral_tail = lambda == 0.0 || lambda == 1.0;
    let mut out = vec![C64::new(0.0, 0.0); qmax + 1];
    // Sum from the smallest terms upwards.
    for n in (1..=n_max).rev() {
        let x = n as f64 * w;
        let phase = C64::from_polar(1.0, TAU * (n as f64 * lambda).fract());
        let mut term = phase * (-2.0 * s * x.ln()).exp();
        let inv = 1.0 / x;
        for slot in out.iter_mut() {
            *slot += term;
            term *= inv;
        }
    }
    if integral_tail {
        // Σ_{n>N} (nw)^{-σ} ≈ ∫_{N+1/2}^∞ (xw)^{-σ} dx = w^{-σ} (N+1/2)^{1-σ} / (σ-1)
        let edge = n_max as f64 + 0.5;
        for (q, slot) in out.iter_mut().enumerate() {
            let sigma = 2.0 * s + q as f64;
            *slot += (-sigma * w.ln() + (1.0 - sigma) * edge.ln()).exp() / (sigma - 1.0);
        }
    }
    out
}
