use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::CMatrix;
use crate::group::{hull_endpoint, UnitaryRep};
use crate::specfun::{hurwitz_zeta, lerch_phi};
use crate::{Error, Result, C64};

/// Chebyshev collocation of the transfer operator on the segment `[-R, R]`.
///
/// The Taylor discretization loses accuracy for large `|Im s|` because its entries
/// grow like `e^{2|t| arcsin(R/w)}`; point values stay of moderate size. Branches
/// `|n| ≤ N0` act by interpolation at the images of the nodes; the rest act through
/// the Taylor coefficients of the interpolant at 0 and shifted Lerch sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationParams {
    pub nodes: usize,
    pub branches: usize,
    pub tail_degree: usize,
    pub r: f64,
}

impl CollocationParams {
    /// `n = ceil(0.75|t|) + 50` nodes and `N0 = max(50, 2n)` explicit branches.
    pub fn for_height(t: f64, w: f64) -> Result<Self> {
        let nodes = (0.75 * t.abs()).ceil() as usize + 50;
        Ok(Self { nodes, branches: (2 * nodes).max(50), tail_degree: 16, r: default_radius(w)? })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self.branches = (2 * nodes).max(50);
        self
    }
}

fn default_radius(w: f64) -> Result<f64> {
    Ok((hull_endpoint(w)? + 1.0) / 2.0)
}

fn nodes(n: usize, r: f64) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|i| {
            let theta = PI * (i as f64 + 0.5) / n as f64;
            let weight = if i % 2 == 0 { theta.sin() } else { -theta.sin() };
            (r * theta.cos(), weight)
        })
        .unzip()
}

/// Row of Lagrange basis values `ℓ_j(y)` by the barycentric formula.
fn lagrange_row(y: f64, xs: &[f64], weights: &[f64], out: &mut [f64]) {
    if let Some(hit) = xs.iter().position(|x| (y - x).abs() < 1e-15) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[hit] = 1.0;
        return;
    }
    let mut total = 0.0;
    for ((o, x), w) in out.iter_mut().zip(xs).zip(weights) {
        *o = w / (y - x);
        total += *o;
    }
    out.iter_mut().for_each(|v| *v /= total);
}

/// `T[m][j]`: Taylor coefficient of `z^m` at 0 of the Lagrange polynomial `ℓ_j`, for `m < m0`.
fn lagrange_taylor(n: usize, m0: usize, r: f64) -> Vec<Vec<f64>> {
    // ℓ_j = Σ_k c_{kj} T_k(x/R) with c_{kj} = (2/n) cos(kθ_j), halved for k = 0.
    let theta: Vec<f64> = (0..n).map(|i| PI * (i as f64 + 0.5) / n as f64).collect();
    // Monomial coefficients (degrees < m0) of T_k.
    let mut prev = vec![0.0; m0];
    let mut cur = vec![0.0; m0];
    prev[0] = 1.0;
    if m0 > 1 {
        cur[1] = 1.0;
    }
    let mut out = vec![vec![0.0; n]; m0];
    for k in 0..n {
        let poly: Vec<f64> = match k {
            0 => prev.clone(),
            1 => cur.clone(),
            _ => {
                let mut next: Vec<f64> = prev.iter().map(|v| -v).collect();
                for i in 1..m0 {
                    next[i] += 2.0 * cur[i - 1];
                }
                prev = std::mem::replace(&mut cur, next);
                cur.clone()
            }
        };
        for (j, th) in theta.iter().enumerate() {
            let mut coeff = 2.0 / n as f64 * (k as f64 * th).cos();
            if k == 0 {
                coeff /= 2.0;
            }
            for m in 0..m0 {
                out[m][j] += poly[m] * coeff;
            }
        }
    }
    for (m, row) in out.iter_mut().enumerate() {
        let scale = r.powi(-(m as i32));
        row.iter_mut().for_each(|v| *v *= scale);
    }
    out
}

/// Scalar kernel `Σ_n e^{2πinλ} (base_n)^{-2s} ℓ_j(γ_n x_i)` plus tails, for one eigenphase `λ`.
fn scalar_kernel(s: C64, w: f64, lambda: f64, p: &CollocationParams) -> Result<CMatrix> {
    let n = p.nodes;
    let (xs, weights) = nodes(n, p.r);
    let n0 = p.branches as i64;
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = xs[i];
            let mut row = vec![C64::new(0.0, 0.0); n];
            let mut ell = vec![0.0; n];
            for nn in (1..=n0).flat_map(|k| [k, -k]) {
                let base = if nn > 0 { x + nn as f64 * w } else { (-nn) as f64 * w - x };
                let phase = C64::from_polar(1.0, TAU * (nn as f64 * lambda).rem_euclid(1.0));
                let factor = phase * (-2.0 * s * base.ln()).exp();
                lagrange_row(-1.0 / (x + nn as f64 * w), &xs, &weights, &mut ell);
                for (r, l) in row.iter_mut().zip(&ell) {
                    *r += factor * *l;
                }
            }
            row
        })
        .collect();
    let taylor = lagrange_taylor(n, p.tail_degree, p.r);
    let tails: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..p.tail_degree)
                .map(|m| tail_sum(s, w, lambda, n0 as usize, xs[i], m))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let tail: C64 = (0..p.tail_degree).map(|m| tails[i][m] * taylor[m][j]).sum();
        rows[i][j] + tail
    }))
}

/// Branches `|n| > N0` applied to `z^m` and evaluated at `x`:
/// `(-1)^m Σ_{n>N0} e^{2πinλ}(x+nw)^{-a} + Σ_{n>N0} e^{2πin(1-λ)}(nw-x)^{-a}`, `a = 2s+m`.
fn tail_sum(s: C64, w: f64, lambda: f64, n0: usize, x: f64, m: usize) -> Result<C64> {
    let a = 2.0 * s + m as f64;
    let w_pow = (-a * w.ln()).exp();
    let start = (n0 + 1) as f64;
    let (plus, minus) = if lambda == 0.0 {
        (hurwitz_zeta(a, start + x / w)?, hurwitz_zeta(a, start - x / w)?)
    } else {
        let ph = C64::from_polar(1.0, TAU * (start * lambda).rem_euclid(1.0));
        let mh = C64::from_polar(1.0, TAU * (start * (1.0 - lambda)).rem_euclid(1.0));
        (
            ph * lerch_phi(lambda, a, C64::new(start + x / w, 0.0))?,
            mh * lerch_phi(1.0 - lambda, a, C64::new(start - x / w, 0.0))?,
        )
    };
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(w_pow * (plus * sign + minus))
}

/// Collocation matrix of size `d·n`, index `k·n + i` (component `k`, node `i`).
pub fn collocation_matrix(s: C64, w: f64, rep: &UnitaryRep, p: &CollocationParams) -> Result<CMatrix> {
    let r_min = hull_endpoint(w)?;
    if !(p.r > r_min && p.r < 1.0) || p.nodes < 2 || p.branches < 1 {
        return Err(Error::domain("invalid collocation parameters"));
    }
    let d = rep.dim();
    let size = d * p.nodes;
    if size > 4000 {
        return Err(Error::Resource(format!("collocation size {size} too large")));
    }
    let s_hat = rep.s_hat();
    let mut kernels: HashMap<u64, CMatrix> = HashMap::new();
    for &l in rep.lambdas() {
        if let std::collections::hash_map::Entry::Vacant(e) = kernels.entry(l.to_bits()) {
            e.insert(scalar_kernel(s, w, l, p)?);
        }
    }
    let n = p.nodes;
    let mut out = CMatrix::zeros(size, size);
    for (k, l) in rep.lambdas().iter().enumerate() {
        let kernel = &kernels[&l.to_bits()];
        for lc in 0..d {
            let sh = s_hat[(k, lc)];
            if sh == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(k * n + i, lc * n + j)] = kernel[(i, j)] * sh;
                }
            }
        }
    }
    Ok(out)
}

/// `det(1 - K)` for the collocation matrix.
pub fn collocation_det(s: C64, w: f64, rep: &UnitaryRep, p: &CollocationParams) -> Result<C64> {
    let k = collocation_matrix(s, w, rep, p)?;
    Ok(super::linalg::det_one_minus(&k))
}
