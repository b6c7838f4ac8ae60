use std::f64::consts::TAU;

use super::DiscretizationParams;
use crate::{Error, Result, C64};

/// Attracting fixed point of `γ_n` in `(-1, 1)`, the root of `x² + nwx + 1 = 0`.
pub fn fixed_point(n: i64, w: f64) -> f64 {
    let nw = (n.unsigned_abs() as f64) * w;
    let x = -2.0 / (nw + (nw * nw - 4.0).sqrt());
    if n > 0 {
        x
    } else {
        -x
    }
}

/// `Σ_{0<|n|≤N} (x_n²)^s / (1 - x_n²) · tr(ρ(T)^{-n} ρ(S))`, the fixed-point trace formula.
///
/// Components with `λ_k = 0` get the midpoint-rule tail of the dominant `(nw)^{-2s}` part.
pub fn trace_oracle(s: C64, params: &DiscretizationParams, n_max: usize) -> Result<C64> {
    if s.re <= 0.5 {
        return Err(Error::Regime(format!("trace formula needs Re s > 1/2, got {s}")));
    }
    let w = params.w;
    let s_hat = params.rep.s_hat();
    let lambdas = params.rep.lambdas();
    let diag: Vec<C64> = (0..lambdas.len()).map(|k| s_hat[(k, k)]).collect();
    // tr(ρ(T)^{-n} ρ(S)) = Σ_k e^{2πinλ_k} Ŝ_kk
    let twisted_trace = |n: i64| -> C64 {
        lambdas
            .iter()
            .zip(&diag)
            .map(|(l, sk)| C64::from_polar(1.0, TAU * (n as f64 * l).rem_euclid(1.0)) * sk)
            .sum()
    };
    let mut total = C64::new(0.0, 0.0);
    for n in (1..=n_max as i64).rev() {
        let x2 = fixed_point(n, w).powi(2);
        let weight = (s * x2.ln()).exp() / (1.0 - x2);
        total += weight * (twisted_trace(n) + twisted_trace(-n));
    }
    let untwisted: C64 = lambdas
        .iter()
        .zip(&diag)
        .filter(|(l, _)| **l == 0.0)
        .map(|(_, sk)| *sk)
        .sum();
    if untwisted != C64::new(0.0, 0.0) {
        let sigma = 2.0 * s;
        let edge = n_max as f64 + 0.5;
        let tail = (-sigma * w.ln() + (1.0 - sigma) * edge.ln()).exp() / (sigma - 1.0);
        total += 2.0 * tail * untwisted;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{induce_from_index2, UnitaryRep};

    #[test]
    fn first_fixed_point() {
        let x = fixed_point(1, 3.0);
        assert!((x + 0.3819660113).abs() < 1e-10);
        assert!((x * x - 0.1458980338).abs() < 1e-10);
        // γ_1(x) = x and γ_1'(x) = x²
        let g = crate::group::branch_map(1, 3.0).unwrap();
        assert!((g.apply_real(x) - x).abs() < 1e-15);
        let dg = g.derivative(C64::new(x, 0.0)).re;
        assert!((dg - x * x).abs() < 1e-15);
        assert!((fixed_point(-1, 3.0) + x).abs() < 1e-16);
    }

    #[test]
    fn induced_rep_has_zero_twisted_trace() {
        let p = DiscretizationParams::new(3.0, induce_from_index2(3.0).unwrap().rep).unwrap();
        let t = trace_oracle(C64::new(1.2, 0.0), &p, 1000).unwrap();
        assert!(t.norm() < 1e-15);
    }

    #[test]
    fn regime_guard() {
        let p = DiscretizationParams::new(3.0, UnitaryRep::trivial()).unwrap();
        assert!(trace_oracle(C64::new(0.4, 0.0), &p, 10).is_err());
    }
}
