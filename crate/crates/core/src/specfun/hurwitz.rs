use super::CompensatedSum;
use crate::{Error, Result, C64};

/// `B_{2j} / (2j)!` for `j = 1..=12`.
const BERNOULLI_OVER_FACTORIAL: [f64; 12] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
    43_867.0 / 798.0 / 6_402_373_705_728_000.0,
    -174_611.0 / 330.0 / 2_432_902_008_176_640_000.0,
    854_513.0 / 138.0 / 1.124_000_727_777_607_7e21,
    -236_364_091.0 / 2730.0 / 6.204_484_017_332_394e23,
];

/// Euler–Maclaurin parameters for the Hurwitz zeta function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerMaclaurin {
    /// Initial direct terms; `None` means `ceil(max(20, 2|Im s|))`.
    pub direct_terms: Option<usize>,
    /// Bernoulli correction terms, at most 12.
    pub bernoulli_terms: usize,
    /// The last correction must fall below this, relative to the result.
    pub tolerance: f64,
    /// Cap on direct terms when the correction check forces growth.
    pub max_direct_terms: usize,
}

impl Default for EulerMaclaurin {
    fn default() -> Self {
        Self { direct_terms: None, bernoulli_terms: 12, tolerance: 1e-13, max_direct_terms: 4_000_000 }
    }
}

/// `ζ(s, a) = Σ_{n≥0} (n + a)^{-s}`, continued to `s ≠ 1`.
pub fn hurwitz_zeta(s: C64, a: f64) -> Result<C64> {
    hurwitz_zeta_with(s, a, &EulerMaclaurin::default())
}

pub fn hurwitz_zeta_with(s: C64, a: f64, params: &EulerMaclaurin) -> Result<C64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::domain(format!("Hurwitz parameter must be positive, got {a}")));
    }
    hurwitz_complex(s, C64::new(a, 0.0), params)
}

/// Hurwitz zeta with complex shift `a`, `Re a > 0`, using the principal power.
pub(crate) fn hurwitz_complex(s: C64, a: C64, params: &EulerMaclaurin) -> Result<C64> {
    if s == C64::new(1.0, 0.0) {
        return Err(Error::Pole { function: "hurwitz_zeta", at: s });
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::domain("non-finite order"));
    }
    let required = params
        .direct_terms
        .map(|n| n as f64)
        .unwrap_or_else(|| 20f64.max(2.0 * s.im.abs()).ceil());
    // A large shift already supplies part of the distance the asymptotic tail needs.
    let mut n = if params.direct_terms.is_some() {
        required as usize
    } else {
        (required - a.re).max(0.0).ceil() as usize
    };
    let k = params.bernoulli_terms.min(BERNOULLI_OVER_FACTORIAL.len());
    loop {
        let (value, last) = euler_maclaurin(s, a, n, k);
        let x_pow = (-s * (a + n as f64).ln()).exp().norm();
        let scale = value.norm().max(x_pow);
        if last <= params.tolerance * scale || n >= params.max_direct_terms || k == 0 {
            return Ok(value);
        }
        n = (2 * n.max(10)).min(params.max_direct_terms);
    }
}

/// Returns the approximation and the magnitude of the last Bernoulli term.
fn euler_maclaurin(s: C64, a: C64, n: usize, k: usize) -> (C64, f64) {
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        acc.add((-s * (a + i as f64).ln()).exp());
    }
    let x = a + n as f64;
    let ln_x = x.ln();
    let x_ms = (-s * ln_x).exp();
    acc.add(x_ms * x / (s - 1.0));
    acc.add(0.5 * x_ms);
    // term_j = B_{2j}/(2j)! · (s)_{2j-1} · X^{-s-2j+1}
    let inv_x2 = (x * x).inv();
    let mut factor = s * x_ms / x;
    let mut last = 0.0;
    for (j, b) in BERNOULLI_OVER_FACTORIAL.iter().take(k).enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            factor *= (s + (m - 1.0)) * (s + m) * inv_x2;
        }
        let term = factor * *b;
        acc.add(term);
        last = term.norm();
    }
    (acc.value(), last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn classical_values() {
        assert!((hurwitz_zeta(c(2.0, 0.0), 1.0).unwrap() - PI * PI / 6.0).norm() < 1e-12);
        assert!((hurwitz_zeta(c(2.0, 0.0), 1.0).unwrap().re - 1.6449340668).abs() < 1e-10);
        assert!((hurwitz_zeta(c(-1.0, 0.0), 1.0).unwrap() + 1.0 / 12.0).norm() < 1e-12);
        assert!((hurwitz_zeta(c(0.0, 0.0), 0.3).unwrap() - 0.2).norm() < 1e-12);
        // ζ(-1, a) = -(a² - a + 1/6)/2
        let a = 0.7;
        let expected = -(a * a - a + 1.0 / 6.0) / 2.0;
        assert!((hurwitz_zeta(c(-1.0, 0.0), a).unwrap() - expected).norm() < 1e-12);
        // ζ(2, 1/2) = π²/2
        assert!((hurwitz_zeta(c(2.0, 0.0), 0.5).unwrap() - PI * PI / 2.0).norm() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(hurwitz_zeta(c(1.0, 0.0), 1.0), Err(Error::Pole { .. })));
        assert!(matches!(hurwitz_zeta(c(2.0, 0.0), 0.0), Err(Error::Domain(_))));
        assert!(matches!(hurwitz_zeta(c(2.0, 0.0), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn first_riemann_zero() {
        let z = hurwitz_zeta(c(0.5, 14.134_725_141_734_693), 1.0).unwrap();
        assert!(z.norm() < 1e-10);
    }

    #[test]
    fn shift_relation_at_large_height() {
        // ζ(s, a) - ζ(s, a+1) = a^{-s}
        for t in [50.0, 200.0, 500.0] {
            let s = c(0.4, t);
            let a = 0.35;
            let lhs = hurwitz_zeta(s, a).unwrap() - hurwitz_zeta(s, a + 1.0).unwrap();
            let rhs = (-s * a.ln()).exp();
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm(), "t = {t}");
        }
    }

    #[test]
    fn direct_sum_oracle() {
        // Absolutely convergent case against a long plain sum with an integral tail.
        let s = c(3.5, 2.0);
        let a = 1.3;
        let n = 200_000;
        let mut sum = C64::new(0.0, 0.0);
        for k in (0..n).rev() {
            sum += (-s * (a + k as f64).ln()).exp();
        }
        let x = a + n as f64 - 0.5;
        sum += (-(s - 1.0) * x.ln()).exp() / (s - 1.0);
        let v = hurwitz_zeta(s, a).unwrap();
        assert!((v - sum).norm() < 1e-12 * v.norm());
    }

    #[test]
    fn large_real_order() {
        let v = hurwitz_zeta(c(140.0, 0.0), 1.0).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        let v = hurwitz_zeta(c(40.0, 30.0), 2.0).unwrap();
        let expected: C64 = (2..40).map(|k| (-c(40.0, 30.0) * (k as f64).ln()).exp()).sum();
        assert!((v - expected).norm() < 1e-12 * expected.norm());
    }
}
