use std::f64::consts::{PI, TAU};

use super::hurwitz::{hurwitz_complex, EulerMaclaurin};
use super::{ln_gamma, ln_sin_pi, CompensatedSum};
use crate::{Error, Result, C64};

/// Width of the neighbourhood of `ℤ≥0` where the continuation formula loses accuracy.
const NEAR_INTEGER: f64 = 0.05;
/// Cap on the explicit terms of an Euler–Boole evaluation.
const MAX_DIRECT_TERMS: f64 = 2.0e6;
const LAMBDA_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaMethod {
    /// Accelerated summation of the defining series.
    Direct,
    /// Hurwitz-zeta based continuation formula.
    Continuation,
    Auto,
}

/// A point evaluation of `F(λ, σ) = Σ_{n≥1} e^{2πinλ} n^{-σ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicZetaQuery {
    lambda: f64,
    pub sigma: C64,
    pub method: ZetaMethod,
}

impl PeriodicZetaQuery {
    pub fn new(lambda: f64, sigma: C64, method: ZetaMethod) -> Self {
        Self { lambda: reduce(lambda), sigma, method }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

pub(crate) fn reduce(lambda: f64) -> f64 {
    let r = lambda.rem_euclid(1.0);
    if r < LAMBDA_SNAP || 1.0 - r < LAMBDA_SNAP {
        0.0
    } else {
        r
    }
}

/// `F(λ, σ)` with automatic method selection.
pub fn periodic_zeta(lambda: f64, sigma: C64) -> Result<C64> {
    periodic_zeta_with(&PeriodicZetaQuery::new(lambda, sigma, ZetaMethod::Auto))
}

pub fn periodic_zeta_with(query: &PeriodicZetaQuery) -> Result<C64> {
    let (lambda, sigma) = (query.lambda, query.sigma);
    if !(sigma.re.is_finite() && sigma.im.is_finite()) {
        return Err(Error::domain("non-finite order"));
    }
    let near_integer = distance_to_nonnegative_integer(sigma) < NEAR_INTEGER;
    if lambda == 0.0 {
        if sigma == C64::new(1.0, 0.0) {
            return Err(Error::Pole { function: "periodic_zeta", at: sigma });
        }
        let use_functional = match query.method {
            ZetaMethod::Direct => false,
            ZetaMethod::Continuation => !near_integer,
            ZetaMethod::Auto => sigma.re < -0.5,
        };
        return if use_functional { riemann_functional(sigma) } else { riemann_em(sigma) };
    }
    let use_jonquiere = match query.method {
        ZetaMethod::Direct => false,
        ZetaMethod::Continuation => !near_integer,
        ZetaMethod::Auto => sigma.re <= 1.5 && !near_integer,
    };
    if use_jonquiere {
        jonquiere(lambda, sigma)
    } else {
        Ok(C64::from_polar(1.0, TAU * lambda) * lerch_phi(lambda, sigma, C64::new(1.0, 0.0))?)
    }
}

fn distance_to_nonnegative_integer(z: C64) -> f64 {
    let n = z.re.round().max(0.0);
    (z - n).norm()
}

fn riemann_em(sigma: C64) -> Result<C64> {
    hurwitz_complex(sigma, C64::new(1.0, 0.0), &EulerMaclaurin::default())
}

/// `ζ(σ) = 2^σ π^{σ-1} sin(πσ/2) Γ(1-σ) ζ(1-σ)`.
fn riemann_functional(sigma: C64) -> Result<C64> {
    if sigma.im == 0.0 && sigma.re < 0.0 && sigma.re.rem_euclid(2.0) == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let one = C64::new(1.0, 0.0);
    let reflected = riemann_em(one - sigma)?;
    let log_factor =
        sigma * 2f64.ln() + (sigma - 1.0) * PI.ln() + ln_sin_pi(sigma / 2.0) + ln_gamma(one - sigma);
    Ok(log_factor.exp() * reflected)
}

/// `Γ(1-σ)(2π)^{σ-1}[e^{iπ(1-σ)/2} ζ(1-σ,λ) + e^{-iπ(1-σ)/2} ζ(1-σ,1-λ)]` for `0 < λ < 1`.
fn jonquiere(lambda: f64, sigma: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let u = one - sigma;
    let params = EulerMaclaurin::default();
    let z_plus = hurwitz_complex(u, C64::new(lambda, 0.0), &params)?;
    let z_minus = hurwitz_complex(u, C64::new(1.0 - lambda, 0.0), &params)?;
    let base = ln_gamma(u) - u * TAU.ln();
    let half = C64::i() * (PI / 2.0) * u;
    Ok((base + half).exp() * z_plus + (base - half).exp() * z_minus)
}

/// `Φ(λ, s, q) = Σ_{k≥0} e^{2πikλ} (k + q)^{-s}` for `Re q > 0`, continued in `s`.
///
/// For `λ ∉ ℤ` the series is summed explicitly up to a shift `Q` and the rest is
/// replaced by the Euler–Boole expansion built on `1/(1 - e^{2πiλ} e^t)`; for `λ = 0`
/// this is the Hurwitz zeta function.
pub fn lerch_phi(lambda: f64, s: C64, q: C64) -> Result<C64> {
    if !(q.re > 0.0 && q.re.is_finite() && q.im.is_finite()) {
        return Err(Error::domain(format!("Lerch shift must have positive real part, got {q}")));
    }
    let lambda = reduce(lambda);
    if lambda == 0.0 {
        return hurwitz_complex(s, q, &EulerMaclaurin::default());
    }
    let rho = TAU * lambda.min(1.0 - lambda);
    let q_min = 2.0 * (s.norm() + 60.0) / rho;
    let k0 = (q_min - q.re).max(0.0).ceil();
    if k0 > MAX_DIRECT_TERMS {
        return Err(Error::Resource(format!(
            "Lerch evaluation at λ = {lambda} would need {k0:.0} explicit terms"
        )));
    }
    let k0 = k0 as usize;
    let mut acc = CompensatedSum::default();
    for k in 0..k0 {
        let phase = C64::from_polar(1.0, TAU * (k as f64 * lambda).fract());
        acc.add(phase * (-s * (q + k as f64).ln()).exp());
    }
    let big_q = q + k0 as f64;
    let z = C64::from_polar(1.0, TAU * (k0 as f64 * lambda).fract());
    let tail = euler_boole(C64::from_polar(1.0, TAU * lambda), s, big_q);
    acc.add(z * (-s * big_q.ln()).exp() * tail);
    Ok(acc.value())
}

/// `Σ_j b_j (-1)^j (s)_j` with `b_j = a_j Q^{-j}` and `Σ a_j t^j = 1/(1 - z e^t)`.
fn euler_boole(z: C64, s: C64, big_q: C64) -> C64 {
    const MAX_TERMS: usize = 600;
    let inv_q = big_q.inv();
    let mut b: Vec<C64> = Vec::with_capacity(64);
    b.push((1.0 - z).inv());
    let mut total = CompensatedSum::default();
    let mut rising = C64::new(1.0, 0.0);
    let mut small_run = 0;
    for j in 0..MAX_TERMS {
        if j > 0 {
            // f' = f² - f  ⇒  (k+1) a_{k+1} = Σ a_i a_{k-i} - a_k
            let k = j - 1;
            let conv: C64 = (0..=k).map(|i| b[i] * b[k - i]).sum();
            b.push((conv - b[k]) * inv_q / j as f64);
            rising *= -(s + (j - 1) as f64);
        }
        let term = b[j] * rising;
        total.add(term);
        if term.norm() <= 1e-18 * total.value().norm() {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    total.value()
}

/// Lerch zeta `H(z, s, λ) = Σ_{n≥1} e^{2πinλ} (n + z)^{-s}` for `|z| < 1`.
///
/// Evaluated through its Taylor series in `z`, whose coefficients are periodic
/// zeta values; this gives the continuation in `s`.
pub fn lerch(z: C64, s: C64, lambda: f64) -> Result<C64> {
    if z.norm().is_nan() || z.norm() >= 1.0 {
        return Err(Error::domain(format!("|z| must be below 1, got {}", z.norm())));
    }
    let lambda = reduce(lambda);
    if z == C64::new(0.0, 0.0) {
        return periodic_zeta(lambda, s);
    }
    let mut coefficient = C64::new(1.0, 0.0);
    let mut acc = CompensatedSum::default();
    const MAX_TERMS: usize = 20_000;
    for j in 0..MAX_TERMS {
        if j > 0 {
            coefficient *= -(s + (j - 1) as f64) * z / j as f64;
        }
        let term = coefficient * periodic_zeta(lambda, s + j as f64)?;
        acc.add(term);
        let ratio = z.norm() * (s + j as f64).norm() / (j + 1) as f64;
        if ratio < 0.9 {
            // |F(λ, s+j)| is bounded by ζ(2) once Re(s+j) ≥ 2
            let bound = coefficient.norm() * 1.7 * ratio / (1.0 - ratio);
            if (s.re + j as f64) >= 2.0 && bound <= 1e-14 * acc.value().norm() {
                return Ok(acc.value());
            }
        }
    }
    Err(Error::Resource(format!("Lerch Taylor series at |z| = {} did not converge", z.norm())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::hurwitz_zeta;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Plain partial sum with the alternating average of the last two partial sums.
    fn brute(lambda: f64, s: C64, shift: C64, n: usize) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for k in 1..=n {
            let phase = C64::from_polar(1.0, TAU * (k as f64 * lambda).fract());
            sum += phase * (-s * (shift + k as f64).ln()).exp();
        }
        sum
    }

    #[test]
    fn alternating_and_riemann() {
        let v = periodic_zeta(0.5, c(2.0, 0.0)).unwrap();
        assert!((v.re + PI * PI / 12.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        assert!((v.re + 0.8224670334).abs() < 1e-10);
        let v = periodic_zeta(0.0, c(2.0, 0.0)).unwrap();
        assert!((v.re - 1.6449340668).abs() < 1e-10);
        assert!(matches!(periodic_zeta(0.0, c(1.0, 0.0)), Err(Error::Pole { .. })));
        // ζ(-2) = 0, ζ(-3) = 1/120 through the functional equation
        assert_eq!(periodic_zeta(0.0, c(-2.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!((periodic_zeta(0.0, c(-3.0, 0.0)).unwrap() - 1.0 / 120.0).norm() < 1e-13);
    }

    #[test]
    fn jonquiere_matches_summation_on_critical_line() {
        let sigma = c(0.5, 10.0);
        let lambda = 1.0 / 3.0;
        let direct = periodic_zeta_with(&PeriodicZetaQuery::new(lambda, sigma, ZetaMethod::Direct)).unwrap();
        let cont = periodic_zeta_with(&PeriodicZetaQuery::new(lambda, sigma, ZetaMethod::Continuation)).unwrap();
        assert!((direct - cont).norm() < 1e-8, "{direct} vs {cont}");
    }

    #[test]
    fn removable_points() {
        // F(λ, 1) = -ln(1 - e^{2πiλ}), F(λ, 0) = e^{2πiλ}/(1 - e^{2πiλ})
        let lambda = 0.3;
        let z = C64::from_polar(1.0, TAU * lambda);
        let v1 = periodic_zeta(lambda, c(1.0, 0.0)).unwrap();
        assert!((v1 + (1.0 - z).ln()).norm() < 1e-12);
        let v0 = periodic_zeta(lambda, c(0.0, 0.0)).unwrap();
        assert!((v0 - z / (1.0 - z)).norm() < 1e-12);
        let near = periodic_zeta(lambda, c(1.0 + 1e-9, 0.0)).unwrap();
        assert!((near - v1).norm() < 1e-7);
    }

    #[test]
    fn overlap_grid_consistency() {
        for (i, re) in [1.6, 2.0, 2.5, 3.0].iter().enumerate() {
            for im in [-50.0, -7.0, 0.3, 12.0, 50.0] {
                let lambda = [0.1, 0.25, 0.5, 0.77][i];
                let s = c(*re, im);
                let d = periodic_zeta_with(&PeriodicZetaQuery::new(lambda, s, ZetaMethod::Direct)).unwrap();
                let j = periodic_zeta_with(&PeriodicZetaQuery::new(lambda, s, ZetaMethod::Continuation)).unwrap();
                assert!((d - j).norm() < 1e-8, "λ={lambda} σ={s}: {d} vs {j}");
            }
        }
    }

    #[test]
    fn residue_at_one() {
        for dir in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)] {
            let eps = dir * 1e-7;
            let v = periodic_zeta(0.0, c(1.0, 0.0) + eps).unwrap();
            assert!((v * eps - 1.0).norm() < 1e-6);
        }
    }

    #[test]
    fn phi_against_brute_force() {
        let s = c(2.5, 4.0);
        let v = lerch_phi(0.25, s, c(1.3, 0.0)).unwrap();
        // brute sums from k = 1, so it carries one extra phase factor.
        let b = brute(0.25, s, c(0.3, 0.0), 400_000);
        let v = v * C64::from_polar(1.0, TAU * 0.25);
        assert!((v - b).norm() < 1e-9, "{v} vs {b}");
    }

    #[test]
    fn lerch_special_cases() {
        for (s, lambda) in [(c(2.0, 1.0), 0.0), (c(0.3, 7.0), 0.4), (c(-0.5, 2.0), 0.9)] {
            let h = lerch(c(0.0, 0.0), s, lambda).unwrap();
            assert!((h - periodic_zeta(lambda, s).unwrap()).norm() < 1e-14);
        }
        let h = lerch(c(0.2, 0.0), c(3.0, 0.0), 0.0).unwrap();
        let expected = hurwitz_zeta(c(3.0, 0.0), 1.2).unwrap();
        assert!((h - expected).norm() < 1e-12);
        assert!(matches!(lerch(c(1.0, 0.0), c(2.0, 0.0), 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn lerch_against_direct_summation() {
        let s = c(2.5, 4.0);
        let z = c(0.3, 0.0);
        let h = lerch(z, s, 0.25).unwrap();
        let b = brute(0.25, s, z, 1_000_000);
        assert!((h - b).norm() < 1e-9, "{h} vs {b}");
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(lambda in 0.0f64..1.0, re in -1.0f64..4.0, im in -30.0f64..30.0) {
            let s = c(re, im);
            prop_assume!((s - 1.0).norm() > 1e-3);
            let lhs = periodic_zeta(lambda, s).unwrap().conj();
            let rhs = periodic_zeta(1.0 - lambda, s.conj()).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }

        #[test]
        fn derivative_in_z(lambda in 0.05f64..0.95, re in 0.2f64..3.0, im in -10.0f64..10.0, x in -0.5f64..0.5) {
            let s = c(re, im);
            let eps = 1e-5;
            let z = c(x, 0.1);
            let fd = (lerch(z + eps, s, lambda).unwrap() - lerch(z - eps, s, lambda).unwrap()) / (2.0 * eps);
            let exact = -s * lerch(z, s + 1.0, lambda).unwrap();
            prop_assert!((fd - exact).norm() <= 1e-7 * exact.norm().max(1.0));
        }

        #[test]
        fn continuation_agrees_in_overlap(lambda in 0.02f64..0.98, re in 1.6f64..3.0, im in -50.0f64..50.0) {
            let s = c(re, im);
            let d = periodic_zeta_with(&PeriodicZetaQuery::new(lambda, s, ZetaMethod::Direct)).unwrap();
            let j = periodic_zeta_with(&PeriodicZetaQuery::new(lambda, s, ZetaMethod::Continuation)).unwrap();
            prop_assert!((d - j).norm() < 1e-8);
        }
    }
}
