//! The twisted Selberg zeta function as a Fredholm determinant, and its oracles.

use rayon::prelude::*;

use crate::fit::{dyadic_window_maxima, fixed_shape_fit, linear_fit, LinearFit, WindowMax};
use crate::group::{enumerate_primitive_classes, evaluate_rep, induce_from_index2, UnitaryRep};
use crate::transfer::{collocation_det, CollocationParams, DiscretizationParams};
use crate::{Error, Result, C64};

/// Above this height the Taylor discretization is replaced by collocation.
pub const COLLOCATION_HEIGHT: f64 = 20.0;
/// Agreement required between the two resolutions of a convergence check.
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetMethod {
    /// Closed-form Taylor/Bergman matrix.
    Taylor,
    /// Chebyshev collocation with Lerch tails.
    Collocation,
    /// Taylor for `|Im s| ≤ 20`, collocation above.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZetaQuery {
    pub w: f64,
    pub rep: UnitaryRep,
    pub s: C64,
    /// Degree `M` (Taylor) or node count (collocation).
    pub resolution: Option<usize>,
    pub r: Option<f64>,
    pub method: DetMethod,
}

impl ZetaQuery {
    pub fn new(w: f64, rep: UnitaryRep, s: C64) -> Self {
        Self { w, rep, s, resolution: None, r: None, method: DetMethod::Auto }
    }

    pub fn at(&self, s: C64) -> Self {
        Self { s, ..self.clone() }
    }

    fn resolved_method(&self) -> DetMethod {
        match self.method {
            DetMethod::Auto if self.s.im.abs() > COLLOCATION_HEIGHT => DetMethod::Collocation,
            DetMethod::Auto => DetMethod::Taylor,
            m => m,
        }
    }

    /// Degree rule `M = max(40, ceil(6|Im s|^{1/2}) + 40)` or the collocation node rule.
    pub fn default_resolution(&self) -> Result<usize> {
        Ok(match self.resolved_method() {
            DetMethod::Collocation => CollocationParams::for_height(self.s.im, self.w)?.nodes,
            _ => 40usize.max((6.0 * self.s.im.abs().sqrt()).ceil() as usize + 40),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub value: C64,
    /// Resolution of the returned value (the finer of the two).
    pub resolution: usize,
    pub method: DetMethod,
    /// The coarser value agreed to `1e-8` (relative to `max(1, |Z|)`).
    pub converged: bool,
    pub coarse: C64,
}

/// `det(1 - L_{s,ρ})` at one resolution, without a convergence check.
pub fn zeta_at_resolution(q: &ZetaQuery, resolution: usize) -> Result<C64> {
    match q.resolved_method() {
        DetMethod::Collocation => {
            let mut p = CollocationParams::for_height(q.s.im, q.w)?.with_nodes(resolution);
            if let Some(r) = q.r {
                p.r = r;
            }
            collocation_det(q.s, q.w, &q.rep, &p)
        }
        _ => {
            let mut p = DiscretizationParams::new(q.w, q.rep.clone())?;
            if let Some(r) = q.r {
                p = p.radius(r)?;
            }
            crate::transfer::fredholm_det(q.s, &p.degree(resolution)?)
        }
    }
}

/// `Z(s, ρ) = det(1 - L_{s,ρ})` with a resolution-doubling convergence flag.
pub fn zeta_eval(q: &ZetaQuery) -> Result<ZetaValue> {
    let base = match q.resolution {
        Some(n) => n,
        None => q.default_resolution()?,
    };
    let coarse = zeta_at_resolution(q, base)?;
    let (value, resolution) = match zeta_at_resolution(q, base + 20) {
        Ok(v) => (v, base + 20),
        Err(Error::Resource(_)) => {
            return Ok(ZetaValue {
                value: coarse,
                resolution: base,
                method: q.resolved_method(),
                converged: false,
                coarse,
            })
        }
        Err(e) => return Err(e),
    };
    let converged = (value - coarse).norm() <= CONVERGENCE_TOL * value.norm().max(1.0);
    Ok(ZetaValue { value, resolution, method: q.resolved_method(), converged, coarse })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerProduct {
    pub value: C64,
    pub classes: usize,
    pub k_max: usize,
    /// Heuristic size of the factors beyond `ell_max`: `d e^{(δ-σ)ℓ}/((σ-δ)ℓ)`.
    pub tail_estimate: f64,
}

/// Smallest `k_max` with `2d e^{-(σ+k+1)ℓ_min}` below `1e-16`.
pub fn default_k_max(sigma: f64, ell_min: f64, d: usize) -> usize {
    let target = (1e-16 / (2.0 * d as f64)).ln();
    let k = (-target / ell_min - sigma - 1.0).ceil();
    k.max(0.0) as usize
}

/// `Π_{k ≤ k_max} Π_{ℓ(γ) ≤ ell_max} det(1 - ρ(γ) e^{-(s+k)ℓ(γ)})` over primitive classes.
///
/// `k_max = None` picks the depth where further factors fall below double precision.
pub fn euler_product(q: &ZetaQuery, ell_max: f64, k_max: Option<usize>, delta: f64) -> Result<EulerProduct> {
    let sigma = q.s.re;
    if sigma <= delta + 0.05 {
        return Err(Error::Regime(format!(
            "Euler product needs Re s > δ + 0.05 = {}, got {sigma}",
            delta + 0.05
        )));
    }
    let classes = enumerate_primitive_classes(q.w, ell_max)?.classes;
    let d = q.rep.dim();
    let ell_min = crate::group::geodesic_length(&crate::group::GroupWord::Mixed(vec![1]), q.w)?;
    let k_max = k_max.unwrap_or_else(|| default_k_max(sigma, ell_min, d));
    let factors: Vec<C64> = classes
        .par_iter()
        .map(|c| {
            let rho = evaluate_rep(&q.rep, &c.word);
            let id = crate::group::CMatrix::identity(d, d);
            (0..=k_max)
                .map(|k| {
                    let x = (-(q.s + k as f64) * c.length).exp();
                    (&id - &rho * x).determinant()
                })
                .product()
        })
        .collect();
    let value = factors.iter().product();
    let tail_estimate = d as f64 * ((delta - sigma) * ell_max).exp() / ((sigma - delta) * ell_max);
    Ok(EulerProduct { value, classes: classes.len(), k_max, tail_estimate })
}

/// Relative mismatch of `Z_ind = Z_triv · Z_sign` for the index-2 induced representation.
pub fn factorization_check(w: f64, s: C64, r: Option<f64>, resolution: Option<usize>) -> Result<f64> {
    let induced = induce_from_index2(w)?;
    let eval = |rep: &UnitaryRep| -> Result<C64> {
        let q = ZetaQuery { r, resolution, ..ZetaQuery::new(w, rep.clone(), s) };
        let n = match resolution {
            Some(n) => n,
            None => q.default_resolution()?,
        };
        zeta_at_resolution(&q, n)
    };
    let z_ind = eval(&induced.rep)?;
    let product = eval(&induced.summands[0])? * eval(&induced.summands[1])?;
    Ok((z_ind - product).norm() / product.norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthScanResult {
    pub sigma: f64,
    pub t: Vec<f64>,
    /// `None` where the point was skipped (pole or numerical failure).
    pub values: Vec<Option<ZetaValue>>,
    pub log_abs: Vec<f64>,
    pub windows: Vec<WindowMax>,
    /// Slope of `ln(max log|Z|)` against `ln t` over windows with a positive maximum.
    pub beta_fit: Option<LinearFit>,
    /// Offset and RMS residual of `ln(max log|Z|) ≈ c + δ ln t + (2-δ) ln ln t`.
    pub refined_fit: Option<(f64, f64)>,
    pub max_abs_log: f64,
    pub flagged: Vec<f64>,
}

impl GrowthScanResult {
    pub fn beta_hat(&self) -> Option<f64> {
        self.beta_fit.map(|f| f.slope)
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.first().is_none_or(|t| *t < 1.0) {
        return Err(Error::domain("growth scan needs a non-empty grid with t ≥ 1"));
    }
    if t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::domain("t grid must be strictly increasing"));
    }
    Ok(())
}

/// `log|Z(σ+it)|` on a geometric grid with window-maximum exponent fits.
pub fn growth_scan(
    w: f64,
    rep: &UnitaryRep,
    sigma: f64,
    t_grid: &[f64],
    delta: f64,
) -> Result<GrowthScanResult> {
    check_grid(t_grid)?;
    let values: Vec<Option<ZetaValue>> = t_grid
        .par_iter()
        .map(|&t| zeta_eval(&ZetaQuery::new(w, rep.clone(), C64::new(sigma, t))).ok())
        .collect();
    growth_from_values(sigma, t_grid, values, delta)
}

/// The analysis half of [`growth_scan`] for values computed elsewhere.
pub fn growth_from_values(
    sigma: f64,
    t_grid: &[f64],
    values: Vec<Option<ZetaValue>>,
    delta: f64,
) -> Result<GrowthScanResult> {
    check_grid(t_grid)?;
    if values.len() != t_grid.len() {
        return Err(Error::domain("one value per grid point required"));
    }
    let log_abs: Vec<f64> = values.iter().map(|v| v.map_or(f64::NAN, |z| z.value.norm().ln())).collect();
    let flagged = t_grid
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_none_or(|z| !z.converged))
        .map(|(t, _)| *t)
        .collect();
    let windows = dyadic_window_maxima(t_grid, &log_abs);
    let positive: Vec<&WindowMax> = windows.iter().filter(|w| w.max > 0.0).collect();
    let x: Vec<f64> = positive.iter().map(|w| w.center().ln()).collect();
    let y: Vec<f64> = positive.iter().map(|w| w.max.ln()).collect();
    let beta_fit = if positive.len() >= 3 { linear_fit(&x, &y) } else { None };
    let shape: Vec<f64> = positive
        .iter()
        .map(|w| {
            let t = w.center();
            delta * t.ln() + (2.0 - delta) * t.ln().ln()
        })
        .collect();
    let refined_fit = if positive.len() >= 3 { fixed_shape_fit(&y, &shape) } else { None };
    let max_abs_log = log_abs.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(GrowthScanResult {
        sigma,
        t: t_grid.to_vec(),
        values,
        log_abs,
        windows,
        beta_fit,
        refined_fit,
        max_abs_log,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn real_structure_and_convergence() {
        let q = ZetaQuery::new(3.0, UnitaryRep::trivial(), c(0.6, 7.0));
        let a = zeta_eval(&q).unwrap();
        let b = zeta_eval(&q.at(c(0.6, -7.0))).unwrap();
        assert!(a.converged && b.converged);
        assert!((a.value.conj() - b.value).norm() < 1e-10 * a.value.norm().max(1.0));
        // ceil(6√7) + 40 = 56, checked against 76
        assert_eq!(a.resolution, 76);
    }

    #[test]
    fn methods_agree_across_the_switch() {
        let q = ZetaQuery::new(3.0, UnitaryRep::trivial(), c(0.25, 19.0));
        let taylor = zeta_eval(&ZetaQuery { method: DetMethod::Taylor, ..q.clone() }).unwrap();
        let coll = zeta_eval(&ZetaQuery { method: DetMethod::Collocation, ..q }).unwrap();
        assert!((taylor.value - coll.value).norm() < 1e-8 * taylor.value.norm().max(1.0));
    }

    #[test]
    fn euler_product_edge_cases() {
        let q = ZetaQuery::new(3.0, UnitaryRep::trivial(), c(1.5, 0.0));
        let empty = euler_product(&q, 1.0, Some(3), 0.75).unwrap();
        assert_eq!(empty.value, c(1.0, 0.0));
        assert_eq!(empty.classes, 0);
        let two = euler_product(&q, 2.0, Some(0), 0.75).unwrap();
        let l = 2.0 * ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let expected = (1.0 - (-1.5 * l).exp()).powi(2);
        assert!((two.value.re - expected).abs() < 1e-14);
        assert!(matches!(euler_product(&q.at(c(0.7, 0.0)), 5.0, None, 0.75), Err(Error::Regime(_))));
    }

    #[test]
    fn factorization_in_both_regimes() {
        assert!(factorization_check(3.0, c(1.2, 0.0), None, None).unwrap() < 1e-8);
        assert!(factorization_check(4.0, c(0.3, 8.0), None, None).unwrap() < 1e-8);
        let a = factorization_check(3.0, c(0.7, 2.0), Some(0.6), None).unwrap();
        let b = factorization_check(3.0, c(0.7, 2.0), Some(0.8), None).unwrap();
        assert!(a < 1e-8 && b < 1e-8);
    }

    #[test]
    fn deep_convergence_growth_is_flat() {
        let grid = crate::fit::geometric_grid(1.0, 40.0, 12);
        let scan = growth_scan(3.0, &UnitaryRep::trivial(), 2.0, &grid, 0.75).unwrap();
        // |log Z| ≤ Σ_k |log(1 - x)| with x ≤ 2·x_1^{2σ} ≈ 0.04
        assert!(scan.max_abs_log < 0.1);
        assert!(scan.flagged.is_empty());
    }
}
