use rayon::prelude::*;

use super::lerch;
use crate::fit::{dyadic_window_maxima, linear_fit, LinearFit, WindowMax};
use crate::{Error, Result, C64};

/// `|H(z, σ+it, λ)|` along a vertical line with its fitted power-law exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct LerchGrowthScan {
    pub t: Vec<f64>,
    /// `None` where the evaluation hit a pole or failed.
    pub abs_h: Vec<Option<f64>>,
    pub flagged: Vec<f64>,
    pub windows: Vec<WindowMax>,
    /// Slope of `log max|H|` against `log t` over the dyadic windows.
    pub fit: Option<LinearFit>,
}

impl LerchGrowthScan {
    pub fn alpha_hat(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

pub fn lerch_growth_scan(lambda: f64, sigma: f64, z: C64, t_grid: &[f64]) -> Result<LerchGrowthScan> {
    if t_grid.iter().any(|t| t.is_nan() || t.abs() < 1.0) {
        return Err(Error::domain("growth scan needs |t| ≥ 1 on the whole grid"));
    }
    if t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::domain("t grid must be strictly increasing"));
    }
    if z.norm().is_nan() || z.norm() >= 1.0 {
        return Err(Error::domain("|z| must be below 1"));
    }
    let abs_h: Vec<Option<f64>> = t_grid
        .par_iter()
        .map(|&t| lerch(z, C64::new(sigma, t), lambda).ok().map(|h| h.norm()))
        .collect();
    let flagged = t_grid
        .iter()
        .zip(&abs_h)
        .filter(|(_, v)| v.is_none())
        .map(|(t, _)| *t)
        .collect();
    let logs: Vec<f64> = abs_h.iter().map(|v| v.map_or(f64::NAN, f64::ln)).collect();
    let windows = dyadic_window_maxima(t_grid, &logs);
    let fit = {
        let x: Vec<f64> = windows.iter().map(|w| w.center().ln()).collect();
        let y: Vec<f64> = windows.iter().map(|w| w.max).collect();
        linear_fit(&x, &y)
    };
    Ok(LerchGrowthScan { t: t_grid.to_vec(), abs_h, flagged, windows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::geometric_grid;

    #[test]
    fn bounded_in_convergence_region() {
        // Window maxima of |ζ(2+it)| only settle near ζ(2) once t is past the first few dozen.
        let grid = geometric_grid(16.0, 2048.0, 1400);
        let scan = lerch_growth_scan(0.0, 2.0, C64::new(0.0, 0.0), &grid).unwrap();
        assert!(scan.flagged.is_empty());
        assert!(scan.alpha_hat().unwrap() <= 0.05);
        assert!(scan.abs_h.iter().all(|v| v.unwrap() <= 1.6449340669));
    }

    #[test]
    fn critical_line_growth_is_sublinear() {
        let grid = geometric_grid(2.0, 200.0, 60);
        let scan = lerch_growth_scan(0.5, 0.5, C64::new(0.0, 0.0), &grid).unwrap();
        assert!(scan.alpha_hat().unwrap() <= 1.0);
    }

    #[test]
    fn left_of_critical_line_is_finite() {
        let grid = geometric_grid(2.0, 100.0, 30);
        let scan = lerch_growth_scan(0.25, -0.5, C64::new(0.1, 0.0), &grid).unwrap();
        let fit = scan.fit.unwrap();
        assert!(fit.slope.is_finite() && fit.r_squared.is_finite());
    }

    #[test]
    fn rejects_small_t() {
        assert!(lerch_growth_scan(0.0, 2.0, C64::new(0.0, 0.0), &[0.5, 2.0]).is_err());
    }
}
