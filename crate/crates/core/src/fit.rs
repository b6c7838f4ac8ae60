//! Least-squares line fits and window maxima used by the scaling experiments.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rms_residual: f64,
    pub points: usize,
}

/// Ordinary least squares for `y ≈ slope·x + intercept`.
///
/// Returns `None` with fewer than two points or a degenerate `x` spread.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= f64::EPSILON * nf {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = (0..n)
        .map(|i| {
            let r = y[i] - (slope * x[i] + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        rms_residual: (ss_res / nf).sqrt(),
        points: n,
    })
}

/// Best constant `c` in `y ≈ c + g` for a fixed shape `g`, with its RMS residual.
pub fn fixed_shape_fit(y: &[f64], shape: &[f64]) -> Option<(f64, f64)> {
    let n = y.len().min(shape.len());
    if n == 0 {
        return None;
    }
    let c = (0..n).map(|i| y[i] - shape[i]).sum::<f64>() / n as f64;
    let rms = ((0..n).map(|i| (y[i] - shape[i] - c).powi(2)).sum::<f64>() / n as f64).sqrt();
    Some((c, rms))
}

/// Maximum of a sampled function over one dyadic window `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMax {
    pub lo: f64,
    pub hi: f64,
    pub t_at_max: f64,
    pub max: f64,
    pub samples: usize,
}

impl WindowMax {
    pub fn center(&self) -> f64 {
        (self.lo * self.hi).sqrt()
    }
}

/// Splits `[ts[0], ts[last]]` into windows `[t0·2^k, t0·2^(k+1))` and returns the
/// maximum of `values` on each non-empty window. `ts` must be increasing.
pub fn dyadic_window_maxima(ts: &[f64], values: &[f64]) -> Vec<WindowMax> {
    let mut out: Vec<WindowMax> = Vec::new();
    let Some(&t0) = ts.first() else {
        return out;
    };
    let t_end = *ts.last().unwrap();
    for (&t, &v) in ts.iter().zip(values) {
        if !v.is_finite() {
            continue;
        }
        let k = ((t / t0).log2() + 1e-12).floor().max(0.0) as i32;
        let lo = t0 * 2f64.powi(k);
        let hi = (t0 * 2f64.powi(k + 1)).min(t_end.max(lo));
        match out.last_mut() {
            Some(win) if (win.lo - lo).abs() <= 1e-12 * lo => {
                win.samples += 1;
                if v > win.max {
                    win.max = v;
                    win.t_at_max = t;
                }
            }
            _ => out.push(WindowMax {
                lo,
                hi,
                t_at_max: t,
                max: v,
                samples: 1,
            }),
        }
    }
    out
}

/// Geometric grid of `steps` points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let r = (hi / lo).ln() / (steps - 1) as f64;
            (0..steps)
                .map(|i| if i + 1 == steps { hi } else { lo * (r * i as f64).exp() })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(&[1.0], &[2.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn windows_are_dyadic() {
        let ts = geometric_grid(10.0, 200.0, 50);
        let vs: Vec<f64> = ts.iter().map(|t| t.sqrt()).collect();
        let wins = dyadic_window_maxima(&ts, &vs);
        assert_eq!(wins.len(), 5);
        assert!((wins[0].lo - 10.0).abs() < 1e-12);
        assert!((wins[1].lo - 20.0).abs() < 1e-12);
        for w in &wins {
            assert!(w.t_at_max >= w.lo && w.t_at_max <= w.hi);
        }
        assert_eq!(wins.iter().map(|w| w.samples).sum::<usize>(), 50);
    }
}
