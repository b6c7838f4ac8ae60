//! Interval covers of the limit set `Λ_0 ⊂ [-a, a]`, the thickening `Ω(h)` and box counting.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::fit::{linear_fit, LinearFit};
use crate::group::{branch_map, check_width, hull_endpoint, MoebiusMap};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverConfig {
    pub max_intervals: usize,
    pub max_depth: u32,
}

impl Default for CoverConfig {
    fn default() -> Self {
        Self { max_intervals: 10_000_000, max_depth: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverInterval {
    pub left: f64,
    pub right: f64,
    pub depth: u32,
    /// Image of the interval around the parabolic point 0 absorbing the omitted branches.
    pub is_tail: bool,
}

impl CoverInterval {
    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    pub fn contains(&self, other: &CoverInterval, tol: f64) -> bool {
        self.left <= other.left + tol && other.right <= self.right + tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub w: f64,
    /// Deepest refinement level present.
    pub depth: u32,
    /// Largest branch index `|n|` used explicitly.
    pub branch_cutoff: i64,
    /// Sorted by left endpoint; may overlap (see [`Cover::merged`]).
    pub intervals: Vec<CoverInterval>,
}

impl Cover {
    fn from_intervals(w: f64, mut intervals: Vec<CoverInterval>, branch_cutoff: i64) -> Self {
        intervals.sort_by(|x, y| x.left.total_cmp(&y.left).then(x.right.total_cmp(&y.right)));
        let depth = intervals.iter().map(|i| i.depth).max().unwrap_or(0);
        Self { w, depth, branch_cutoff, intervals }
    }

    pub fn total_length(&self) -> f64 {
        self.merged().iter().map(|(l, r)| r - l).sum()
    }

    /// Disjoint closed intervals of the union.
    pub fn merged(&self) -> Vec<(f64, f64)> {
        merge(self.intervals.iter().map(|i| (i.left, i.right)), 0.0)
    }

    /// Writes `left,right,depth,is_tail` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "left,right,depth,is_tail")?;
        for i in &self.intervals {
            writeln!(out, "{:.17e},{:.17e},{},{}", i.left, i.right, i.depth, i.is_tail)?;
        }
        Ok(())
    }
}

fn merge(sorted: impl Iterator<Item = (f64, f64)>, pad: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (l, r) in sorted {
        let (l, r) = (l - pad, r + pad);
        match out.last_mut() {
            Some(cur) if l <= cur.1 => cur.1 = cur.1.max(r),
            _ => out.push((l, r)),
        }
    }
    out
}

/// `t` with `γ_n([-a, a]) ⊂ [-t, t]` for all `|n| > n`.
fn tail_radius(n: i64, w: f64, a: f64) -> f64 {
    1.0 / ((n + 1) as f64 * w - a)
}

fn gap(f: MoebiusMap, g: MoebiusMap, a: f64) -> f64 {
    let (l1, r1) = f.image_interval(-a, a);
    let (l2, r2) = g.image_interval(-a, a);
    (l2 - r1).max(l1 - r2)
}

/// Stopping-time cover at scale `h`.
///
/// An interval `g([-a, a])` longer than `h` is replaced by `g γ_n([-a, a])` for
/// `|n| ≤ n*`, where `n*` is the first index whose image lies within `h` of the next
/// one on both sides, plus the tail `g([-t, t])` that swallows all `|n| > n*`.
pub fn refine_cover(w: f64, h: f64, config: &CoverConfig) -> Result<Cover> {
    check_width(w)?;
    let a = hull_endpoint(w)?;
    if !(h > 0.0 && h < 2.0 * a) {
        return Err(Error::domain(format!("scale h must lie in (0, 2a) = (0, {}), got {h}", 2.0 * a)));
    }
    let mut branches: Vec<(MoebiusMap, MoebiusMap)> = Vec::new();
    let mut branch = |n: i64| -> Result<(MoebiusMap, MoebiusMap)> {
        while branches.len() < n as usize {
            let k = branches.len() as i64 + 1;
            branches.push((branch_map(k, w)?, branch_map(-k, w)?));
        }
        Ok(branches[n as usize - 1])
    };
    let mut out = Vec::new();
    let mut stack = vec![(MoebiusMap::identity(), 0u32)];
    let mut cutoff = 0;
    while let Some((g, depth)) = stack.pop() {
        let (left, right) = g.image_interval(-a, a);
        if right - left <= h {
            out.push(CoverInterval { left, right, depth, is_tail: false });
            continue;
        }
        if depth >= config.max_depth {
            return Err(Error::Resource(format!("cover depth limit {} reached at scale {h}", config.max_depth)));
        }
        let mut n = 1;
        loop {
            let (p, m) = branch(n)?;
            let (p_next, m_next) = branch(n + 1)?;
            stack.push((g * p, depth + 1));
            stack.push((g * m, depth + 1));
            if gap(g * p, g * p_next, a) <= h && gap(g * m, g * m_next, a) <= h {
                break;
            }
            n += 1;
        }
        cutoff = cutoff.max(n);
        let t = tail_radius(n, w, a);
        let (left, right) = g.image_interval(-t, t);
        out.push(CoverInterval { left, right, depth: depth + 1, is_tail: true });
        if out.len() + stack.len() > config.max_intervals {
            return Err(Error::Resource(format!(
                "more than {} intervals at depth {depth} for scale {h}",
                config.max_intervals
            )));
        }
    }
    Ok(Cover::from_intervals(w, out, cutoff))
}

/// All words of length `depth` in the branches `|n| ≤ cutoff`, with tails at each level.
pub fn depth_cover(w: f64, depth: u32, cutoff: i64, config: &CoverConfig) -> Result<Cover> {
    check_width(w)?;
    if cutoff < 1 {
        return Err(Error::domain("branch cutoff must be at least 1"));
    }
    let a = hull_endpoint(w)?;
    let t = tail_radius(cutoff, w, a);
    let gens: Vec<MoebiusMap> =
        (1..=cutoff).flat_map(|n| [n, -n]).map(|n| branch_map(n, w)).collect::<Result<_>>()?;
    let mut level = vec![MoebiusMap::identity()];
    let mut out = Vec::new();
    for k in 0..depth {
        let next_len = level.len() * gens.len();
        if next_len + out.len() > config.max_intervals {
            return Err(Error::Resource(format!("depth {} needs {next_len} intervals", k + 1)));
        }
        for g in &level {
            let (left, right) = g.image_interval(-t, t);
            out.push(CoverInterval { left, right, depth: k + 1, is_tail: true });
        }
        level = level.iter().flat_map(|g| gens.iter().map(move |b| *g * *b)).collect();
    }
    for g in &level {
        let (left, right) = g.image_interval(-a, a);
        out.push(CoverInterval { left, right, depth, is_tail: false });
    }
    Ok(Cover::from_intervals(w, out, cutoff))
}

/// Area of the union of `h`-stadia around the merged intervals: `Σ (2h·len + πh²)`.
pub fn omega_area(cover: &Cover, h: f64) -> f64 {
    merge(cover.intervals.iter().map(|i| (i.left, i.right)), h)
        .iter()
        .map(|(l, r)| 2.0 * h * (r - l - 2.0 * h) + PI * h * h)
        .sum()
}

/// Number of grid cells `[kh, (k+1)h)` met by the cover.
pub fn box_count(cover: &Cover, h: f64) -> u64 {
    let mut count = 0u64;
    let mut last = i64::MIN;
    for i in &cover.intervals {
        let k0 = ((i.left / h).floor() as i64).max(last.saturating_add(1));
        let k1 = (i.right / h).floor() as i64;
        if k1 >= k0 {
            count += (k1 - k0 + 1) as u64;
            last = k1;
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFit {
    pub h: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: LinearFit,
}

impl ScaleFit {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

fn check_scales(scales: &[f64]) -> Result<()> {
    let (lo, hi) = scales.iter().fold((f64::INFINITY, 0.0f64), |(l, u), h| (l.min(*h), u.max(*h)));
    if scales.len() < 4 || hi / lo < 99.999 {
        return Err(Error::domain("need at least 4 scales spanning 2 decades"));
    }
    Ok(())
}

/// Slope of `ln N(h)` against `ln(1/h)`, where `N(h)` is the box count of the scale-`h` cover.
pub fn boxcount_dimension(w: f64, scales: &[f64], config: &CoverConfig) -> Result<ScaleFit> {
    check_scales(scales)?;
    let values = scales
        .iter()
        .map(|&h| Ok(box_count(&refine_cover(w, h, config)?, h) as f64))
        .collect::<Result<Vec<f64>>>()?;
    let x: Vec<f64> = scales.iter().map(|h| -h.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&x, &y).ok_or_else(|| Error::domain("degenerate box-count regression"))?;
    Ok(ScaleFit { h: scales.to_vec(), values, fit })
}

/// Slope of `ln vol Ω(h)` against `ln h`.
pub fn volume_scan(w: f64, scales: &[f64], config: &CoverConfig) -> Result<ScaleFit> {
    check_scales(scales)?;
    let values = scales
        .iter()
        .map(|&h| Ok(omega_area(&refine_cover(w, h, config)?, h)))
        .collect::<Result<Vec<f64>>>()?;
    let x: Vec<f64> = scales.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&x, &y).ok_or_else(|| Error::domain("degenerate area regression"))?;
    Ok(ScaleFit { h: scales.to_vec(), values, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::geometric_grid;
    use proptest::prelude::*;

    fn single(left: f64, right: f64) -> CoverInterval {
        CoverInterval { left, right, depth: 0, is_tail: false }
    }

    #[test]
    fn stadium_areas() {
        let one = Cover::from_intervals(3.0, vec![single(0.0, 0.5)], 0);
        assert!((omega_area(&one, 0.01) - (2.0 * 0.01 * 0.5 + PI * 1e-4)).abs() < 1e-15);
        let two = Cover::from_intervals(3.0, vec![single(0.0, 0.1), single(0.2, 0.25)], 0);
        let expected = 2.0 * 0.01 * 0.15 + 2.0 * PI * 1e-4;
        assert!((omega_area(&two, 0.01) - expected).abs() < 1e-15);
    }

    #[test]
    fn first_level_fixed_point() {
        let a = hull_endpoint(3.0).unwrap();
        let c = refine_cover(3.0, a / 2.0, &CoverConfig::default()).unwrap();
        let g1 = branch_map(1, 3.0).unwrap();
        assert!((g1.apply_real(-a) + a).abs() < 1e-15);
        assert!(c.intervals.iter().any(|i| (i.left + a).abs() < 1e-15 || (i.right + a).abs() < 1e-15));
        assert!(c.intervals.iter().all(|i| i.left >= -a - 1e-15 && i.right <= a + 1e-15));
    }

    #[test]
    fn depth_covers_nest_and_shrink() {
        let cfg = CoverConfig::default();
        let covers: Vec<Cover> = (0..4).map(|k| depth_cover(3.0, k, 6, &cfg).unwrap()).collect();
        for pair in covers.windows(2) {
            assert!(pair[1].total_length() < pair[0].total_length());
            for i in &pair[1].intervals {
                assert!(pair[0].intervals.iter().any(|p| p.contains(i, 1e-15)));
            }
        }
    }

    #[test]
    fn box_dimension_tracks_delta() {
        let cfg = CoverConfig::default();
        let hs = geometric_grid(1e-5, 1e-2, 13);
        let d3 = boxcount_dimension(3.0, &hs, &cfg).unwrap().slope();
        assert!((d3 - 0.7519400804).abs() < 0.02, "{d3}");
        let d10 = boxcount_dimension(10.0, &hs, &cfg).unwrap().slope();
        assert!(0.5 < d10 && d10 < d3);
        let area = volume_scan(3.0, &hs, &cfg).unwrap().slope();
        assert!((area - (2.0 - 0.7519400804)).abs() < 0.1, "{area}");
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = CoverConfig { max_intervals: 100, ..CoverConfig::default() };
        assert!(matches!(refine_cover(3.0, 1e-4, &cfg), Err(Error::Resource(_))));
        assert!(boxcount_dimension(3.0, &[1e-2, 1e-3], &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn covers_are_mirror_symmetric(w in 2.2f64..8.0, e in 1.5f64..3.5) {
            let h = 10f64.powf(-e);
            let c = refine_cover(w, h, &CoverConfig::default()).unwrap();
            let m = c.merged();
            for (i, j) in m.iter().zip(m.iter().rev()) {
                prop_assert!((i.0 + j.1).abs() < 1e-12);
                prop_assert!((i.1 + j.0).abs() < 1e-12);
            }
            let tails = c.intervals.iter().filter(|i| i.is_tail).count();
            let mirrored = c.intervals.iter().filter(|i| i.is_tail && (i.left + i.right).abs() < 1e-12).count();
            prop_assert!(tails >= 1 && mirrored >= 1);
            prop_assert!(c.intervals.iter().filter(|i| !i.is_tail).all(|i| i.len() <= h));
        }
    }
}
