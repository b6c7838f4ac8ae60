//! Resonances as zeros of `det(1 - L_{s,ρ})`, the dimension δ_w and Weyl counts.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::fit::{linear_fit, LinearFit};
use crate::group::UnitaryRep;
use crate::transfer::{leading_eigenvalue, DiscretizationParams};
use crate::zeta::{zeta_at_resolution, ZetaQuery};
use crate::{Error, Result, C64};

/// Lower end of the bisection bracket for δ.
pub const DELTA_LO: f64 = 0.5001;
pub const DELTA_HI: f64 = 0.9999;
/// Maximum sampling step along a contour before phase control.
pub const CONTOUR_STEP: f64 = 0.025;
/// Largest admissible phase change between consecutive contour samples.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;
/// Radius of the multiplicity circle.
pub const MULTIPLICITY_RADIUS: f64 = 1e-4;
/// Finite-difference step for Newton derivatives.
pub const NEWTON_STEP: f64 = 1e-6;
pub const NEWTON_MAX_ITER: usize = 50;
/// Boxes below this diameter are not subdivided further.
pub const MIN_BOX: f64 = 1e-6;

const MIN_SEGMENT: f64 = 1e-10;
const NUDGE: f64 = 1e-3;
const MAX_NUDGES: usize = 4;
const DELTA_MAX_DEGREE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaResult {
    pub delta: f64,
    /// Degree of the returned value.
    pub resolution: usize,
    /// `|δ(M) - δ(M + 20)|`.
    pub stability: f64,
    pub stable: bool,
}

fn delta_at_degree(w: f64, m: usize, tol: f64) -> Result<f64> {
    let params = DiscretizationParams::new(w, UnitaryRep::trivial())?.degree(m)?;
    let excess = |s: f64| -> Result<f64> {
        let lambda = leading_eigenvalue(C64::new(s, 0.0), &params)?;
        Ok(lambda.re - 1.0)
    };
    let (mut lo, mut hi) = (DELTA_LO, DELTA_HI);
    let (f_lo, f_hi) = (excess(lo)?, excess(hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Bracket(format!(
            "leading eigenvalue does not cross 1 on ({lo}, {hi}): λ-1 = {f_lo:e}, {f_hi:e}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// δ_w as the real crossing of the leading eigenvalue of `A(s)` with 1.
///
/// The degree starts at 40 and grows by 20 until two consecutive values agree to `10·tol`.
pub fn compute_delta(w: f64, tol: f64) -> Result<DeltaResult> {
    crate::group::check_width(w)?;
    if !(1e-12..0.1).contains(&tol) {
        return Err(Error::domain(format!("tolerance must lie in [1e-12, 0.1), got {tol}")));
    }
    let mut m = 40;
    let mut prev = delta_at_degree(w, m, tol)?;
    loop {
        let next = delta_at_degree(w, m + 20, tol)?;
        let stability = (next - prev).abs();
        let stable = stability < 10.0 * tol;
        if stable || m + 20 >= DELTA_MAX_DEGREE {
            return Ok(DeltaResult { delta: next, resolution: m + 20, stability, stable });
        }
        m += 20;
        prev = next;
    }
}

/// Memoized determinant evaluations for contour work.
#[derive(Debug)]
pub struct DetEvaluator {
    query: ZetaQuery,
    cache: Mutex<HashMap<(u64, u64, usize), C64>>,
    evaluations: AtomicUsize,
}

impl DetEvaluator {
    pub fn new(w: f64, rep: UnitaryRep) -> Self {
        Self::from_query(ZetaQuery::new(w, rep, C64::new(0.0, 0.0)))
    }

    /// Uses the method and overrides of `query`; its `s` is ignored.
    pub fn from_query(query: ZetaQuery) -> Self {
        Self { query, cache: Mutex::new(HashMap::new()), evaluations: AtomicUsize::new(0) }
    }

    pub fn rep(&self) -> &UnitaryRep {
        &self.query.rep
    }

    pub fn w(&self) -> f64 {
        self.query.w
    }

    /// Number of determinants actually computed (cache misses).
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn resolution_for(&self, s: C64) -> Result<usize> {
        let q = self.query.at(s);
        match q.resolution {
            Some(n) => Ok(n),
            None => q.default_resolution(),
        }
    }

    pub fn eval(&self, s: C64) -> Result<C64> {
        self.eval_at(s, self.resolution_for(s)?)
    }

    pub fn eval_at(&self, s: C64, resolution: usize) -> Result<C64> {
        let key = (s.re.to_bits(), s.im.to_bits(), resolution);
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = zeta_at_resolution(&self.query.at(s), resolution)?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.cache.lock().expect("cache poisoned").insert(key, v);
        Ok(v)
    }

    fn eval_many(&self, points: &[C64]) -> Result<Vec<C64>> {
        points.par_iter().map(|s| self.eval(*s)).collect()
    }
}

/// Closed rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ZeroBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite())
        {
            return Err(Error::domain(format!(
                "degenerate box [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn contains(&self, s: C64, margin: f64) -> bool {
        s.re >= self.re_min - margin
            && s.re <= self.re_max + margin
            && s.im >= self.im_min - margin
            && s.im <= self.im_max + margin
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    /// Image under `s ↦ conj(s)`.
    pub fn conjugate(&self) -> Self {
        Self { im_min: -self.im_max, im_max: -self.im_min, ..*self }
    }

    fn expanded(&self, by: f64) -> Self {
        Self {
            re_min: self.re_min - by,
            re_max: self.re_max + by,
            im_min: self.im_min - by,
            im_max: self.im_max + by,
        }
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }

    /// Splits the longer side at `fraction`.
    fn split(&self, fraction: f64) -> (Self, Self) {
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let x = self.re_min + fraction * (self.re_max - self.re_min);
            (Self { re_max: x, ..*self }, Self { re_min: x, ..*self })
        } else {
            let y = self.im_min + fraction * (self.im_max - self.im_min);
            (Self { im_max: y, ..*self }, Self { im_min: y, ..*self })
        }
    }
}

/// Rejects boxes that contain or graze a pole `½(1 - n)` of the determinant.
fn check_poles(rep: &UnitaryRep, b: &ZeroBox) -> Result<()> {
    if !rep.lambdas().contains(&0.0) || b.im_min > 1e-3 || b.im_max < -1e-3 {
        return Ok(());
    }
    let first = (1.0 - 2.0 * (b.re_max + 1e-3)).ceil().max(0.0) as i64;
    let last = (1.0 - 2.0 * (b.re_min - 1e-3)).floor() as i64;
    if first <= last {
        let pole = 0.5 * (1.0 - first as f64);
        return Err(Error::domain(format!("box contains or touches the pole s = {pole}")));
    }
    Ok(())
}

fn phase_step(a: C64, b: C64) -> f64 {
    (b / a).arg()
}

/// Phase change of `f` from `a` to `b`, bisecting until each step is below π/2.
fn segment_phase(ev: &DetEvaluator, a: C64, fa: C64, b: C64, fb: C64) -> Result<f64> {
    let d = phase_step(fa, fb);
    if d.abs() < MAX_PHASE_STEP {
        return Ok(d);
    }
    if (b - a).norm() < MIN_SEGMENT {
        return Err(Error::Contour(format!("phase step {d:.3} unresolved on segment {a} -> {b}")));
    }
    let m = 0.5 * (a + b);
    let fm = checked(ev.eval(m)?, m)?;
    Ok(segment_phase(ev, a, fa, m, fm)? + segment_phase(ev, m, fm, b, fb)?)
}

fn checked(v: C64, s: C64) -> Result<C64> {
    if v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Contour(format!("determinant vanishes or is not finite at {s}")));
    }
    Ok(v)
}

/// Winding of `f` along a closed polygon sampled at `points` (last joins first).
fn polygon_winding(ev: &DetEvaluator, points: &[C64]) -> Result<(i64, f64)> {
    let values = ev.eval_many(points)?;
    for (v, s) in values.iter().zip(points) {
        checked(*v, *s)?;
    }
    let n = points.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let j = (i + 1) % n;
            segment_phase(ev, points[i], values[i], points[j], values[j])
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.05 {
        return Err(Error::Contour(format!("non-integer winding {turns:.4}")));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    Ok((rounded as i64, scale))
}

fn boundary_points(b: &ZeroBox) -> Vec<C64> {
    let corners = b.corners();
    let mut pts = Vec::new();
    for i in 0..4 {
        let (p, q) = (corners[i], corners[(i + 1) % 4]);
        let pieces = ((q - p).norm() / CONTOUR_STEP).ceil().max(4.0) as usize;
        pts.extend((0..pieces).map(|k| p + (q - p) * (k as f64 / pieces as f64)));
    }
    pts
}

fn box_winding(ev: &DetEvaluator, b: &ZeroBox) -> Result<(i64, f64)> {
    check_poles(ev.rep(), b)?;
    polygon_winding(ev, &boundary_points(b))
}

/// Winding number of `det(1 - L_{s,ρ})` around a circle.
pub fn circle_winding(ev: &DetEvaluator, center: C64, radius: f64) -> Result<i64> {
    let pts: Vec<C64> = (0..16).map(|k| center + C64::from_polar(radius, TAU * k as f64 / 16.0)).collect();
    Ok(polygon_winding(ev, &pts)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCount {
    pub winding: i64,
    /// The box actually integrated over, after any nudging.
    pub contour: ZeroBox,
    pub nudges: usize,
    /// Largest `|det|` seen on the boundary samples.
    pub scale: f64,
}

/// Argument-principle zero count, nudging the edges outward when a zero sits on them.
pub fn count_zeros(ev: &DetEvaluator, b: &ZeroBox) -> Result<ZeroCount> {
    let mut last = None;
    for nudges in 0..=MAX_NUDGES {
        let contour = b.expanded(NUDGE * nudges as f64);
        match box_winding(ev, &contour) {
            Ok((winding, scale)) => return Ok(ZeroCount { winding, contour, nudges, scale }),
            Err(Error::Contour(msg)) => last = Some(msg),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Contour(format!("count failed after {MAX_NUDGES} nudges: {}", last.unwrap_or_default())))
}

pub fn count_zeros_box(w: f64, rep: &UnitaryRep, b: &ZeroBox) -> Result<i64> {
    Ok(count_zeros(&DetEvaluator::new(w, rep.clone()), b)?.winding)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub s: C64,
    pub multiplicity: u32,
    /// `|det(1 - A(s))|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// False when Newton failed; `s` is then the box center and `multiplicity` its winding.
    pub resolved: bool,
}

struct NewtonOutcome {
    s: C64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Newton with central differences, scaled by the expected multiplicity.
///
/// Gives up once an iterate leaves `region`.
fn newton(ev: &DetEvaluator, start: C64, multiplicity: f64, scale: f64, region: &ZeroBox) -> Result<NewtonOutcome> {
    let resolution = ev.resolution_for(start)?;
    let f = |s: C64| ev.eval_at(s, resolution);
    let mut s = start;
    let mut fs = f(s)?;
    let target = 1e-10 * scale.max(1.0);
    for it in 1..=NEWTON_MAX_ITER {
        if fs.norm() < target {
            return Ok(NewtonOutcome { s, residual: fs.norm(), iterations: it - 1, converged: true });
        }
        let h = C64::new(NEWTON_STEP, 0.0);
        let df = (f(s + h)? - f(s - h)?) / (2.0 * h);
        if df.norm() == 0.0 {
            break;
        }
        let step = fs / df * multiplicity;
        s -= step;
        if !region.contains(s, 0.0) {
            return Ok(NewtonOutcome { s, residual: f64::INFINITY, iterations: it, converged: false });
        }
        fs = f(s)?;
        if step.norm() < 1e-14 * s.norm().max(1.0) {
            let converged = fs.norm() < 1e-8 * scale.max(1.0);
            return Ok(NewtonOutcome { s, residual: fs.norm(), iterations: it, converged });
        }
    }
    let converged = fs.norm() < target;
    Ok(NewtonOutcome { s, residual: fs.norm(), iterations: NEWTON_MAX_ITER, converged })
}

fn refine(ev: &DetEvaluator, b: ZeroBox, winding: i64, scale: f64) -> Result<Vec<Resonance>> {
    if winding == 0 {
        return Ok(Vec::new());
    }
    if winding < 0 {
        return Err(Error::Contour(format!("negative winding {winding} in a pole-free box")));
    }
    let small = b.diameter() < MIN_BOX;
    if winding == 1 || small {
        let region = b.expanded(0.5 * b.diameter());
        let out = newton(ev, b.center(), winding as f64, scale, &region)?;
        if out.converged && b.contains(out.s, 1e-9) {
            let m = circle_winding(ev, out.s, MULTIPLICITY_RADIUS)?;
            if m == winding || small {
                return Ok(vec![Resonance {
                    s: out.s,
                    multiplicity: m.max(1) as u32,
                    residual: out.residual,
                    iterations: out.iterations,
                    resolved: m >= 1,
                }]);
            }
        }
        if small {
            let residual = ev.eval(b.center())?.norm();
            return Ok(vec![Resonance {
                s: b.center(),
                multiplicity: winding as u32,
                residual,
                iterations: out.iterations,
                resolved: false,
            }]);
        }
    }
    for fraction in [0.5, 0.47, 0.53, 0.41, 0.59] {
        let (lo, hi) = b.split(fraction);
        let counts = rayon::join(|| box_winding(ev, &lo), || box_winding(ev, &hi));
        let ((w_lo, s_lo), (w_hi, s_hi)) = match counts {
            (Ok(a), Ok(c)) => (a, c),
            (Err(Error::Contour(_)), _) | (_, Err(Error::Contour(_))) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if w_lo + w_hi != winding {
            continue;
        }
        let (a, c) = rayon::join(|| refine(ev, lo, w_lo, s_lo.max(scale)), || refine(ev, hi, w_hi, s_hi.max(scale)));
        let mut zeros = a?;
        zeros.extend(c?);
        return Ok(zeros);
    }
    Err(Error::Contour(format!("could not split box {b:?} consistently")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSearch {
    pub count: ZeroCount,
    /// Sorted by imaginary part, then real part.
    pub zeros: Vec<Resonance>,
}

impl ZeroSearch {
    /// Total multiplicity of the refined zeros.
    pub fn refined_count(&self) -> i64 {
        self.zeros.iter().map(|z| z.multiplicity as i64).sum()
    }

    pub fn consistent(&self) -> bool {
        self.refined_count() == self.count.winding
    }
}

/// Zeros in a box by subdivision and Newton refinement.
pub fn search_zeros(ev: &DetEvaluator, b: &ZeroBox) -> Result<ZeroSearch> {
    let count = count_zeros(ev, b)?;
    let mut zeros = refine(ev, count.contour, count.winding, count.scale)?;
    zeros.sort_by(|x, y| x.s.im.total_cmp(&y.s.im).then(x.s.re.total_cmp(&y.s.re)));
    Ok(ZeroSearch { count, zeros })
}

pub fn find_zeros(w: f64, rep: &UnitaryRep, b: &ZeroBox) -> Result<Vec<Resonance>> {
    Ok(search_zeros(&DetEvaluator::new(w, rep.clone()), b)?.zeros)
}

/// One horizontal strip `[σ, 2] × [t_lo, t_hi]` of a Weyl count.
#[derive(Debug, Clone, PartialEq)]
pub struct CountCell {
    pub t_lo: f64,
    pub t_hi: f64,
    pub result: std::result::Result<ZeroSearch, String>,
}

impl CountCell {
    pub fn consistent(&self) -> bool {
        self.result.as_ref().is_ok_and(|r| r.consistent())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingReport {
    pub sigma: f64,
    pub t: Vec<f64>,
    /// `N(σ, T)`: zeros with `Re s ≥ σ`, `0.1 ≤ |Im s| ≤ T`, with multiplicity.
    pub n: Vec<i64>,
    /// `M(σ, T)`: zeros with `Re s ≥ σ` and `|Im s - T| ≤ 1`.
    pub m: Vec<i64>,
    /// Fit of `ln N` against `ln T` over the upper half of the grid.
    pub eta_fit: Option<LinearFit>,
    pub symmetric: bool,
    pub cells: Vec<CountCell>,
    /// All refined zeros including mirrored ones, sorted by `(Im, Re)`.
    pub zeros: Vec<Resonance>,
}

impl CountingReport {
    pub fn eta_hat(&self) -> Option<f64> {
        self.eta_fit.map(|f| f.slope)
    }

    pub fn all_cells_consistent(&self) -> bool {
        self.cells.iter().all(CountCell::consistent)
    }

    /// `N(σ, T)` at any `T` up to the scanned maximum.
    pub fn n_at(&self, t: f64) -> i64 {
        self.zeros.iter().filter(|z| z.s.im.abs() <= t).map(|z| i64::from(z.multiplicity)).sum()
    }
}

/// Lower edge of the counting region; the real axis carries the poles.
pub const COUNT_T_MIN: f64 = 0.1;
pub const COUNT_RE_MAX: f64 = 2.0;

/// `N(σ, T)` and `M(σ, T)` on the grid `T_max·i/T_steps`.
pub fn weyl_count(ev: &DetEvaluator, sigma: f64, t_max: f64, t_steps: usize) -> Result<CountingReport> {
    if t_steps == 0 || t_max <= COUNT_T_MIN || sigma >= COUNT_RE_MAX {
        return Err(Error::domain("weyl count needs σ < 2, T_max > 0.1 and at least one step"));
    }
    let t: Vec<f64> = (1..=t_steps).map(|i| t_max * i as f64 / t_steps as f64).collect();
    let symmetric = ev.rep().is_real();
    let mut edges = vec![COUNT_T_MIN];
    edges.extend(t.iter().copied().filter(|x| *x > COUNT_T_MIN));
    let mut strips: Vec<(f64, f64)> = edges.windows(2).map(|p| (p[0], p[1])).collect();
    if !symmetric {
        let lower: Vec<(f64, f64)> = strips.iter().map(|(a, b)| (-b, -a)).collect();
        strips.extend(lower);
    }
    let cells: Vec<CountCell> = strips
        .par_iter()
        .map(|&(lo, hi)| {
            let result = ZeroBox::new(sigma, COUNT_RE_MAX, lo, hi)
                .and_then(|b| search_zeros(ev, &b))
                .map_err(|e| e.to_string());
            CountCell { t_lo: lo, t_hi: hi, result }
        })
        .collect();
    let mut zeros: Vec<Resonance> = Vec::new();
    for cell in &cells {
        if let Ok(r) = &cell.result {
            for z in &r.zeros {
                let dup = zeros.iter().any(|y| (y.s - z.s).norm() < 1e-6);
                if !dup {
                    zeros.push(*z);
                }
            }
        }
    }
    if symmetric {
        let mirrored: Vec<Resonance> = zeros.iter().map(|z| Resonance { s: z.s.conj(), ..*z }).collect();
        zeros.extend(mirrored);
    }
    zeros.sort_by(|x, y| x.s.im.total_cmp(&y.s.im).then(x.s.re.total_cmp(&y.s.re)));
    let weight = |pred: &dyn Fn(&Resonance) -> bool| -> i64 {
        zeros.iter().filter(|z| z.s.re >= sigma && pred(z)).map(|z| z.multiplicity as i64).sum()
    };
    let n: Vec<i64> = t.iter().map(|&tt| weight(&|z| z.s.im.abs() <= tt)).collect();
    let m: Vec<i64> = t.iter().map(|&tt| weight(&|z| (z.s.im - tt).abs() <= 1.0)).collect();
    let half = t.len() / 2;
    let (x, y): (Vec<f64>, Vec<f64>) = t[half..]
        .iter()
        .zip(&n[half..])
        .filter(|(_, n)| **n > 0)
        .map(|(t, n)| (t.ln(), (*n as f64).ln()))
        .unzip();
    let eta_fit = if x.len() >= 2 { linear_fit(&x, &y) } else { None };
    Ok(CountingReport { sigma, t, n, m, eta_fit, symmetric, cells, zeros })
}
