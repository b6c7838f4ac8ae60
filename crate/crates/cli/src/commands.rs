//! Subcommands: argument definitions and their implementations.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hecke_core::fit::{geometric_grid, linear_fit};
use hecke_core::limit_set::{box_count, depth_cover, omega_area, refine_cover, Cover, CoverConfig};
use hecke_core::resonance::{compute_delta, search_zeros, weyl_count, DetEvaluator, ZeroBox};
use hecke_core::specfun::{gamma, hurwitz_zeta, lerch, lerch_phi, ln_gamma, periodic_zeta};
use hecke_core::transfer::{build_closed, build_direct, build_raw, Basis, BranchPart, DiscretizationParams};
use hecke_core::zeta::{
    euler_product, factorization_check, growth_from_values, zeta_eval, DetMethod, ZetaQuery, ZetaValue,
};
use hecke_core::{UnitaryRep, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{CacheKey, ZetaCache};
use crate::config::{Overrides, RunConfig, CACHE_ENV};
use crate::error::{param, CliResult};
use crate::format::{csv_document, fmt_complex, fmt_real, fmt_tag, json_document, parse_complex, Provenance};

#[derive(Debug, Parser)]
#[command(name = "hecke", version, about = "Twisted Selberg zeta functions of Hecke triangle groups")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Width `w > 2` of the Hecke group.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub w: Option<f64>,
    /// trivial | sign | character:λ | induced | matrix:FILE
    #[arg(long, global = true)]
    pub rep: Option<String>,
    /// Taylor degree `M` (or collocation node count).
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Disk radius `R`.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Branch cutoff for direct summation.
    #[arg(long = "n-direct", global = true)]
    pub n_direct: Option<usize>,
    /// Default tolerance for commands that take one.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON-lines cache file (overrides HECKE_CACHE).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for the cache audit sampler.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print errors as one JSON object on stderr.
    #[arg(long = "json-errors", global = true)]
    pub json_errors: bool,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            w: self.w,
            rep: self.rep.clone(),
            m: self.m,
            r: self.r,
            n_direct: self.n_direct,
            tol: self.tol,
            out: self.out.clone(),
            cache: self.cache.clone(),
            workers: self.workers,
            seed: self.seed,
        }
    }

    /// Config file, then `HECKE_CACHE`, then flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        base.apply(self.overrides(), std::env::var_os(CACHE_ENV).map(PathBuf::from))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Taylor,
    Collocation,
}

impl From<MethodArg> for DetMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => DetMethod::Auto,
            MethodArg::Taylor => DetMethod::Taylor,
            MethodArg::Collocation => DetMethod::Collocation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Raw,
    Bergman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialFunction {
    Hurwitz,
    Periodic,
    Lerch,
    Phi,
    Gamma,
    LnGamma,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Dimension δ_w of the limit set. Writes delta.json.
    Delta {
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Z(s, ρ) = det(1 - L_s). Writes zeta.json.
    Zeta {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
    },
    /// log|Z(σ+it)| on a geometric grid.
    ///
    /// Writes growth_w<w>_sigma<σ>.csv (columns t,sigma,Z,log_abs_Z,resolution,converged)
    /// and growth_w<w>_sigma<σ>.json with the exponent fits.
    GrowthScan {
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, default_value_t = 10.0)]
        t_min: f64,
        #[arg(long, default_value_t = 200.0)]
        t_max: f64,
        #[arg(long, default_value_t = 120)]
        steps: usize,
        /// Use this δ instead of computing it.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Zeros in a box `re_min,re_max,im_min,im_max`. Writes resonances_w<w>_<rep>.json.
    Resonances {
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: String,
    },
    /// N(σ,T) and M(σ,T). Writes weyl_w<w>_<rep>_sigma<σ>.csv (columns T,N,M) and a JSON summary.
    WeylCount {
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, default_value_t = 30.0)]
        t_max: f64,
        #[arg(long, default_value_t = 15)]
        t_steps: usize,
    },
    /// Interval covers of the limit set.
    ///
    /// With --h writes cover_w<w>_h<h>.csv (columns left,right,depth,is_tail); with --depth
    /// a fixed-depth cover; with --scan writes volume_w<w>.csv (columns h,area,boxes).
    Cover {
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, default_value_t = 8)]
        cutoff: i64,
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = 1e-5)]
        h_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        h_max: f64,
        #[arg(long, default_value_t = 13)]
        steps: usize,
        #[arg(long, default_value_t = 10_000_000)]
        max_intervals: usize,
    },
    /// Euler product against the determinant; fails when the relative gap exceeds --tol.
    EulerCheck {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = 8.0)]
        ell_max: f64,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Z_induced = Z_trivial · Z_sign; fails above --tol (default 1e-8).
    FactorCheck {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// L_s = F_{s,k} + L_{s+k/2} Ψ_1^k on the matrices; fails above --tol (default 1e-10).
    RecursionCheck {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Evaluate one special function.
    Specfun {
        #[arg(long = "function", value_enum)]
        function: SpecialFunction,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        /// Hurwitz shift `a` or Lerch Φ offset `q`.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// The transfer matrix as CSV (columns row,col,value).
    DumpMatrix {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_enum, default_value = "bergman")]
        basis: BasisArg,
        /// Use direct branch summation instead of the closed form.
        #[arg(long)]
        direct: bool,
    },
    /// SVG figures and CSVs from the scan artifacts in --out (needs delta.json).
    Report,
}

/// What a command produced: text for stdout, files for the output directory, and a verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub passed: bool,
}

impl Outcome {
    fn new(stdout: String) -> Self {
        Self { stdout, files: Vec::new(), passed: true }
    }

    fn file(mut self, name: String, contents: String) -> Self {
        self.files.push((name, contents));
        self
    }

    fn verdict(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

fn base_provenance(name: &str, cfg: &RunConfig) -> Provenance {
    let mut p = Provenance::new(name).with("w", cfg.w).with("rep", &cfg.rep);
    if let Some(m) = cfg.m {
        p = p.with("m", m);
    }
    if let Some(r) = cfg.r {
        p = p.with("r", r);
    }
    if let Some(n) = cfg.n_direct {
        p = p.with("n_direct", n);
    }
    p
}

fn query(cfg: &RunConfig, rep: &UnitaryRep, s: C64, method: DetMethod) -> ZetaQuery {
    ZetaQuery { resolution: cfg.m, r: cfg.r, method, ..ZetaQuery::new(cfg.w, rep.clone(), s) }
}

fn params(cfg: &RunConfig, rep: &UnitaryRep) -> CliResult<DiscretizationParams> {
    let mut p = DiscretizationParams::new(cfg.w, rep.clone())?;
    if let Some(r) = cfg.r {
        p = p.radius(r)?;
    }
    if let Some(m) = cfg.m {
        p = p.degree(m)?;
    }
    if let Some(n) = cfg.n_direct {
        p.n_direct = n;
    }
    Ok(p)
}

fn open_cache(cfg: &RunConfig) -> CliResult<ZetaCache> {
    match &cfg.cache {
        Some(path) => ZetaCache::open(path, cfg.seed),
        None => Ok(ZetaCache::disabled(cfg.seed)),
    }
}

/// Evaluates `Z` at many points, serving and filling the cache.
fn cached_zeta(cfg: &RunConfig, rep: &UnitaryRep, points: &[C64], method: DetMethod) -> CliResult<Vec<CliResult<ZetaValue>>> {
    let mut cache = open_cache(cfg)?;
    let keys: Vec<CacheKey> = points.iter().map(|s| CacheKey::new(cfg.w, rep, *s, cfg.m, cfg.r)).collect();
    let hits: Vec<Option<ZetaValue>> = keys.iter().map(|k| cache.lookup(k)).collect();
    let fresh: Vec<Option<CliResult<ZetaValue>>> = points
        .par_iter()
        .zip(&hits)
        .map(|(s, hit)| match hit {
            Some(_) => None,
            None => Some(zeta_eval(&query(cfg, rep, *s, method)).map_err(Into::into)),
        })
        .collect();
    let mut out = Vec::with_capacity(points.len());
    for ((key, hit), fresh) in keys.into_iter().zip(hits).zip(fresh) {
        match (hit, fresh) {
            (Some(v), _) => out.push(Ok(v)),
            (None, Some(Ok(v))) => {
                cache.insert(key, v);
                out.push(Ok(v));
            }
            (None, Some(Err(e))) => out.push(Err(e)),
            (None, None) => unreachable!("every miss is computed"),
        }
    }
    cache.flush()?;
    if cache.stats.audit_failures > 0 {
        eprintln!("warning: {} cache entries failed the recomputation audit", cache.stats.audit_failures);
    }
    Ok(out)
}

fn delta_value(w: f64) -> CliResult<f64> {
    Ok(compute_delta(w, 1e-10)?.delta)
}

fn parse_box(text: &str) -> CliResult<ZeroBox> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| param(format!("bad box '{text}'"))))
        .collect::<CliResult<_>>()?;
    if v.len() != 4 {
        return Err(param("box needs re_min,re_max,im_min,im_max"));
    }
    Ok(ZeroBox::new(v[0], v[1], v[2], v[3])?)
}

#[derive(Serialize)]
struct ZeroRecord {
    s: String,
    re: f64,
    im: f64,
    multiplicity: u32,
    residual: f64,
    iterations: usize,
    resolved: bool,
}

impl From<&hecke_core::resonance::Resonance> for ZeroRecord {
    fn from(z: &hecke_core::resonance::Resonance) -> Self {
        Self {
            s: fmt_complex(z.s),
            re: z.s.re,
            im: z.s.im,
            multiplicity: z.multiplicity,
            residual: z.residual,
            iterations: z.iterations,
            resolved: z.resolved,
        }
    }
}

pub fn dispatch(command: &Command, cfg: &RunConfig) -> CliResult<Outcome> {
    let w = cfg.w;
    let wtag = fmt_tag(w);
    match command {
        Command::Delta { tol } => {
            let tol = tol.or(cfg.tol).unwrap_or(1e-10);
            let d = compute_delta(w, tol)?;
            let prov = Provenance::new("delta").with("w", w).with("tol", tol);
            #[derive(Serialize)]
            struct Body {
                w: f64,
                delta: f64,
                tol: f64,
                resolution: usize,
                stability: f64,
                stable: bool,
            }
            let body = Body { w, delta: d.delta, tol, resolution: d.resolution, stability: d.stability, stable: d.stable };
            Ok(Outcome::new(format!("{:.10}\n", d.delta))
                .file("delta.json".into(), json_document(&prov, body))
                .verdict(d.stable))
        }
        Command::Zeta { s, method } => {
            let s = parse_complex(s)?;
            let rep = cfg.rep()?;
            let v = cached_zeta(cfg, &rep, &[s], (*method).into())?.remove(0)?;
            let prov = base_provenance("zeta", cfg).with("s", fmt_complex(s)).with("method", format!("{method:?}").to_lowercase());
            #[derive(Serialize)]
            struct Body {
                s: String,
                value: String,
                resolution: usize,
                method: String,
                converged: bool,
            }
            let body = Body {
                s: fmt_complex(s),
                value: fmt_complex(v.value),
                resolution: v.resolution,
                method: format!("{:?}", v.method).to_lowercase(),
                converged: v.converged,
            };
            let text = format!(
                "{}\nresolution {} ({}), converged {}\n",
                fmt_complex(v.value),
                v.resolution,
                body.method,
                v.converged
            );
            Ok(Outcome::new(text).file("zeta.json".into(), json_document(&prov, body)))
        }
        Command::GrowthScan { sigma, t_min, t_max, steps, delta } => {
            if !(*t_min >= 1.0 && t_max > t_min && *steps >= 4) {
                return Err(param("growth scan needs 1 ≤ t_min < t_max and at least 4 steps"));
            }
            let rep = cfg.rep()?;
            let delta = match delta {
                Some(d) => *d,
                None => delta_value(w)?,
            };
            let grid = geometric_grid(*t_min, *t_max, *steps);
            let points: Vec<C64> = grid.iter().map(|t| C64::new(*sigma, *t)).collect();
            let values: Vec<Option<ZetaValue>> =
                cached_zeta(cfg, &rep, &points, DetMethod::Auto)?.into_iter().map(|r| r.ok()).collect();
            let scan = growth_from_values(*sigma, &grid, values, delta)?;
            let stem = format!("growth_w{wtag}_sigma{}", fmt_tag(*sigma));
            let prov = base_provenance("growth-scan", cfg)
                .with("sigma", sigma)
                .with("t_min", t_min)
                .with("t_max", t_max)
                .with("steps", steps)
                .with("delta", delta);
            let rows = scan.t.iter().zip(&scan.values).zip(&scan.log_abs).map(|((t, v), l)| match v {
                Some(v) => vec![
                    fmt_real(*t),
                    fmt_real(*sigma),
                    fmt_complex(v.value),
                    fmt_real(*l),
                    v.resolution.to_string(),
                    v.converged.to_string(),
                ],
                None => vec![fmt_real(*t), fmt_real(*sigma), "nan".into(), "nan".into(), "0".into(), "false".into()],
            });
            let csv = csv_document(&prov, &["t", "sigma", "Z", "log_abs_Z", "resolution", "converged"], rows);
            #[derive(Serialize)]
            struct Window {
                lo: f64,
                hi: f64,
                t_at_max: f64,
                max: f64,
            }
            #[derive(Serialize)]
            struct Body {
                sigma: f64,
                delta: f64,
                beta_hat: Option<f64>,
                beta_bound: f64,
                refined_offset: Option<f64>,
                refined_rms: Option<f64>,
                max_abs_log: f64,
                flagged: Vec<f64>,
                windows: Vec<Window>,
            }
            let body = Body {
                sigma: *sigma,
                delta,
                beta_hat: scan.beta_hat(),
                beta_bound: delta + 0.25,
                refined_offset: scan.refined_fit.map(|f| f.0),
                refined_rms: scan.refined_fit.map(|f| f.1),
                max_abs_log: scan.max_abs_log,
                flagged: scan.flagged.clone(),
                windows: scan
                    .windows
                    .iter()
                    .map(|x| Window { lo: x.lo, hi: x.hi, t_at_max: x.t_at_max, max: x.max })
                    .collect(),
            };
            let text = match scan.beta_hat() {
                Some(b) => format!("beta_hat {b:.6} (delta + 0.25 = {:.6})\n", delta + 0.25),
                None => format!("beta_hat undefined; bounded, max |log Z| = {:.3e}\n", scan.max_abs_log),
            };
            Ok(Outcome::new(text)
                .file(format!("{stem}.csv"), csv)
                .file(format!("{stem}.json"), json_document(&prov, body)))
        }
        Command::Resonances { bounds } => {
            let b = parse_box(bounds)?;
            let ev = DetEvaluator::from_query(query(cfg, &cfg.rep()?, C64::new(0.0, 0.0), DetMethod::Auto));
            let found = search_zeros(&ev, &b)?;
            let prov = base_provenance("resonances", cfg).with("box", bounds.replace(' ', ""));
            #[derive(Serialize)]
            struct Body {
                w: f64,
                rep_id: String,
                #[serde(rename = "box")]
                bounds: [f64; 4],
                winding: i64,
                zeros: Vec<ZeroRecord>,
            }
            let c = found.count.contour;
            let body = Body {
                w,
                rep_id: cfg.rep.id(),
                bounds: [c.re_min, c.re_max, c.im_min, c.im_max],
                winding: found.count.winding,
                zeros: found.zeros.iter().map(ZeroRecord::from).collect(),
            };
            let mut text = format!("winding {}\n", found.count.winding);
            for z in &found.zeros {
                text.push_str(&format!("{} multiplicity {} residual {:.3e}\n", fmt_complex(z.s), z.multiplicity, z.residual));
            }
            Ok(Outcome::new(text)
                .file(format!("resonances_w{wtag}_{}.json", cfg.rep.id()), json_document(&prov, body))
                .verdict(found.consistent()))
        }
        Command::WeylCount { sigma, t_max, t_steps } => {
            if *t_max > 30.0 + 1e-12 || *sigma < -1.0 {
                return Err(param("weyl count is budgeted for T_max ≤ 30 and σ ≥ -1"));
            }
            let rep = cfg.rep()?;
            let delta = delta_value(w)?;
            let ev = DetEvaluator::from_query(query(cfg, &rep, C64::new(0.0, 0.0), DetMethod::Auto));
            let report = weyl_count(&ev, *sigma, *t_max, *t_steps)?;
            let monotone = report.n.windows(2).all(|p| p[0] <= p[1]);
            let stem = format!("weyl_w{wtag}_{}_sigma{}", cfg.rep.id(), fmt_tag(*sigma));
            let prov = base_provenance("weyl-count", cfg)
                .with("sigma", sigma)
                .with("t_max", t_max)
                .with("t_steps", t_steps);
            let rows = report
                .t
                .iter()
                .zip(&report.n)
                .zip(&report.m)
                .map(|((t, n), m)| vec![fmt_real(*t), n.to_string(), m.to_string()]);
            let csv = csv_document(&prov, &["T", "N", "M"], rows);
            #[derive(Serialize)]
            struct Cell {
                t_lo: f64,
                t_hi: f64,
                winding: Option<i64>,
                refined: Option<i64>,
                error: Option<String>,
            }
            #[derive(Serialize)]
            struct Body {
                sigma: f64,
                delta: f64,
                eta_hat: Option<f64>,
                one_plus_delta: f64,
                symmetric: bool,
                cells_consistent: bool,
                monotone: bool,
                cells: Vec<Cell>,
                zeros: Vec<ZeroRecord>,
            }
            let cells = report
                .cells
                .iter()
                .map(|c| match &c.result {
                    Ok(r) => Cell {
                        t_lo: c.t_lo,
                        t_hi: c.t_hi,
                        winding: Some(r.count.winding),
                        refined: Some(r.refined_count()),
                        error: None,
                    },
                    Err(e) => Cell { t_lo: c.t_lo, t_hi: c.t_hi, winding: None, refined: None, error: Some(e.clone()) },
                })
                .collect();
            let consistent = report.all_cells_consistent();
            let body = Body {
                sigma: *sigma,
                delta,
                eta_hat: report.eta_hat(),
                one_plus_delta: 1.0 + delta,
                symmetric: report.symmetric,
                cells_consistent: consistent,
                monotone,
                cells,
                zeros: report.zeros.iter().map(ZeroRecord::from).collect(),
            };
            let text = format!(
                "N(T_max) = {}, eta_hat = {}, 1 + delta = {:.6}, cells consistent {consistent}\n",
                report.n.last().copied().unwrap_or(0),
                report.eta_hat().map_or("undefined".into(), |e| format!("{e:.6}")),
                1.0 + delta
            );
            Ok(Outcome::new(text)
                .file(format!("{stem}.csv"), csv)
                .file(format!("{stem}.json"), json_document(&prov, body))
                .verdict(consistent && monotone))
        }
        Command::Cover { h, depth, cutoff, scan, h_min, h_max, steps, max_intervals } => {
            let config = CoverConfig { max_intervals: *max_intervals, ..CoverConfig::default() };
            if *scan {
                return volume_outcome(cfg, &config, *h_min, *h_max, *steps);
            }
            let (cover, tag, prov) = match (h, depth) {
                (Some(h), None) => (
                    refine_cover(w, *h, &config)?,
                    format!("h{}", fmt_tag(*h)),
                    Provenance::new("cover").with("w", w).with("h", h),
                ),
                (None, Some(d)) => (
                    depth_cover(w, *d, *cutoff, &config)?,
                    format!("depth{d}_n{cutoff}"),
                    Provenance::new("cover").with("w", w).with("depth", d).with("cutoff", cutoff),
                ),
                _ => return Err(param("cover needs exactly one of --h, --depth or --scan")),
            };
            let mut text = format!("intervals {}, depth {}, total length {:.6e}", cover.intervals.len(), cover.depth, cover.total_length());
            if let Some(h) = h {
                text.push_str(&format!(", boxes {}, area {:.6e}", box_count(&cover, *h), omega_area(&cover, *h)));
            }
            text.push('\n');
            Ok(Outcome::new(text).file(format!("cover_w{wtag}_{tag}.csv"), cover_csv(&cover, &prov)))
        }
        Command::EulerCheck { s, ell_max, k_max } => {
            let s = parse_complex(s)?;
            let tol = cfg.tol.unwrap_or(1e-5);
            let rep = cfg.rep()?;
            let delta = compute_delta(w, 1e-8)?.delta;
            let q = query(cfg, &rep, s, DetMethod::Auto);
            let det = zeta_eval(&q)?;
            let euler = euler_product(&q, *ell_max, *k_max, delta)?;
            let gap = (euler.value - det.value).norm() / det.value.norm();
            let prov = base_provenance("euler-check", cfg)
                .with("s", fmt_complex(s))
                .with("ell_max", ell_max)
                .with("k_max", k_max.map_or("auto".into(), |k| k.to_string()))
                .with("tol", tol);
            #[derive(Serialize)]
            struct Body {
                det: String,
                euler: String,
                relative_gap: f64,
                classes: usize,
                k_max: usize,
                tail_estimate: f64,
                passed: bool,
            }
            let passed = gap < tol;
            let body = Body {
                det: fmt_complex(det.value),
                euler: fmt_complex(euler.value),
                relative_gap: gap,
                classes: euler.classes,
                k_max: euler.k_max,
                tail_estimate: euler.tail_estimate,
                passed,
            };
            let text = format!(
                "det   {}\neuler {}\nrelative gap {gap:.3e} ({} classes, k_max {}, tail estimate {:.3e})\n",
                body.det, body.euler, euler.classes, euler.k_max, euler.tail_estimate
            );
            Ok(Outcome::new(text).file("euler_check.json".into(), json_document(&prov, body)).verdict(passed))
        }
        Command::FactorCheck { s } => {
            let s = parse_complex(s)?;
            let tol = cfg.tol.unwrap_or(1e-8);
            let residual = factorization_check(w, s, cfg.r, cfg.m)?;
            let prov = Provenance::new("factor-check").with("w", w).with("s", fmt_complex(s)).with("tol", tol);
            #[derive(Serialize)]
            struct Body {
                residual: f64,
                passed: bool,
            }
            let passed = residual < tol;
            Ok(Outcome::new(format!("residual {residual:.3e}\n"))
                .file("factor_check.json".into(), json_document(&prov, Body { residual, passed }))
                .verdict(passed))
        }
        Command::RecursionCheck { s, k } => {
            let s = parse_complex(s)?;
            let tol = cfg.tol.unwrap_or(1e-10);
            let rep = cfg.rep()?;
            let report = hecke_core::transfer::recursion_check(s, *k, &params(cfg, &rep)?)?;
            let passed = report.residual < tol && report.finite_rank <= report.rank_bound;
            let prov = base_provenance("recursion-check", cfg).with("s", fmt_complex(s)).with("k", k).with("tol", tol);
            #[derive(Serialize)]
            struct Body {
                residual: f64,
                finite_rank: usize,
                rank_bound: usize,
                passed: bool,
            }
            let body =
                Body { residual: report.residual, finite_rank: report.finite_rank, rank_bound: report.rank_bound, passed };
            Ok(Outcome::new(format!(
                "residual {:.3e}, rank {} (bound {})\n",
                report.residual, report.finite_rank, report.rank_bound
            ))
            .file("recursion_check.json".into(), json_document(&prov, body))
            .verdict(passed))
        }
        Command::Specfun { function, s, a, lambda, z } => {
            let s = parse_complex(s)?;
            let value = match function {
                SpecialFunction::Hurwitz => {
                    let a = a.as_deref().ok_or_else(|| param("hurwitz needs --a"))?;
                    let a = a.parse::<f64>().map_err(|_| param("--a must be real for hurwitz"))?;
                    hurwitz_zeta(s, a)?
                }
                SpecialFunction::Periodic => periodic_zeta(*lambda, s)?,
                SpecialFunction::Lerch => {
                    let z = z.as_deref().map(parse_complex).transpose()?.unwrap_or_default();
                    lerch(z, s, *lambda)?
                }
                SpecialFunction::Phi => {
                    let q = a.as_deref().ok_or_else(|| param("phi needs --a (the offset q)"))?;
                    lerch_phi(*lambda, s, parse_complex(q)?)?
                }
                SpecialFunction::Gamma => gamma(s)?,
                SpecialFunction::LnGamma => ln_gamma(s),
            };
            Ok(Outcome::new(format!("{}\n", fmt_complex(value))))
        }
        Command::DumpMatrix { s, basis, direct } => {
            let s = parse_complex(s)?;
            let rep = cfg.rep()?;
            let p = params(cfg, &rep)?;
            let tm = match (direct, basis) {
                (false, BasisArg::Bergman) => build_closed(s, &p)?,
                (false, BasisArg::Raw) => build_raw(s, &p, BranchPart::Full)?,
                (true, b) => {
                    let raw = build_direct(s, &p)?;
                    raw.to_basis(if *b == BasisArg::Raw { Basis::RawTaylor } else { Basis::Bergman })
                }
            };
            let prov = base_provenance("dump-matrix", cfg)
                .with("s", fmt_complex(s))
                .with("basis", format!("{basis:?}").to_lowercase())
                .with("direct", direct);
            let a = &tm.a;
            let rows = (0..a.nrows())
                .flat_map(|i| (0..a.ncols()).map(move |j| vec![i.to_string(), j.to_string(), fmt_complex(a[(i, j)])]));
            let csv = csv_document(&prov, &["row", "col", "value"], rows);
            let mut text = format!("dimension {}", tm.dim());
            if let Some(t) = tm.tail_bound {
                text.push_str(&format!(", tail bound {t:.3e}"));
            }
            text.push('\n');
            if cfg.out.is_none() {
                text = csv.clone();
            }
            Ok(Outcome::new(text).file(format!("matrix_w{wtag}_{}.csv", cfg.rep.id()), csv))
        }
        Command::Report => {
            let dir = cfg.out.as_ref().ok_or_else(|| param("report needs --out pointing at the scan results"))?;
            crate::report::emit_report(dir)
        }
    }
}

fn cover_csv(cover: &Cover, prov: &Provenance) -> String {
    let rows = cover
        .intervals
        .iter()
        .map(|i| vec![fmt_real(i.left), fmt_real(i.right), i.depth.to_string(), i.is_tail.to_string()]);
    csv_document(prov, &["left", "right", "depth", "is_tail"], rows)
}

fn volume_outcome(cfg: &RunConfig, config: &CoverConfig, h_min: f64, h_max: f64, steps: usize) -> CliResult<Outcome> {
    if !(h_min > 0.0 && h_max / h_min >= 100.0 && steps >= 4) {
        return Err(param("volume scan needs at least 4 scales spanning 2 decades"));
    }
    let w = cfg.w;
    let hs = geometric_grid(h_min, h_max, steps);
    let rows: Vec<(f64, f64, u64)> = hs
        .par_iter()
        .map(|&h| {
            let c = refine_cover(w, h, config)?;
            Ok((h, omega_area(&c, h), box_count(&c, h)))
        })
        .collect::<hecke_core::Result<_>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let area = linear_fit(&x, &rows.iter().map(|r| r.1.ln()).collect::<Vec<_>>());
    let boxes = linear_fit(&x, &rows.iter().map(|r| (r.2 as f64).ln()).collect::<Vec<_>>());
    let (area, boxes) = match (area, boxes) {
        (Some(a), Some(b)) => (a.slope, -b.slope),
        _ => return Err(param("degenerate scale regression")),
    };
    let prov = Provenance::new("cover").with("w", w).with("h_min", h_min).with("h_max", h_max).with("steps", steps);
    let csv = csv_document(
        &prov,
        &["h", "area", "boxes"],
        rows.iter().map(|(h, a, b)| vec![fmt_real(*h), fmt_real(*a), b.to_string()]),
    );
    #[derive(Serialize)]
    struct Body {
        area_slope: f64,
        box_dimension: f64,
    }
    let stem = format!("volume_w{}", fmt_tag(w));
    Ok(Outcome::new(format!("area slope {area:.6}, box dimension {boxes:.6}\n"))
        .file(format!("{stem}.csv"), csv)
        .file(format!("{stem}.json"), json_document(&prov, Body { area_slope: area, box_dimension: boxes })))
}

/// Resolves configuration, runs the command and writes its artifacts; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = cli.global.resolve().and_then(|cfg| {
        if let Some(n) = cfg.workers {
            // a second initialization in the same process is harmless
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let outcome = dispatch(&cli.command, &cfg)?;
        if let Some(dir) = &cfg.out {
            std::fs::create_dir_all(dir).map_err(crate::error::io_at(dir))?;
            for (name, contents) in &outcome.files {
                let path = dir.join(name);
                std::fs::write(&path, contents).map_err(crate::error::io_at(&path))?;
            }
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.passed {
                crate::error::EXIT_OK
            } else {
                crate::error::EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            if cli.global.json_errors {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}
