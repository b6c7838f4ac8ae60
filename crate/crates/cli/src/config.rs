//! Run configuration: flat `key = value` files overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hecke_core::group::{induce_from_index2, CMatrix};
use hecke_core::{UnitaryRep, C64};
use serde::Deserialize;

use crate::error::{io_at, param, CliError, CliResult};
use crate::format::fmt_tag;

pub const CACHE_ENV: &str = "HECKE_CACHE";

#[derive(Debug, Clone, PartialEq)]
pub enum RepSpec {
    Trivial,
    Sign,
    Character(f64),
    Induced,
    Matrix(PathBuf),
}

impl RepSpec {
    /// Short identifier used in file names and JSON.
    pub fn id(&self) -> String {
        match self {
            RepSpec::Trivial => "trivial".into(),
            RepSpec::Sign => "sign".into(),
            RepSpec::Character(l) => format!("char{}", fmt_tag(*l)),
            RepSpec::Induced => "induced".into(),
            RepSpec::Matrix(p) => {
                format!("matrix-{}", p.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default())
            }
        }
    }

    pub fn build(&self, w: f64) -> CliResult<UnitaryRep> {
        Ok(match self {
            RepSpec::Trivial => UnitaryRep::trivial(),
            RepSpec::Sign => UnitaryRep::sign(),
            RepSpec::Character(l) => UnitaryRep::character(*l)?,
            RepSpec::Induced => induce_from_index2(w)?.rep,
            RepSpec::Matrix(path) => read_matrix_rep(path)?,
        })
    }
}

impl fmt::Display for RepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepSpec::Character(l) => write!(f, "character:{l}"),
            RepSpec::Matrix(p) => write!(f, "matrix:{}", p.display()),
            other => f.write_str(&other.id()),
        }
    }
}

impl FromStr for RepSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "trivial" => Ok(RepSpec::Trivial),
            "sign" => Ok(RepSpec::Sign),
            "induced" | "induced-index2" => Ok(RepSpec::Induced),
            other => {
                if let Some(l) = other.strip_prefix("character:") {
                    let l = l.parse::<f64>().map_err(|_| param(format!("bad character parameter '{l}'")))?;
                    Ok(RepSpec::Character(l))
                } else if let Some(p) = other.strip_prefix("matrix:") {
                    Ok(RepSpec::Matrix(PathBuf::from(p)))
                } else {
                    Err(param(format!(
                        "unknown representation '{other}' (trivial, sign, character:λ, induced, matrix:FILE)"
                    )))
                }
            }
        }
    }
}

/// `{"us": [[[re, im], ...], ...], "ut": ...}`
#[derive(Deserialize)]
struct MatrixFile {
    us: Vec<Vec<[f64; 2]>>,
    ut: Vec<Vec<[f64; 2]>>,
}

fn to_matrix(rows: &[Vec<[f64; 2]>]) -> CliResult<CMatrix> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(param("representation matrices must be square and non-empty"));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn read_matrix_rep(path: &Path) -> CliResult<UnitaryRep> {
    let text = std::fs::read_to_string(path).map_err(|_| CliError::MissingInput(path.to_path_buf()))?;
    let file: MatrixFile =
        serde_json::from_str(&text).map_err(|e| param(format!("{}: {e}", path.display())))?;
    let label = format!("matrix:{}", path.display());
    Ok(UnitaryRep::from_matrices(to_matrix(&file.us)?, to_matrix(&file.ut)?, label)?)
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub w: f64,
    pub rep: RepSpec,
    pub m: Option<usize>,
    pub r: Option<f64>,
    pub n_direct: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            w: 3.0,
            rep: RepSpec::Trivial,
            m: None,
            r: None,
            n_direct: None,
            tol: None,
            out: None,
            cache: None,
            workers: None,
            seed: 0,
        }
    }
}

/// Values given on the command line; `None` leaves the config value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub w: Option<f64>,
    pub rep: Option<String>,
    pub m: Option<usize>,
    pub r: Option<f64>,
    pub n_direct: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| param(format!("bad value '{value}' for key '{key}'")))
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment, unknown keys are errors.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| param(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "w" => cfg.w = parse_value(key, value)?,
                "rep" => cfg.rep = value.parse()?,
                "m" => cfg.m = Some(parse_value(key, value)?),
                "r" => cfg.r = Some(parse_value(key, value)?),
                "n_direct" => cfg.n_direct = Some(parse_value(key, value)?),
                "tol" => cfg.tol = Some(parse_value(key, value)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "cache" => cfg.cache = Some(PathBuf::from(value)),
                "workers" => cfg.workers = Some(parse_value(key, value)?),
                "seed" => cfg.seed = parse_value(key, value)?,
                _ => return Err(param(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        Self::parse(&text)
    }

    /// Flags win over the environment, which wins over the file.
    pub fn apply(mut self, o: Overrides, cache_env: Option<PathBuf>) -> CliResult<Self> {
        if let Some(w) = o.w {
            self.w = w;
        }
        if let Some(rep) = o.rep {
            self.rep = rep.parse()?;
        }
        self.m = o.m.or(self.m);
        self.r = o.r.or(self.r);
        self.n_direct = o.n_direct.or(self.n_direct);
        self.tol = o.tol.or(self.tol);
        self.out = o.out.or(self.out);
        self.cache = o.cache.or(cache_env).or(self.cache);
        self.workers = o.workers.or(self.workers);
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> CliResult<()> {
        hecke_core::group::check_width(self.w)?;
        if let RepSpec::Character(l) = self.rep {
            if !l.is_finite() {
                return Err(param("character parameter must be finite"));
            }
        }
        if let Some(r) = self.r {
            let a = hecke_core::group::hull_endpoint(self.w)?;
            if !(r > a && r < 1.0) {
                return Err(param(format!("radius R = {r} is not admissible for w = {}", self.w)));
            }
        }
        if self.m == Some(0) || self.workers == Some(0) || self.n_direct == Some(0) {
            return Err(param("m, n_direct and workers must be positive"));
        }
        if self.tol.is_some_and(|t| t.is_nan() || t <= 0.0) {
            return Err(param("tol must be positive"));
        }
        Ok(())
    }

    pub fn rep(&self) -> CliResult<UnitaryRep> {
        self.rep.build(self.w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let cfg = RunConfig::parse("# run\nw = 4\nrep = character:0.25\nm = 50  # degree\nseed=7\n").unwrap();
        assert_eq!(cfg.w, 4.0);
        assert_eq!(cfg.rep, RepSpec::Character(0.25));
        assert_eq!(cfg.m, Some(50));
        let o = Overrides { w: Some(3.0), m: Some(60), ..Overrides::default() };
        let merged = cfg.apply(o, Some("env.jsonl".into())).unwrap();
        assert_eq!((merged.w, merged.m, merged.seed), (3.0, Some(60), 7));
        assert_eq!(merged.cache, Some(PathBuf::from("env.jsonl")));
    }

    #[test]
    fn flag_beats_environment() {
        let o = Overrides { cache: Some("flag.jsonl".into()), ..Overrides::default() };
        let cfg = RunConfig::default().apply(o, Some("env.jsonl".into())).unwrap();
        assert_eq!(cfg.cache, Some(PathBuf::from("flag.jsonl")));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("w 3").is_err());
        assert!(RunConfig::parse("w = three").is_err());
        assert!(RunConfig::parse("w = 1.5").unwrap().validate().is_err());
        assert!("quaternion".parse::<RepSpec>().is_err());
        let o = Overrides { r: Some(0.1), ..Overrides::default() };
        assert!(RunConfig::default().apply(o, None).is_err());
    }

    #[test]
    fn rep_ids() {
        for (text, id) in [("trivial", "trivial"), ("character:0.25", "char0.25"), ("induced-index2", "induced")] {
            assert_eq!(text.parse::<RepSpec>().unwrap().id(), id);
        }
    }
}
