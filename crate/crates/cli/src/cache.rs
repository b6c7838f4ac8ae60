//! Append-only JSON-lines cache of determinant values with sampled audits.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};

use hecke_core::zeta::{DetMethod, ZetaValue};
use hecke_core::{UnitaryRep, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_at, CliResult};
use crate::format::{fmt_complex, parse_complex};

pub const CACHE_VERSION: u32 = 1;
pub const AUDIT_RATE: f64 = 0.01;
pub const AUDIT_TOL: f64 = 1e-12;
const QUANTUM: f64 = 1e12;

/// Identifies one determinant evaluation; `s` is quantized to `1e-12`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub w: String,
    pub rep: String,
    pub re: i64,
    pub im: i64,
    pub m: Option<usize>,
    pub r: Option<String>,
}

impl CacheKey {
    pub fn new(w: f64, rep: &UnitaryRep, s: C64, m: Option<usize>, r: Option<f64>) -> Self {
        Self {
            w: format!("{w:e}"),
            rep: rep_hash(rep),
            re: (s.re * QUANTUM).round() as i64,
            im: (s.im * QUANTUM).round() as i64,
            m,
            r: r.map(|r| format!("{r:e}")),
        }
    }
}

/// Stable digest of the representation matrices.
pub fn rep_hash(rep: &UnitaryRep) -> String {
    let mut h = DefaultHasher::new();
    rep.dim().hash(&mut h);
    for z in rep.u_s().iter().chain(rep.u_t().iter()) {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    format!("{:016x}", h.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub version: u32,
    pub key: CacheKey,
    pub value: String,
    pub coarse: String,
    pub resolution: usize,
    pub converged: bool,
    pub method: String,
}

fn method_name(m: DetMethod) -> &'static str {
    match m {
        DetMethod::Taylor => "taylor",
        DetMethod::Collocation => "collocation",
        DetMethod::Auto => "auto",
    }
}

impl CacheRecord {
    fn new(key: CacheKey, v: &ZetaValue) -> Self {
        Self {
            version: CACHE_VERSION,
            key,
            value: fmt_complex(v.value),
            coarse: fmt_complex(v.coarse),
            resolution: v.resolution,
            converged: v.converged,
            method: method_name(v.method).into(),
        }
    }

    fn decode(&self) -> Option<ZetaValue> {
        let method = match self.method.as_str() {
            "taylor" => DetMethod::Taylor,
            "collocation" => DetMethod::Collocation,
            "auto" => DetMethod::Auto,
            _ => return None,
        };
        Some(ZetaValue {
            value: parse_complex(&self.value).ok()?,
            coarse: parse_complex(&self.coarse).ok()?,
            resolution: self.resolution,
            converged: self.converged,
            method,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    pub skipped_lines: usize,
    pub audits: usize,
    pub audit_failures: usize,
}

#[derive(Debug)]
pub struct ZetaCache {
    path: Option<PathBuf>,
    index: HashMap<CacheKey, ZetaValue>,
    pending: Vec<CacheRecord>,
    rng: ChaCha8Rng,
    pub stats: CacheStats,
}

impl ZetaCache {
    /// A cache that stores nothing.
    pub fn disabled(seed: u64) -> Self {
        Self {
            path: None,
            index: HashMap::new(),
            pending: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: CacheStats::default(),
        }
    }

    /// Loads `path` if it exists; malformed or stale lines are skipped.
    pub fn open(path: &Path, seed: u64) -> CliResult<Self> {
        let mut cache = Self::disabled(seed);
        cache.path = Some(path.to_path_buf());
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(io_at(path))?;
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let decoded = serde_json::from_str::<CacheRecord>(line)
                    .ok()
                    .filter(|r| r.version == CACHE_VERSION)
                    .and_then(|r| r.decode().map(|v| (r.key, v)));
                match decoded {
                    Some((k, v)) => {
                        cache.index.insert(k, v);
                    }
                    None => cache.stats.skipped_lines += 1,
                }
            }
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn is_enabled(&self) -> bool {
        self.path.is_some()
    }

    /// A hit, or `None` when missing or selected for audit.
    pub fn lookup(&mut self, key: &CacheKey) -> Option<ZetaValue> {
        if !self.is_enabled() {
            return None;
        }
        let hit = self.index.get(key).copied();
        if hit.is_some() && self.rng.random_bool(AUDIT_RATE) {
            self.stats.audits += 1;
            return None;
        }
        match hit {
            Some(_) => self.stats.hits += 1,
            None => self.stats.misses += 1,
        }
        hit
    }

    /// Stores a fresh value; an existing entry that disagrees counts as an audit failure.
    pub fn insert(&mut self, key: CacheKey, value: ZetaValue) {
        if !self.is_enabled() {
            return;
        }
        if let Some(old) = self.index.get(&key) {
            let scale = value.value.norm().max(1.0);
            if (old.value - value.value).norm() > AUDIT_TOL * scale {
                self.stats.audit_failures += 1;
            } else {
                return;
            }
        }
        self.pending.push(CacheRecord::new(key.clone(), &value));
        self.index.insert(key, value);
    }

    /// Appends pending records to the file.
    pub fn flush(&mut self) -> CliResult<()> {
        let Some(path) = &self.path else { return Ok(()) };
        if self.pending.is_empty() {
            return Ok(());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_at(dir))?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io_at(path))?;
        let mut text = String::new();
        for r in self.pending.drain(..) {
            text.push_str(&serde_json::to_string(&r).expect("record serializes"));
            text.push('\n');
        }
        file.write_all(text.as_bytes()).map_err(io_at(path))
    }
}
