use std::fmt;
use std::ops::Mul;

use super::check_width;
use crate::{Error, Result, C64};

const DET_TOL: f64 = 1e-12;

/// Element of `PSL₂(ℝ)`: a unit-determinant real matrix up to sign.
///
/// The stored representative has its first nonzero entry positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MoebiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = (a * d).abs().max((b * c).abs()).max(1.0);
        if !(det - 1.0).abs().le(&(DET_TOL * scale)) {
            return Err(Error::domain(format!("determinant {det} is not 1")));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    fn normalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let first = [a, b, c, d].into_iter().find(|x| *x != 0.0).unwrap_or(1.0);
        if first < 0.0 {
            Self { a: -a, b: -b, c: -c, d: -d }
        } else {
            Self { a, b, c, d }
        }
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `S(z) = -1/z`.
    pub fn s() -> Self {
        Self::normalized(0.0, 1.0, -1.0, 0.0)
    }

    /// `T_w^n(z) = z + n w`.
    pub fn t_power(n: i64, w: f64) -> Self {
        Self { a: 1.0, b: n as f64 * w, c: 0.0, d: 1.0 }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::normalized(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::normalized(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, z: C64) -> C64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    pub fn apply_real(&self, x: f64) -> f64 {
        (self.a * x + self.b) / (self.c * x + self.d)
    }

    /// Derivative `1/(cz + d)²`.
    pub fn derivative(&self, z: C64) -> C64 {
        let q = z * self.c + self.d;
        (q * q).inv()
    }

    /// Image of the real interval `[lo, hi]`, assuming no pole inside it.
    pub fn image_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        let u = self.apply_real(lo);
        let v = self.apply_real(hi);
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;

    fn mul(self, rhs: MoebiusMap) -> MoebiusMap {
        self.compose(&rhs)
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// The branch `γ_n = S T_w^n`, i.e. `z ↦ -1/(z + n w)`.
pub fn branch_map(n: i64, w: f64) -> Result<MoebiusMap> {
    if n == 0 {
        return Err(Error::domain("branch index n must be nonzero"));
    }
    check_width(w)?;
    Ok(MoebiusMap::s() * MoebiusMap::t_power(n, w))
}
