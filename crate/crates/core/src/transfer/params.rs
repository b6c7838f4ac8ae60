use crate::group::{hull_endpoint, UnitaryRep};
use crate::{Error, Result};

/// Default bound on the matrix dimension `d(M+1)`.
pub const DEFAULT_SIZE_CAP: usize = 2000;

/// Where the transfer operator is discretized and with which representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationParams {
    pub w: f64,
    /// Radius of the disk `D(0, R)` carrying the Bergman space.
    pub r: f64,
    /// Maximal monomial degree `M`.
    pub m: usize,
    pub rep: UnitaryRep,
    /// Branch cutoff for the direct-summation builder.
    pub n_direct: usize,
    pub size_cap: usize,
}

impl DiscretizationParams {
    /// Default radius `(r_min + 1)/2` and degree 40.
    pub fn new(w: f64, rep: UnitaryRep) -> Result<Self> {
        let r_min = hull_endpoint(w)?;
        Self::with(w, (r_min + 1.0) / 2.0, 40, rep)
    }

    pub fn with(w: f64, r: f64, m: usize, rep: UnitaryRep) -> Result<Self> {
        let p = Self { w, r, m, rep, n_direct: 100_000, size_cap: DEFAULT_SIZE_CAP };
        p.validate()?;
        Ok(p)
    }

    pub fn default_radius(w: f64) -> Result<f64> {
        Ok((hull_endpoint(w)? + 1.0) / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let r_min = hull_endpoint(self.w)?;
        if !(self.r > r_min && self.r < 1.0) {
            return Err(Error::domain(format!(
                "disk radius must lie in ({r_min}, 1), got {}",
                self.r
            )));
        }
        // R > r_min already gives R(w - R) > 1; both are kept explicit.
        if 1.0 / (self.w - self.r) >= self.r || self.w * self.r <= 1.0 {
            return Err(Error::domain("disk is not mapped strictly into itself"));
        }
        if self.dim() > self.size_cap {
            return Err(Error::Resource(format!(
                "matrix dimension {} exceeds the cap {}",
                self.dim(),
                self.size_cap
            )));
        }
        Ok(())
    }

    pub fn degree(mut self, m: usize) -> Result<Self> {
        self.m = m;
        self.validate()?;
        Ok(self)
    }

    pub fn radius(mut self, r: f64) -> Result<Self> {
        self.r = r;
        self.validate()?;
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.rep.dim()
    }

    /// Matrix dimension `d(M+1)`.
    pub fn dim(&self) -> usize {
        self.d() * (self.m + 1)
    }

    /// Row/column index of monomial degree `j` in component `k`.
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.d() + k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_window() {
        let p = DiscretizationParams::new(3.0, UnitaryRep::trivial()).unwrap();
        assert!((p.r - (0.381_966_011_250_105_1 + 1.0) / 2.0).abs() < 1e-15);
        assert!(p.clone().radius(0.3).is_err());
        assert!(p.clone().radius(1.0).is_err());
        assert!(p.clone().radius(0.6).is_ok());
        assert!(matches!(p.degree(5000), Err(Error::Resource(_))));
    }
}
