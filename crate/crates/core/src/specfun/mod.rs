//! Complex special functions behind the closed-form transfer matrix.

mod gamma;
mod growth;
mod hurwitz;
mod lerch;

pub use gamma::{gamma, ln_gamma, ln_sin_pi, pochhammer};
pub use growth::{lerch_growth_scan, LerchGrowthScan};
pub use hurwitz::{hurwitz_zeta, hurwitz_zeta_with, EulerMaclaurin};
pub use lerch::{lerch, lerch_phi, periodic_zeta, periodic_zeta_with, PeriodicZetaQuery, ZetaMethod};

use crate::C64;

/// Neumaier-compensated running sum of complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: C64,
    carry: C64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: C64) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.carry.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.carry.im);
    }

    pub(crate) fn value(&self) -> C64 {
        self.sum + self.carry
    }
}

fn neumaier(sum: f64, x: f64, carry: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}
