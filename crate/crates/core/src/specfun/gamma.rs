use std::f64::consts::PI;

use crate::{Error, Result, C64};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// A logarithm of `Γ(z)`; only `exp` of the result is meaningful (the branch is not principal).
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        return C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(C64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, p) in LANCZOS.iter().enumerate().skip(1) {
        x += *p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `Γ(z)`, with an error at the poles `z ∈ -ℕ₀`.
pub fn gamma(z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Pole { function: "gamma", at: z });
    }
    Ok(ln_gamma(z).exp())
}

/// A logarithm of `sin(πz)` that stays finite for large `|Im z|`.
pub fn ln_sin_pi(z: C64) -> C64 {
    let i = C64::i();
    if z.im > 1.0 {
        // sin(πz) = e^{-iπz} (e^{2πiz} - 1) / (2i)
        -i * PI * z + ((2.0 * PI * i * z).exp() - 1.0).ln() - (2.0 * i).ln()
    } else if z.im < -1.0 {
        i * PI * z + (1.0 - (-2.0 * PI * i * z).exp()).ln() - (2.0 * i).ln()
    } else {
        (z * PI).sin().ln()
    }
}

/// Rising factorial `(x)_j = x (x+1) ⋯ (x+j-1)`.
pub fn pochhammer(x: C64, j: usize) -> C64 {
    (0..j).fold(C64::new(1.0, 0.0), |acc, i| acc * (x + i as f64))
}
