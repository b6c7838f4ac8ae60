use std::fmt;
use std::str::FromStr;

use super::{check_width, MoebiusMap, HYPERBOLIC_TOL};
use crate::{Error, Result};

/// Element of `Γ_w` written in the free-product normal form.
///
/// `Mixed(n)` stands for `S T^{n_1} S T^{n_2} ⋯ S T^{n_p}` with every `n_i ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupWord {
    S,
    TPower(i64),
    Mixed(Vec<i64>),
}

impl GroupWord {
    pub fn mixed(exponents: Vec<i64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::domain("a mixed word needs at least one exponent"));
        }
        if exponents.contains(&0) {
            return Err(Error::domain("exponents of a mixed word must be nonzero"));
        }
        Ok(GroupWord::Mixed(exponents))
    }

    pub fn exponents(&self) -> &[i64] {
        match self {
            GroupWord::Mixed(n) => n,
            _ => &[],
        }
    }

    pub fn matrix(&self, w: f64) -> MoebiusMap {
        match self {
            GroupWord::S => MoebiusMap::s(),
            GroupWord::TPower(n) => MoebiusMap::t_power(*n, w),
            GroupWord::Mixed(ns) => ns.iter().fold(MoebiusMap::identity(), |acc, &n| {
                acc * MoebiusMap::s() * MoebiusMap::t_power(n, w)
            }),
        }
    }

    /// `|tr|` of the word's matrix; the sign ambiguity of `PSL₂` drops out.
    pub fn abs_trace(&self, w: f64) -> f64 {
        self.matrix(w).trace().abs()
    }

    /// Least rotation of the exponent tuple; pure powers are returned unchanged.
    pub fn canonical(&self) -> Self {
        match self {
            GroupWord::Mixed(ns) => GroupWord::Mixed(least_rotation(ns)),
            other => other.clone(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            GroupWord::Mixed(ns) => is_least_rotation(ns),
            _ => true,
        }
    }

    /// True iff the exponent tuple is not a repetition of a shorter block.
    pub fn is_primitive(&self) -> bool {
        match self {
            GroupWord::S => true,
            GroupWord::TPower(n) => n.abs() == 1,
            GroupWord::Mixed(ns) => smallest_period(ns) == ns.len(),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            GroupWord::S => GroupWord::S,
            GroupWord::TPower(n) => GroupWord::TPower(-n),
            // (S T^{n_1} ⋯ S T^{n_p})^{-1} = T^{-n_p} S ⋯ T^{-n_1} S; conjugating by S
            // gives the normal form S T^{-n_p} ⋯ S T^{-n_1}.
            GroupWord::Mixed(ns) => GroupWord::Mixed(ns.iter().rev().map(|n| -n).collect()),
        }
    }

    /// Concatenation of two mixed words (the group product).
    pub fn concat(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (GroupWord::Mixed(a), GroupWord::Mixed(b)) => {
                Ok(GroupWord::Mixed(a.iter().chain(b).copied().collect()))
            }
            _ => Err(Error::domain("concatenation is defined for mixed words only")),
        }
    }
}

fn least_rotation(ns: &[i64]) -> Vec<i64> {
    let p = ns.len();
    (0..p)
        .map(|r| ns[r..].iter().chain(&ns[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

pub(crate) fn is_least_rotation(ns: &[i64]) -> bool {
    let p = ns.len();
    (1..p).all(|r| {
        let rotated = ns[r..].iter().chain(&ns[..r]);
        ns.iter().cmp(rotated) != std::cmp::Ordering::Greater
    })
}

pub(crate) fn smallest_period(ns: &[i64]) -> usize {
    let p = ns.len();
    (1..=p)
        .find(|&q| p.is_multiple_of(q) && (q..p).all(|i| ns[i] == ns[i - q]))
        .unwrap_or(p)
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupWord::S => write!(f, "S"),
            GroupWord::TPower(n) => write!(f, "T^{n}"),
            GroupWord::Mixed(ns) => {
                let body: Vec<String> = ns.iter().map(|n| n.to_string()).collect();
                write!(f, "({})", body.join(","))
            }
        }
    }
}

impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "S" {
            return Ok(GroupWord::S);
        }
        if let Some(exp) = text.strip_prefix("T^") {
            let n = exp
                .parse()
                .map_err(|_| Error::domain(format!("bad T power in {text:?}")))?;
            return Ok(GroupWord::TPower(n));
        }
        let inner = text
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::domain(format!("cannot parse group word {text:?}")))?;
        let exponents = inner
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::domain(format!("bad exponent in {text:?}")))?;
        GroupWord::mixed(exponents)
    }
}

/// `arccosh(x)` in the form `ln(x + sqrt(x² - 1))`.
pub(crate) fn arccosh(x: f64) -> f64 {
    (x + ((x - 1.0) * (x + 1.0)).sqrt()).ln()
}

/// Hyperbolic length `2 arccosh(|tr M|/2)` of the closed geodesic of `word`.
pub fn geodesic_length(word: &GroupWord, w: f64) -> Result<f64> {
    check_width(w)?;
    let tr = word.abs_trace(w);
    if tr <= 2.0 + HYPERBOLIC_TOL {
        return Err(Error::NotHyperbolic { word: word.to_string(), trace: tr });
    }
    Ok(2.0 * arccosh(tr / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word(ns: &[i64]) -> GroupWord {
        GroupWord::mixed(ns.to_vec()).unwrap()
    }

    #[test]
    fn short_lengths() {
        let l1 = geodesic_length(&word(&[1]), 3.0).unwrap();
        assert!((l1 - 1.9248473002).abs() < 1e-9);
        let l2 = geodesic_length(&word(&[2]), 3.0).unwrap();
        assert!((l2 - 3.5254943480).abs() < 1e-9);
        let l11 = geodesic_length(&word(&[1, 1]), 3.0).unwrap();
        assert!((word(&[1, 1]).abs_trace(3.0) - 7.0).abs() < 1e-12);
        assert!((l11 - 2.0 * 3.5f64.acosh()).abs() < 1e-12);
    }

    #[test]
    fn parabolic_and_elliptic_rejected() {
        assert!(matches!(
            geodesic_length(&GroupWord::TPower(2), 3.0),
            Err(Error::NotHyperbolic { .. })
        ));
        assert!(matches!(geodesic_length(&GroupWord::S, 3.0), Err(Error::NotHyperbolic { .. })));
    }

    #[test]
    fn display_round_trip() {
        let w = word(&[1, -2, 3]);
        assert_eq!(w.to_string(), "(1,-2,3)");
        assert_eq!("(1,-2,3)".parse::<GroupWord>().unwrap(), w);
        assert_eq!("S".parse::<GroupWord>().unwrap(), GroupWord::S);
        assert_eq!("T^-4".parse::<GroupWord>().unwrap(), GroupWord::TPower(-4));
        assert!("(1,0)".parse::<GroupWord>().is_err());
        assert!("()".parse::<GroupWord>().is_err());
    }

    #[test]
    fn canonical_and_primitive() {
        assert_eq!(word(&[3, -1, 2]).canonical(), word(&[-1, 2, 3]));
        assert!(!word(&[1, 1]).is_primitive());
        assert!(!word(&[1, -2, 1, -2]).is_primitive());
        assert!(word(&[1, -2, 1]).is_primitive());
        assert!(word(&[-1, 2]).is_canonical());
        assert!(!word(&[2, -1]).is_canonical());
    }

    #[test]
    fn inverse_matrix() {
        let u = word(&[1, -2, 3]);
        // The inverse is returned as a conjugate representative, so compare traces.
        assert!((u.abs_trace(3.0) - u.inverse().abs_trace(3.0)).abs() < 1e-9);
        let s = GroupWord::S.matrix(3.0);
        let literal = s * u.inverse().matrix(3.0) * s;
        let id = literal * u.matrix(3.0);
        assert!((id.entries()[0] - 1.0).abs() < 1e-9 && id.entries()[1].abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn matrix_is_multiplicative(
            a in prop::collection::vec(prop_oneof![-4i64..=-1, 1i64..=4], 1..4),
            b in prop::collection::vec(prop_oneof![-4i64..=-1, 1i64..=4], 1..4),
            w in 2.1f64..6.0,
        ) {
            let u = GroupWord::Mixed(a);
            let v = GroupWord::Mixed(b);
            let uv = u.concat(&v).unwrap().matrix(w);
            let prod = u.matrix(w) * v.matrix(w);
            let scale = uv.entries().iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (x, y) in uv.entries().iter().zip(prod.entries()) {
                prop_assert!((x - y).abs() <= 1e-12 * scale);
            }
            prop_assert!((uv.determinant() - 1.0).abs() < 1e-12 * scale * scale);
        }

        #[test]
        fn rotation_preserves_trace(
            ns in prop::collection::vec(prop_oneof![-3i64..=-1, 1i64..=3], 1..5),
            w in 2.1f64..5.0,
        ) {
            let u = GroupWord::Mixed(ns);
            let c = u.canonical();
            let (t1, t2) = (u.abs_trace(w), c.abs_trace(w));
            prop_assert!((t1 - t2).abs() <= 1e-12 * t1);
            let ti = u.inverse().abs_trace(w);
            prop_assert!((t1 - ti).abs() <= 1e-12 * t1);
        }

        #[test]
        fn branch_maps_contract_disk(n in prop_oneof![-50i64..=-1, 1i64..=50], w in 2.05f64..8.0, frac in 0.0f64..1.0, angle in 0.0f64..std::f64::consts::TAU) {
            let rmin = crate::group::hull_endpoint(w).unwrap();
            let r = rmin + frac * (0.999 - rmin);
            let g = crate::group::branch_map(n, w).unwrap();
            let z = crate::C64::from_polar(r, angle);
            prop_assert!(g.apply(z).norm() <= 1.0 / (w - r) * (1.0 + 1e-12));
        }
    }
}
