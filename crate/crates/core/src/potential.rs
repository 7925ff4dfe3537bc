//! Complex trigonometric-polynomial potentials of period 2π.
//!
//! A [`FourierPotential`] stores `V(x) = Σ a_k e^{ikx}` as a sparse map from
//! mode `k` to coefficient `a_k`. Exact-zero coefficients are never stored,
//! so two potentials compare equal iff they have identical mode tables.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("malformed potential document: {0}")]
    Malformed(String),
    #[error("mode `{0}` is not an integer")]
    NonIntegerMode(String),
    #[error("coefficient for mode {0} is not finite")]
    NonFinite(i64),
    #[error("duplicate entry for mode {0}")]
    DuplicateMode(i64),
    #[error("homotopy parameter {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("scaling factor must be positive, got {0}")]
    BadScale(u64),
    #[error("mode {0} is out of range; |k| must fit in i64")]
    ModeOutOfRange(i64),
    #[error("mode {0} overflows when scaled by {1}")]
    ModeOverflow(i64, u64),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierPotential {
    coeffs: BTreeMap<i64, Complex64>,
}

impl FourierPotential {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a potential from `(mode, coefficient)` pairs, summing repeated
    /// modes and dropping exact zeros. Panics on mode `i64::MIN`, whose
    /// negation does not exist.
    pub fn from_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (k, a) in modes {
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Self::canonical(coeffs)
    }

    /// Convenience constructor for real coefficients.
    pub fn from_real_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        Self::from_modes(modes.into_iter().map(|(k, a)| (k, Complex64::new(a, 0.0))))
    }

    /// The Mathieu potential `2 cos x`.
    pub fn mathieu() -> Self {
        Self::from_real_modes([(-1, 1.0), (1, 1.0)])
    }

    fn canonical(mut coeffs: BTreeMap<i64, Complex64>) -> Self {
        assert!(!coeffs.contains_key(&i64::MIN), "mode i64::MIN is not supported");
        coeffs.retain(|_, a| *a != Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &a)| (k, a))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Same as [`is_zero`](Self::is_zero): no stored modes.
    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn min_mode(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_mode(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// True when every stored mode is strictly positive. Only these
    /// potentials have the half-line spectrum `[0, ∞)`.
    pub fn is_gasymov_class(&self) -> bool {
        self.min_mode().is_none_or(|k| k >= 1)
    }

    /// True when `V` is real-valued, i.e. `a_{-k} = conj(a_k)` for all modes.
    pub fn is_real(&self) -> bool {
        self.conjugate() == *self
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, &a)| a * Complex64::cis(k as f64 * x))
            .sum()
    }

    /// `q_n(x) = n² V(nx)`: coefficient `n² a_k` moves to mode `k n`.
    pub fn scale(&self, n: u64) -> Result<Self, PotentialError> {
        if n == 0 {
            return Err(PotentialError::BadScale(n));
        }
        let factor = (n as f64) * (n as f64);
        let ni = i64::try_from(n).map_err(|_| PotentialError::BadScale(n))?;
        let mut coeffs = BTreeMap::new();
        for (&k, &a) in &self.coeffs {
            let kn = k.checked_mul(ni).ok_or(PotentialError::ModeOverflow(k, n))?;
            coeffs.insert(kn, a * factor);
        }
        Ok(Self::canonical(coeffs))
    }

    /// Adds the constant `c` to the potential.
    pub fn shift(&self, c: Complex64) -> Self {
        let mut coeffs = self.coeffs.clone();
        *coeffs.entry(0).or_insert(Complex64::new(0.0, 0.0)) += c;
        Self::canonical(coeffs)
    }

    /// Pointwise complex conjugate: mode `k` maps to `-k` with `conj(a_k)`.
    pub fn conjugate(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, a)| (-k, a.conj())).collect(),
        }
    }

    /// The member `ε V` of the linear homotopy from the free operator to `V`.
    pub fn homotopy_member(&self, eps: f64) -> Result<Self, PotentialError> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(PotentialError::EpsilonOutOfRange(eps));
        }
        Ok(Self::canonical(
            self.coeffs.iter().map(|(&k, &a)| (k, a * eps)).collect(),
        ))
    }

    /// Keeps only the modes with `|k| <= max_abs_mode`.
    pub fn truncate(&self, max_abs_mode: i64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.unsigned_abs() <= max_abs_mode.unsigned_abs())
                .map(|(&k, &a)| (k, a))
                .collect(),
        }
    }

    /// Upper bound for `sup |V|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm()).sum()
    }
}

impl fmt::Display for FourierPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        for (i, (k, a)) in self.modes().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}: {a}")?;
        }
        write!(f, "}}")
    }
}

/// On-disk form of a potential.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    coeffs: Vec<RawCoeff>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoeff {
    k: serde_json::Number,
    re: f64,
    im: f64,
}

/// A parsed potential file together with its optional label.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialDocument {
    pub label: Option<String>,
    pub potential: FourierPotential,
}

impl PotentialDocument {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, PotentialError> {
        let raw: RawDocument =
            serde_json::from_slice(bytes).map_err(|e| PotentialError::Malformed(e.to_string()))?;
        let mut coeffs = BTreeMap::new();
        for entry in raw.coeffs {
            let k = entry
                .k
                .as_i64()
                .ok_or_else(|| PotentialError::NonIntegerMode(entry.k.to_string()))?;
            if k == i64::MIN {
                return Err(PotentialError::ModeOutOfRange(k));
            }
            if !(entry.re.is_finite() && entry.im.is_finite()) {
                return Err(PotentialError::NonFinite(k));
            }
            if coeffs.insert(k, Complex64::new(entry.re, entry.im)).is_some() {
                return Err(PotentialError::DuplicateMode(k));
            }
        }
        Ok(Self {
            label: raw.label,
            potential: FourierPotential::canonical(coeffs),
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawDocument {
            coeffs: self
                .potential
                .modes()
                .map(|(k, a)| RawCoeff {
                    k: k.into(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
            label: self.label.clone(),
        };
        serde_json::to_string(&raw).expect("potential document serializes")
    }
}

/// Parses a potential file, discarding the label.
pub fn load(document: &str) -> Result<FourierPotential, PotentialError> {
    PotentialDocument::from_slice(document.as_bytes()).map(|d| d.potential)
}
