//! Integration-free evaluation of `c(q; 1, x)` and `s(q; 1, x)` by Picard
//! iteration on exponential series.
//!
//! At `z = 1` the fundamental system solves the Volterra equations
//!
//! ```text
//! c(x) = cos x + ∫₀ˣ sin(x - t) q(t) c(t) dt
//! s(x) = sin x + ∫₀ˣ sin(x - t) q(t) s(t) dt
//! ```
//!
//! Writing `sin(x - t) = (e^{i(x-t)} - e^{-i(x-t)}) / 2i`, each Picard iterate
//! of a finite series `Σ b_ℓ e^{iℓx}` is again a finite series, obtained by
//! antidifferentiating every product term `γ e^{imt}` in closed form:
//!
//! ```text
//! γ e^{imx}  ↦  -γ/(m²-1) e^{imx} + γ/(2(m-1)) e^{ix} - γ/(2(m+1)) e^{-ix}
//! ```
//!
//! This requires `m ≠ ±1`. When `q` has only modes `≥ 3`, every product term
//! has `m ≥ 2` and the iteration never meets that case; every iterate then
//! starts at exponent `-1` and vanishes at `x = 2π` together with its
//! derivative, which forces `Δ(q; 1) = 2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::potential::{FourierPotential, PotentialError};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PicardError {
    /// The product `e^{∓it} q(t) u(t)` has a constant term, so its
    /// antiderivative grows linearly in `t` and is not a periodic series.
    #[error("iterate {iterate}: product term at exponent {exponent} has a constant antiderivative integrand")]
    ZeroExponent { iterate: usize, exponent: i64 },
    #[error("potential has non-positive modes; only modes k ≥ 1 are allowed here")]
    NotGasymovClass,
    #[error("scaling index must be at least 3, got {0}")]
    ScaleTooSmall(u64),
    #[error("invalid Picard configuration: {0}")]
    BadConfig(&'static str),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PicardConfig {
    /// Number of iterates `J` summed after the seed.
    pub depth: usize,
    /// Exponents with `|ℓ| > harmonics` are dropped.
    pub harmonics: u32,
    /// Coefficients below this modulus are dropped.
    pub drop_tol: f64,
    /// The sum counts as converged when the last iterate's coefficient
    /// ℓ¹-norm is at most this.
    pub converge_tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            depth: 12,
            harmonics: 60,
            drop_tol: 1e-300,
            converge_tol: 1e-10,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<(), PicardError> {
        if self.depth == 0 {
            return Err(PicardError::BadConfig("depth must be at least 1"));
        }
        if self.harmonics == 0 {
            return Err(PicardError::BadConfig("harmonics must be at least 1"));
        }
        if !(self.drop_tol >= 0.0) {
            return Err(PicardError::BadConfig("drop tolerance must be nonnegative"));
        }
        if !(self.converge_tol >= 0.0) {
            return Err(PicardError::BadConfig("convergence tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// Finite series `Σ b_ℓ e^{iℓx}` with no exact-zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpSeries {
    terms: BTreeMap<i64, Complex64>,
}

impl ExpSeries {
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (l, b) in terms {
            *map.entry(l).or_insert(Complex64::new(0.0, 0.0)) += b;
        }
        map.retain(|_, b| *b != Complex64::new(0.0, 0.0));
        Self { terms: map }
    }

    /// `cos x = (e^{ix} + e^{-ix}) / 2`.
    pub fn cos() -> Self {
        Self::from_terms([(-1, Complex64::new(0.5, 0.0)), (1, Complex64::new(0.5, 0.0))])
    }

    /// `sin x = (e^{ix} - e^{-ix}) / 2i`.
    pub fn sin() -> Self {
        Self::from_terms([(-1, Complex64::new(0.0, 0.5)), (1, Complex64::new(0.0, -0.5))])
    }

    pub fn coeff(&self, l: i64) -> Complex64 {
        self.terms.get(&l).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.terms.iter().map(|(&l, &b)| (l, b))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&l, &b)| b * Complex64::cis(l as f64 * x))
            .sum()
    }

    /// Termwise derivative.
    pub fn deriv(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(&l, &b)| (l, b * Complex64::new(0.0, l as f64))),
        )
    }

    /// `Σ |b_ℓ|`, an upper bound for the sup-norm on the real line.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|b| b.norm()).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms().map(|(l, b)| (l, -b))))
    }

    /// Exact product with a potential (no truncation).
    pub fn mul_potential(&self, q: &FourierPotential) -> BTreeMap<i128, Complex64> {
        let mut prod = BTreeMap::new();
        for (k, a) in q.modes() {
            for (&l, &b) in &self.terms {
                *prod
                    .entry(k as i128 + l as i128)
                    .or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        prod.retain(|_, g| *g != Complex64::new(0.0, 0.0));
        prod
    }

    /// `∫₀^{2π} e^{ipt} S(t) dt = 2π b_{-p}`.
    pub fn moment(&self, p: i128) -> Complex64 {
        i64::try_from(-p)
            .map(|l| self.coeff(l) * TWO_PI)
            .unwrap_or_default()
    }
}

impl fmt::Display for ExpSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (l, b)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}: {b}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Seed {
    Cos,
    Sin,
}

impl Seed {
    pub fn series(self) -> ExpSeries {
        match self {
            Seed::Cos => ExpSeries::cos(),
            Seed::Sin => ExpSeries::sin(),
        }
    }
}

fn step_indexed(
    q: &FourierPotential,
    prev: &ExpSeries,
    cfg: &PicardConfig,
    iterate: usize,
) -> Result<ExpSeries, PicardError> {
    let limit = cfg.harmonics as i128;
    let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
    let mut add = |l: i128, b: Complex64| {
        if l.abs() <= limit {
            *out.entry(l as i64).or_insert(Complex64::new(0.0, 0.0)) += b;
        }
    };
    for (m, g) in prev.mul_potential(q) {
        if m == 1 || m == -1 {
            return Err(PicardError::ZeroExponent {
                iterate,
                exponent: m as i64,
            });
        }
        let mf = m as f64;
        add(m, -g / (mf * mf - 1.0));
        add(1, g / (2.0 * (mf - 1.0)));
        add(-1, -g / (2.0 * (mf + 1.0)));
    }
    out.retain(|_, b| *b != Complex64::new(0.0, 0.0) && b.norm() >= cfg.drop_tol);
    Ok(ExpSeries { terms: out })
}

/// One Picard iterate `u ↦ ∫₀ˣ sin(x - t) q(t) u(t) dt`, truncated per `cfg`.
pub fn picard_step(
    q: &FourierPotential,
    u_prev: &ExpSeries,
    cfg: &PicardConfig,
) -> Result<ExpSeries, PicardError> {
    cfg.validate()?;
    step_indexed(q, u_prev, cfg, 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterateSummary {
    pub index: usize,
    /// ℓ¹-norm of the coefficients; bounds the sup-norm over `[0, 2π]`.
    pub sup_bound: f64,
    pub min_exponent: Option<i64>,
    pub max_exponent: Option<i64>,
    pub terms: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardSum {
    pub seed: Seed,
    /// `u_0, …, u_J`.
    pub iterates: Vec<ExpSeries>,
    pub sum: ExpSeries,
}

impl PicardSum {
    pub fn last_norm(&self) -> f64 {
        self.iterates.last().map_or(0.0, ExpSeries::l1_norm)
    }

    pub fn converged(&self, cfg: &PicardConfig) -> bool {
        self.last_norm() <= cfg.converge_tol
    }

    pub fn summaries(&self) -> Vec<IterateSummary> {
        self.iterates
            .iter()
            .enumerate()
            .map(|(index, u)| IterateSummary {
                index,
                sup_bound: u.l1_norm(),
                min_exponent: u.min_exponent(),
                max_exponent: u.max_exponent(),
                terms: u.len(),
            })
            .collect()
    }
}

/// `Σ_{j=0}^{J} u_j` with `u_0` the cosine or sine seed.
pub fn picard_sum(
    q: &FourierPotential,
    seed: Seed,
    cfg: &PicardConfig,
) -> Result<PicardSum, PicardError> {
    cfg.validate()?;
    let mut iterates = vec![seed.series()];
    let mut sum = seed.series();
    for j in 1..=cfg.depth {
        let next = step_indexed(q, &iterates[j - 1], cfg, j)?;
        sum = sum.add(&next);
        let done = next.is_empty();
        iterates.push(next);
        if done {
            break;
        }
    }
    Ok(PicardSum {
        seed,
        iterates,
        sum,
    })
}

/// Closed-form residual of the Volterra equation for a truncated sum:
/// `S - seed - ∫₀ˣ sin(x - t) q(t) S(t) dt`, as a series.
pub fn volterra_residual(
    q: &FourierPotential,
    run: &PicardSum,
    cfg: &PicardConfig,
) -> Result<ExpSeries, PicardError> {
    let wide = PicardConfig {
        harmonics: u32::MAX,
        drop_tol: 0.0,
        ..*cfg
    };
    let image = step_indexed(q, &run.sum, &wide, run.iterates.len())?;
    Ok(run.sum.sub(&run.seed.series()).sub(&image))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardDiscriminant {
    pub delta: Complex64,
    /// `c(q_n; 1, 2π)`.
    pub c_end: Complex64,
    /// `s'(q_n; 1, 2π)`.
    pub sp_end: Complex64,
    pub cos_run: PicardSum,
    pub sin_run: PicardSum,
}

/// `Δ(q_n; 1)` for `q_n = n² V(n x)`, evaluated from the Picard series.
pub fn picard_discriminant(
    v: &FourierPotential,
    n: u64,
    cfg: &PicardConfig,
) -> Result<PicardDiscriminant, PicardError> {
    if !v.is_gasymov_class() {
        return Err(PicardError::NotGasymovClass);
    }
    if n < 3 {
        return Err(PicardError::ScaleTooSmall(n));
    }
    let q = v.scale(n)?;
    let cos_run = picard_sum(&q, Seed::Cos, cfg)?;
    let sin_run = picard_sum(&q, Seed::Sin, cfg)?;
    let c_end = cos_run.sum.eval(TWO_PI);
    let sp_end = sin_run.sum.deriv().eval(TWO_PI);
    Ok(PicardDiscriminant {
        delta: c_end + sp_end,
        c_end,
        sp_end,
        cos_run,
        sin_run,
    })
}

/// `∫₀^{2π} (e^{i(kn+1)t} - e^{i(kn-1)t}) u(t) dt`, termwise in closed form.
/// These are the pieces of `∫₀^{2π} sin(2π - t) q_n(t) c(t) dt`.
pub fn vanishing_integral_check(u: &ExpSeries, k: i64, n: i64) -> Complex64 {
    let kn = k as i128 * n as i128;
    u.moment(kn + 1) - u.moment(kn - 1)
}

/// `∫₀^{2π} (e^{i(kn+1)t} + e^{i(kn-1)t}) v(t) dt`, the pieces of
/// `∫₀^{2π} cos(2π - t) q_n(t) s(t) dt` that decide `s'(2π)`.
pub fn cosine_integral_check(v: &ExpSeries, k: i64, n: i64) -> Complex64 {
    let kn = k as i128 * n as i128;
    v.moment(kn + 1) + v.moment(kn - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralRecord {
    pub seed: Seed,
    pub j: usize,
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

impl IntegralRecord {
    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

/// Every vanishing integral for `j ≤ J` and `1 ≤ k ≤ k_max`, using the
/// iterates stored in `result`.
pub fn vanishing_integrals(
    result: &PicardDiscriminant,
    n: u64,
    k_max: i64,
) -> Vec<IntegralRecord> {
    let n = n as i64;
    let mut out = Vec::new();
    for (seed, run) in [(Seed::Cos, &result.cos_run), (Seed::Sin, &result.sin_run)] {
        for (j, u) in run.iterates.iter().enumerate() {
            for k in 1..=k_max {
                let value = match seed {
                    Seed::Cos => vanishing_integral_check(u, k, n),
                    Seed::Sin => cosine_integral_check(u, k, n),
                };
                out.push(IntegralRecord {
                    seed,
                    j,
                    k,
                    re: value.re,
                    im: value.im,
                });
            }
        }
    }
    out
}
