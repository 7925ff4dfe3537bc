//! Spectral decisions built on the discriminant.
//!
//! A point `z` lies in the spectrum iff `Δ(V; z)` is real with `|Δ| ≤ 2`,
//! equivalently iff the Floquet multipliers sit on the unit circle.

mod arcs;
mod bands;

pub use arcs::{trace_arc, ArcConfig, ArcPoint, BoundingBox, SpectralArc, Termination};
pub use bands::{band_edges_real, BandConfig, BandEdge, BandInterval, BandStructure, EdgeKind};

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::monodromy::{
    discriminant, discriminant_jet, multipliers, reference_discriminant, MonodromyError,
};
use crate::ode::IntegratorConfig;
use crate::potential::{FourierPotential, PotentialError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Monodromy(#[from] MonodromyError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("potential has non-positive modes; only modes k ≥ 1 are allowed here")]
    NotGasymovClass,
    #[error("potential is not real-valued")]
    NotReal,
    #[error("invalid window: {0}")]
    BadWindow(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("seed {z} is not on the spectrum (distance {distance:e})")]
    SeedNotOnSpectrum { z: Complex64, distance: f64 },
    #[error("arc corrector diverged near {z}")]
    CorrectorDivergence { z: Complex64 },
    #[error("scan step too coarse: band [{lo}, {hi}] has inconsistent edge types")]
    ScanTooCoarse { lo: f64, hi: f64 },
}

/// `max(|Im Δ|, max(0, |Re Δ| - 2))`: zero exactly on the spectrum.
pub fn spectral_distance(delta: Complex64) -> f64 {
    delta.im.abs().max((delta.re.abs() - 2.0).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub in_spectrum: bool,
    pub delta: Complex64,
    pub distance: f64,
}

impl MembershipVerdict {
    pub fn from_delta(delta: Complex64, tol: f64) -> Self {
        let distance = spectral_distance(delta);
        Self {
            in_spectrum: distance <= tol,
            delta,
            distance,
        }
    }
}

pub fn membership(
    v: &FourierPotential,
    z: Complex64,
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<MembershipVerdict, SpectrumError> {
    if !(tol > 0.0) {
        return Err(SpectrumError::BadParameter("tolerance must be positive".into()));
    }
    Ok(MembershipVerdict::from_delta(discriminant(v, z, cfg)?, tol))
}

/// Multiplier form of the membership test: `| |ρ| - 1 | ≤ tol`.
///
/// With `Δ = 2 cos θ`, `|ρ| = e^{|Im θ|}`. A discriminant at distance `d`
/// from `[-2, 2]` has `|Im θ| = O(d)` away from band edges and `O(√d)` next
/// to them, so a verdict at tolerance `tol` on `Δ` corresponds to
/// [`multiplier_tolerance`]`(tol)` here.
pub fn on_unit_circle(delta: Complex64, tol: f64) -> bool {
    (multipliers(delta).rho_plus.norm() - 1.0).abs() <= tol
}

/// `2 √tol`: the multiplier-side tolerance matching a discriminant-side one.
pub fn multiplier_tolerance(tol: f64) -> f64 {
    2.0 * tol.sqrt()
}

/// Rectangular grid `re_min + i·step`, `im_min + j·step`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), SpectrumError> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max, self.step]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.step > 0.0) {
            return Err(SpectrumError::BadWindow("grid step must be positive".into()));
        }
        if self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(SpectrumError::BadWindow("grid bounds out of order".into()));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }

    /// Points ordered by real part, then imaginary part.
    pub fn points(&self) -> Vec<Complex64> {
        let re = Self::axis(self.re_min, self.re_max, self.step);
        let im = Self::axis(self.im_min, self.im_max, self.step);
        re.iter()
            .flat_map(|&x| im.iter().map(move |&y| Complex64::new(x, y)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub z: Complex64,
    pub delta: Complex64,
    /// Spectral distance for plain grids, deviation from `2cos(2π√z)` for
    /// identity checks.
    pub dist: f64,
}

/// Discriminant and spectral distance at every grid point.
pub fn grid_scan(
    v: &FourierPotential,
    grid: &GridSpec,
    cfg: &IntegratorConfig,
) -> Result<Vec<GridRow>, SpectrumError> {
    grid.validate()?;
    grid.points()
        .into_par_iter()
        .map(|z| {
            let delta = discriminant(v, z, cfg)?;
            Ok(GridRow {
                z,
                delta,
                dist: spectral_distance(delta),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GasymovReport {
    pub rows: Vec<GridRow>,
    pub max_deviation: f64,
    pub worst_z: Option<Complex64>,
    pub tol: f64,
    pub pass: bool,
}

/// Checks `Δ(V; z) = 2 cos(2π√z)` on a grid for a positive-mode potential.
pub fn verify_gasymov(
    v: &FourierPotential,
    grid: &GridSpec,
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<GasymovReport, SpectrumError> {
    if !v.is_gasymov_class() {
        return Err(SpectrumError::NotGasymovClass);
    }
    if !(tol > 0.0) {
        return Err(SpectrumError::BadParameter("tolerance must be positive".into()));
    }
    grid.validate()?;
    let rows: Vec<GridRow> = grid
        .points()
        .into_par_iter()
        .map(|z| {
            let delta = discriminant(v, z, cfg)?;
            Ok(GridRow {
                z,
                delta,
                dist: (delta - reference_discriminant(z)).norm(),
            })
        })
        .collect::<Result<_, SpectrumError>>()?;
    let worst = rows
        .iter()
        .max_by(|a, b| a.dist.total_cmp(&b.dist))
        .copied();
    let max_deviation = worst.map_or(0.0, |r| r.dist);
    Ok(GasymovReport {
        max_deviation,
        worst_z: worst.map(|r| r.z),
        pass: max_deviation <= tol,
        rows,
        tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomotopyRow {
    pub eps: f64,
    pub delta: Complex64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyReport {
    pub n: u64,
    pub target: f64,
    pub rows: Vec<HomotopyRow>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Evaluates `Δ(εV; 1/n²)` on a uniform grid of `ε ∈ [0, 1]` and compares
/// with the free value `2 cos(2π/n)`.
pub fn homotopy_scan(
    v: &FourierPotential,
    n: u64,
    steps: usize,
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<HomotopyReport, SpectrumError> {
    if !v.is_gasymov_class() {
        return Err(SpectrumError::NotGasymovClass);
    }
    if n < 3 {
        return Err(SpectrumError::BadParameter(format!("n must be at least 3, got {n}")));
    }
    if steps < 2 {
        return Err(SpectrumError::BadParameter("need at least 2 homotopy steps".into()));
    }
    let z = Complex64::new(1.0 / (n as f64 * n as f64), 0.0);
    let target = 2.0 * (2.0 * PI / n as f64).cos();
    let rows: Vec<HomotopyRow> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let eps = i as f64 / (steps - 1) as f64;
            let delta = discriminant(&v.homotopy_member(eps)?, z, cfg)?;
            Ok(HomotopyRow {
                eps,
                delta,
                deviation: (delta - target).norm(),
            })
        })
        .collect::<Result<_, SpectrumError>>()?;
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(HomotopyReport {
        n,
        target,
        rows,
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenOutcome {
    pub seed: f64,
    pub z: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const NEWTON_MAX_ITER: usize = 60;
const NEWTON_MAX_STEP: f64 = 0.5;

/// Roots of `Δ(V; z) = 2` by damped Newton from the seeds `z = n²`,
/// `n = 0..count`. The seeds are exact for positive-mode potentials and a
/// heuristic otherwise; each seed reports its own outcome.
pub fn periodic_eigenvalues(
    v: &FourierPotential,
    count: usize,
    root_tol: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<EigenOutcome>, SpectrumError> {
    if count == 0 {
        return Err(SpectrumError::BadParameter("count must be at least 1".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|n| newton_periodic(v, (n * n) as f64, root_tol, cfg))
        .collect()
}

fn newton_periodic(
    v: &FourierPotential,
    seed: f64,
    root_tol: f64,
    cfg: &IntegratorConfig,
) -> Result<EigenOutcome, SpectrumError> {
    let mut z = Complex64::new(seed, 0.0);
    let mut jet = discriminant_jet(v, z, cfg)?;
    let mut residual = (jet.delta - 2.0).norm();
    let mut polish = 0;
    for it in 0..NEWTON_MAX_ITER {
        if residual <= root_tol {
            // A few extra steps tighten simple roots; stop once they stop helping.
            polish += 1;
            if polish > 3 || jet.derivative.norm() < 1e-8 {
                return Ok(EigenOutcome {
                    seed,
                    z,
                    residual,
                    iterations: it,
                    converged: true,
                });
            }
        }
        if jet.derivative.norm() == 0.0 {
            break;
        }
        let mut dz = -(jet.delta - 2.0) / jet.derivative;
        if dz.norm() > NEWTON_MAX_STEP {
            dz *= NEWTON_MAX_STEP / dz.norm();
        }
        let trial = z + dz;
        let trial_jet = discriminant_jet(v, trial, cfg)?;
        let trial_residual = (trial_jet.delta - 2.0).norm();
        if residual <= root_tol && trial_residual >= residual {
            break;
        }
        z = trial;
        jet = trial_jet;
        residual = trial_residual;
    }
    Ok(EigenOutcome {
        seed,
        z,
        residual,
        iterations: NEWTON_MAX_ITER,
        converged: residual <= root_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    fn one() -> FourierPotential {
        FourierPotential::from_real_modes([(1, 1.0)])
    }

    #[test]
    fn membership_examples() {
        let v = membership(&one(), c(4.0, 0.0), 1e-8, &cfg()).unwrap();
        assert!(v.in_spectrum, "{v:?}");
        let free = FourierPotential::zero();
        let v = membership(&free, c(-1.0, 0.0), 1e-8, &cfg()).unwrap();
        assert!(!v.in_spectrum);
        assert!((v.delta.re - 535.493_522_967_496_4).abs() < 1e-8);
        let v = membership(&free, c(0.0, 1.0), 1e-8, &cfg()).unwrap();
        assert!(!v.in_spectrum);
        assert!(v.delta.im.abs() > 1.0);
        assert!(membership(&free, c(0.0, 1.0), 0.0, &cfg()).is_err());
    }

    #[test]
    fn distance_definition() {
        assert_eq!(spectral_distance(c(1.5, 0.0)), 0.0);
        assert_eq!(spectral_distance(c(-2.5, 0.1)), 0.5);
        assert_eq!(spectral_distance(c(0.0, -0.3)), 0.3);
    }

    #[test]
    fn grid_points_inclusive() {
        let g = GridSpec {
            re_min: -2.0,
            re_max: 9.0,
            im_min: -2.0,
            im_max: 2.0,
            step: 0.5,
        };
        let p = g.points();
        assert_eq!(p.len(), 23 * 9);
        assert_eq!(p[0], c(-2.0, -2.0));
        assert_eq!(*p.last().unwrap(), c(9.0, 2.0));
        let bad = GridSpec { step: 0.0, ..g };
        assert!(bad.validate().is_err());
        let bad = GridSpec { re_min: 10.0, ..g };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn verify_rejects_non_gasymov() {
        let g = GridSpec {
            re_min: 0.0,
            re_max: 1.0,
            im_min: 0.0,
            im_max: 0.0,
            step: 0.5,
        };
        assert_eq!(
            verify_gasymov(&FourierPotential::mathieu(), &g, 1e-7, &cfg()).unwrap_err(),
            SpectrumError::NotGasymovClass
        );
    }

    #[test]
    fn homotopy_examples() {
        let r = homotopy_scan(&one(), 3, 11, 1e-8, &cfg()).unwrap();
        assert!(r.pass, "{}", r.max_deviation);
        assert_eq!(r.rows.len(), 11);
        assert!((r.target + 1.0).abs() < 1e-15);
        let r = homotopy_scan(&one(), 4, 11, 1e-8, &cfg()).unwrap();
        assert!(r.pass, "{}", r.max_deviation);
        let r = homotopy_scan(&FourierPotential::zero(), 5, 3, 1e-8, &cfg()).unwrap();
        assert!(r.pass);
        assert!(homotopy_scan(&one(), 3, 1, 1e-8, &cfg()).is_err());
        assert!(homotopy_scan(&one(), 2, 5, 1e-8, &cfg()).is_err());
    }

    #[test]
    fn periodic_eigenvalues_free_and_gasymov() {
        for v in [FourierPotential::zero(), one()] {
            let eig = periodic_eigenvalues(&v, 4, 1e-9, &cfg()).unwrap();
            for (n, e) in eig.iter().enumerate() {
                assert!(e.converged, "{e:?}");
                assert!((e.z - (n * n) as f64).norm() < 1e-8, "{e:?}");
                assert!(e.residual <= 1e-9);
            }
        }
    }

    #[test]
    fn unit_circle_agrees_with_distance() {
        let tol = 1e-8;
        for d in [c(1.2, 0.0), c(-2.0, 0.0), c(0.3, 1e-12)] {
            assert!(MembershipVerdict::from_delta(d, tol).in_spectrum);
            assert!(on_unit_circle(d, multiplier_tolerance(tol)));
        }
        for d in [c(2.1, 0.0), c(0.0, 0.5), c(-5.0, 1.0)] {
            assert!(!MembershipVerdict::from_delta(d, tol).in_spectrum);
            assert!(!on_unit_circle(d, multiplier_tolerance(tol)));
        }
    }
}
