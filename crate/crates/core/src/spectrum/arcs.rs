//! Continuation of spectral arcs `{z : Im Δ(z) = 0, |Re Δ(z)| ≤ 2}`.
//!
//! Along a level curve of `Im Δ` the discriminant changes by a real amount,
//! so the tangent is `conj(Δ')/|Δ'|` and the normal is `i` times that. The
//! predictor steps along the tangent; the corrector is Newton on `Im Δ`
//! along the normal.

use num_complex::Complex64;
use serde::Serialize;

use super::{spectral_distance, SpectrumError};
use crate::monodromy::{discriminant_jet, DiscriminantJet};
use crate::ode::IntegratorConfig;
use crate::potential::FourierPotential;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundingBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl BoundingBox {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcConfig {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub shrink: f64,
    pub grow: f64,
    pub corrector_tol: f64,
    pub corrector_iters: usize,
    pub branch_threshold: f64,
    /// Spectral distance allowed for the seed and for accepted points.
    pub arc_tol: f64,
    /// `||Δ| - 2|` below which a critical point counts as a closed gap.
    pub tangency_tol: f64,
    pub max_steps: usize,
    pub bbox: BoundingBox,
}

impl Default for ArcConfig {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            max_step: 0.1,
            min_step: 1e-9,
            shrink: 0.5,
            grow: 1.3,
            corrector_tol: 1e-10,
            corrector_iters: 12,
            branch_threshold: 1e-8,
            arc_tol: 1e-8,
            tangency_tol: 1e-6,
            max_steps: 10_000,
            bbox: BoundingBox {
                re_min: -1.0,
                re_max: 10.0,
                im_min: -1.0,
                im_max: 1.0,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    BandEdge,
    MaxSteps,
    BoxExit,
    BranchPoint,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::BandEdge => "band-edge",
            Termination::MaxSteps => "max-steps",
            Termination::BoxExit => "box-exit",
            Termination::BranchPoint => "branch-point",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcPoint {
    pub z: Complex64,
    pub delta: Complex64,
}

/// Ordered points of one arc; `start` and `end` say why each end stopped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralArc {
    pub points: Vec<ArcPoint>,
    pub start: Termination,
    pub end: Termination,
}

struct Tracer<'a> {
    v: &'a FourierPotential,
    icfg: &'a IntegratorConfig,
    cfg: &'a ArcConfig,
}

fn unit(z: Complex64) -> Complex64 {
    z / z.norm()
}

impl Tracer<'_> {
    fn jet(&self, z: Complex64) -> Result<DiscriminantJet, SpectrumError> {
        Ok(discriminant_jet(self.v, z, self.icfg)?)
    }

    /// Newton on `Im Δ` along the local normal. `None` when it fails to
    /// converge or the derivative degenerates.
    fn correct(&self, mut z: Complex64) -> Result<Option<(Complex64, DiscriminantJet)>, SpectrumError> {
        for _ in 0..=self.cfg.corrector_iters {
            let jet = self.jet(z)?;
            if jet.delta.im.abs() <= self.cfg.corrector_tol {
                return Ok(Some((z, jet)));
            }
            let d = jet.derivative.norm();
            if d < self.cfg.branch_threshold {
                return Ok(None);
            }
            let normal = Complex64::i() * jet.derivative.conj() / d;
            z += normal * (-jet.delta.im / d);
        }
        Ok(None)
    }

    /// Second derivative of Δ by central differences of Δ'.
    fn second_derivative(&self, z: Complex64) -> Result<Complex64, SpectrumError> {
        let h = 1e-4;
        let fwd = self.jet(z + h)?.derivative;
        let bwd = self.jet(z - h)?.derivative;
        Ok((fwd - bwd) / (2.0 * h))
    }

    /// Directions of the level curve through a point where `Δ' = 0` and
    /// `Δ = σ = ±2`, chosen so that `|Re Δ|` decreases along them.
    fn tangency_directions(&self, z: Complex64, sigma: f64) -> Result<Option<Complex64>, SpectrumError> {
        let dd = self.second_derivative(z)?;
        if dd.norm() == 0.0 {
            return Ok(None);
        }
        // Δ ≈ σ + ½ Δ'' d² s²; want Δ'' d² real with sign opposite to σ.
        let d2 = -sigma.signum() * dd.conj() / dd.norm();
        Ok(Some(d2.sqrt()))
    }

    /// Newton for `Δ(z) = level` starting from `z`.
    fn locate_edge(&self, mut z: Complex64, level: f64) -> Result<(Complex64, DiscriminantJet), SpectrumError> {
        let mut jet = self.jet(z)?;
        for _ in 0..30 {
            let r = jet.delta - level;
            if r.norm() <= self.cfg.corrector_tol || jet.derivative.norm() == 0.0 {
                break;
            }
            let mut dz = -r / jet.derivative;
            if dz.norm() > self.cfg.max_step {
                dz *= self.cfg.max_step / dz.norm();
            }
            z += dz;
            jet = self.jet(z)?;
        }
        Ok((z, jet))
    }

    fn in_band(&self, jet: &DiscriminantJet) -> bool {
        spectral_distance(jet.delta) <= self.cfg.arc_tol
    }

    /// Traces from `start` in direction `dir` until a termination event.
    fn run(
        &self,
        start: Complex64,
        start_jet: DiscriminantJet,
        mut dir: Complex64,
    ) -> Result<(Vec<ArcPoint>, Termination), SpectrumError> {
        let cfg = self.cfg;
        let mut points = Vec::new();
        let (mut p, mut jet) = (start, start_jet);
        let mut h = cfg.initial_step;
        let mut steps = 0;

        while steps < cfg.max_steps {
            steps += 1;
            let dnorm = jet.derivative.norm();
            let tangent = if dnorm < cfg.branch_threshold {
                if (jet.delta.re.abs() - 2.0).abs() > cfg.tangency_tol {
                    return Ok((points, Termination::BranchPoint));
                }
                // Closed gap: the arc passes straight through.
                dir
            } else {
                let t = jet.derivative.conj() / dnorm;
                if (t * dir.conj()).re < 0.0 {
                    -t
                } else {
                    t
                }
            };

            let predicted = p + tangent * h;
            if !cfg.bbox.contains(predicted) {
                if h > cfg.initial_step {
                    h = (h * cfg.shrink).max(cfg.initial_step);
                    continue;
                }
                return Ok((points, Termination::BoxExit));
            }
            let corrected = self.correct(predicted)?;
            let Some((q, qjet)) = corrected.filter(|(q, _)| (*q - predicted).norm() <= h) else {
                h *= cfg.shrink;
                if h < cfg.min_step {
                    return Err(SpectrumError::CorrectorDivergence { z: p });
                }
                continue;
            };
            if !cfg.bbox.contains(q) {
                return Ok((points, Termination::BoxExit));
            }

            if self.in_band(&qjet) {
                dir = unit(q - p);
                points.push(ArcPoint { z: q, delta: qjet.delta });
                p = q;
                jet = qjet;
                h = (h * cfg.grow).min(cfg.max_step);
                continue;
            }

            // Left the band between p and q.
            let level = 2.0 * qjet.delta.re.signum();
            let travel = unit(q - p);
            let (e, ejet) = self.locate_edge(p, level)?;
            if self.is_closed_gap(e, &ejet)? {
                let dd = self.second_derivative(e)?;
                // Jump to the mirror image of e about the touching point.
                let centre = if dd.norm() > 0.0 { e - ejet.derivative / dd } else { e };
                let beyond = centre + (centre - e) + travel * cfg.min_step.max(1e-6);
                if let Some((r, rjet)) = self.correct(beyond)? {
                    if self.in_band(&rjet) && cfg.bbox.contains(r) {
                        points.push(ArcPoint { z: r, delta: rjet.delta });
                        dir = travel;
                        p = r;
                        jet = rjet;
                        continue;
                    }
                }
            }
            points.push(ArcPoint { z: e, delta: ejet.delta });
            return Ok((points, Termination::BandEdge));
        }
        Ok((points, Termination::MaxSteps))
    }

    /// A critical point of Δ within the tangency tolerance of ±2 near `e`.
    fn is_closed_gap(&self, e: Complex64, ejet: &DiscriminantJet) -> Result<bool, SpectrumError> {
        let dd = self.second_derivative(e)?;
        if dd.norm() == 0.0 {
            return Ok(false);
        }
        let excursion = ejet.derivative.norm_sqr() / (2.0 * dd.norm());
        Ok(excursion <= self.cfg.tangency_tol)
    }
}

/// Traces the spectral arc through `seed` in both directions.
pub fn trace_arc(
    v: &FourierPotential,
    seed: Complex64,
    cfg: &ArcConfig,
    icfg: &IntegratorConfig,
) -> Result<SpectralArc, SpectrumError> {
    if !(cfg.initial_step > 0.0 && cfg.max_step >= cfg.initial_step && cfg.min_step > 0.0) {
        return Err(SpectrumError::BadParameter("arc step sizes out of order".into()));
    }
    if !(cfg.shrink > 0.0 && cfg.shrink < 1.0 && cfg.grow >= 1.0) {
        return Err(SpectrumError::BadParameter("arc step factors out of range".into()));
    }
    let tracer = Tracer { v, icfg, cfg };
    let seed_jet = tracer.jet(seed)?;
    let distance = spectral_distance(seed_jet.delta);
    if distance > cfg.arc_tol {
        return Err(SpectrumError::SeedNotOnSpectrum { z: seed, distance });
    }
    let (z0, jet0) = match tracer.correct(seed)? {
        Some((z, j)) if tracer.in_band(&j) => (z, j),
        _ => (seed, seed_jet),
    };
    let origin = ArcPoint {
        z: z0,
        delta: jet0.delta,
    };

    let dnorm = jet0.derivative.norm();
    let dir = if dnorm >= cfg.branch_threshold {
        jet0.derivative.conj() / dnorm
    } else if (jet0.delta.re.abs() - 2.0).abs() <= cfg.tangency_tol {
        match tracer.tangency_directions(z0, jet0.delta.re)? {
            Some(d) => d,
            None => {
                return Ok(SpectralArc {
                    points: vec![origin],
                    start: Termination::BranchPoint,
                    end: Termination::BranchPoint,
                })
            }
        }
    } else {
        return Ok(SpectralArc {
            points: vec![origin],
            start: Termination::BranchPoint,
            end: Termination::BranchPoint,
        });
    };

    let (back, start) = tracer.run(z0, jet0, -dir)?;
    let (fwd, end) = tracer.run(z0, jet0, dir)?;
    let mut points: Vec<ArcPoint> = back.into_iter().rev().collect();
    points.push(origin);
    points.extend(fwd);
    Ok(SpectralArc { points, start, end })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_arc_is_positive_half_line() {
        let arc = trace_arc(
            &FourierPotential::zero(),
            Complex64::new(1.0, 0.0),
            &ArcConfig::default(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(arc.start, Termination::BandEdge);
        assert_eq!(arc.end, Termination::BoxExit);
        let first = arc.points.first().unwrap().z;
        assert!(first.norm() < 1e-8, "{first}");
        assert!(arc.points.last().unwrap().z.re > 9.5);
        for p in &arc.points {
            assert!(p.z.im.abs() < 1e-9, "{:?}", p);
        }
    }

    #[test]
    fn seed_off_spectrum_is_rejected() {
        let r = trace_arc(
            &FourierPotential::zero(),
            Complex64::new(-1.0, 0.0),
            &ArcConfig::default(),
            &IntegratorConfig::default(),
        );
        assert!(matches!(r, Err(SpectrumError::SeedNotOnSpectrum { .. })));
    }

    #[test]
    fn bad_step_factors_rejected() {
        let cfg = ArcConfig {
            shrink: 1.5,
            ..Default::default()
        };
        let r = trace_arc(
            &FourierPotential::zero(),
            Complex64::new(1.0, 0.0),
            &cfg,
            &IntegratorConfig::default(),
        );
        assert!(matches!(r, Err(SpectrumError::BadParameter(_))));
    }
}
