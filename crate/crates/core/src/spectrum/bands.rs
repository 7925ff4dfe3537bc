//! Band structure of real potentials on a real window.
//!
//! Edges are roots of `Δ ∓ 2` found by a uniform scan, bisection and a short
//! Newton polish. Extrema of `Δ` inside a scan cell are located from the sign
//! of `Δ'`, which exposes gaps narrower than the scan step and closed gaps
//! (double roots) that a sign test alone cannot see.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::SpectrumError;
use crate::monodromy::{discriminant, discriminant_jet};
use crate::ode::IntegratorConfig;
use crate::potential::FourierPotential;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandConfig {
    pub scan_step: f64,
    pub bracket_width: f64,
    pub newton_polish: usize,
    /// Extrema with `||Δ| - 2|` below this are treated as closed gaps.
    pub tangency_tol: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            scan_step: 0.01,
            bracket_width: 1e-12,
            newton_polish: 5,
            tangency_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    /// `Δ = +2`, a periodic eigenvalue.
    Plus,
    /// `Δ = -2`, an antiperiodic eigenvalue.
    Minus,
    /// Clipped by the scan window.
    Window,
}

impl EdgeKind {
    fn level(self) -> f64 {
        match self {
            EdgeKind::Plus => 2.0,
            EdgeKind::Minus => -2.0,
            EdgeKind::Window => f64::NAN,
        }
    }

    fn flipped(self) -> Self {
        match self {
            EdgeKind::Plus => EdgeKind::Minus,
            EdgeKind::Minus => EdgeKind::Plus,
            EdgeKind::Window => EdgeKind::Window,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EdgeKind::Plus => "+2",
            EdgeKind::Minus => "-2",
            EdgeKind::Window => "window",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandEdge {
    pub z: f64,
    pub kind: EdgeKind,
    /// `|Δ(z) - level|` after polishing.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandInterval {
    pub lo: f64,
    pub hi: f64,
    pub edge_lo: EdgeKind,
    pub edge_hi: EdgeKind,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BandStructure {
    pub bands: Vec<BandInterval>,
    pub edges: Vec<BandEdge>,
    /// Closed gaps: points where `|Δ|` touches 2 without leaving the band.
    pub tangencies: Vec<BandEdge>,
}

struct Scanner<'a> {
    v: &'a FourierPotential,
    icfg: &'a IntegratorConfig,
    bcfg: &'a BandConfig,
}

impl Scanner<'_> {
    fn delta(&self, z: f64) -> Result<f64, SpectrumError> {
        Ok(discriminant(self.v, Complex64::new(z, 0.0), self.icfg)?.re)
    }

    fn jet(&self, z: f64) -> Result<(f64, f64), SpectrumError> {
        let j = discriminant_jet(self.v, Complex64::new(z, 0.0), self.icfg)?;
        Ok((j.delta.re, j.derivative.re))
    }

    /// Bisection on `g` with `g(a)`, `g(b)` of opposite sign.
    fn bisect<F>(&self, mut a: f64, mut b: f64, mut ga: f64, g: F) -> Result<f64, SpectrumError>
    where
        F: Fn(f64) -> Result<f64, SpectrumError>,
    {
        while b - a > self.bcfg.bracket_width {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = g(m)?;
            if gm == 0.0 {
                return Ok(m);
            }
            if (gm < 0.0) == (ga < 0.0) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    fn edge(&self, a: f64, b: f64, ga: f64, kind: EdgeKind) -> Result<BandEdge, SpectrumError> {
        let level = kind.level();
        let mut z = self.bisect(a, b, ga, |z| Ok(self.delta(z)? - level))?;
        let (mut d, mut dp) = self.jet(z)?;
        let mut residual = (d - level).abs();
        for _ in 0..self.bcfg.newton_polish {
            if residual == 0.0 || dp == 0.0 {
                break;
            }
            let trial = z - (d - level) / dp;
            if !(a..=b).contains(&trial) {
                break;
            }
            let (td, tdp) = self.jet(trial)?;
            if (td - level).abs() >= residual {
                break;
            }
            z = trial;
            d = td;
            dp = tdp;
            residual = (d - level).abs();
        }
        Ok(BandEdge { z, kind, residual })
    }
}

fn validate(v: &FourierPotential, zmin: f64, zmax: f64, cfg: &BandConfig) -> Result<(), SpectrumError> {
    if !v.is_real() {
        return Err(SpectrumError::NotReal);
    }
    if !(zmin.is_finite() && zmax.is_finite() && zmin < zmax) {
        return Err(SpectrumError::BadWindow(format!("[{zmin}, {zmax}]")));
    }
    if !(cfg.scan_step > 0.0 && cfg.bracket_width > 0.0 && cfg.tangency_tol >= 0.0) {
        return Err(SpectrumError::BadParameter("band scan parameters must be positive".into()));
    }
    Ok(())
}

/// Maximal intervals of `{z ∈ [zmin, zmax] : |Δ(z)| ≤ 2}` for a real potential.
pub fn band_edges_real(
    v: &FourierPotential,
    zmin: f64,
    zmax: f64,
    bcfg: &BandConfig,
    icfg: &IntegratorConfig,
) -> Result<BandStructure, SpectrumError> {
    validate(v, zmin, zmax, bcfg)?;
    let scanner = Scanner { v, icfg, bcfg };

    let cells = ((zmax - zmin) / bcfg.scan_step).ceil().max(1.0) as usize;
    let zs: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { zmax } else { zmin + i as f64 * bcfg.scan_step })
        .collect();
    let samples: Vec<(f64, f64)> = zs
        .par_iter()
        .map(|&z| scanner.jet(z))
        .collect::<Result<_, _>>()?;

    let cell_results: Vec<(Vec<BandEdge>, Vec<BandEdge>)> = (0..cells)
        .into_par_iter()
        .map(|i| scan_cell(&scanner, zs[i], zs[i + 1], samples[i], samples[i + 1]))
        .collect::<Result<_, _>>()?;

    let mut edges = Vec::new();
    let mut tangencies = Vec::new();
    for (e, t) in cell_results {
        edges.extend(e);
        tangencies.extend(t);
    }
    edges.sort_by(|a, b| a.z.total_cmp(&b.z));

    let mut bands = assemble(zmin, zmax, samples[0].0, &edges);
    merge_touching(&scanner, &mut bands, &mut edges, &mut tangencies)?;
    check_edge_types(&bands, &tangencies)?;
    Ok(BandStructure {
        bands,
        edges,
        tangencies,
    })
}

fn scan_cell(
    s: &Scanner<'_>,
    za: f64,
    zb: f64,
    (da, dpa): (f64, f64),
    (db, dpb): (f64, f64),
) -> Result<(Vec<BandEdge>, Vec<BandEdge>), SpectrumError> {
    let mut edges = Vec::new();
    let mut tangencies = Vec::new();

    // An interior extremum splits the cell into two monotone pieces.
    let mut nodes = vec![(za, da), (zb, db)];
    let mut extremum = None;
    if dpa != 0.0 && dpb != 0.0 && (dpa < 0.0) != (dpb < 0.0) {
        let zs = s.bisect(za, zb, dpa, |z| Ok(s.jet(z)?.1))?;
        let ds = s.delta(zs)?;
        extremum = Some((zs, ds));
        nodes.insert(1, (zs, ds));
    }

    for kind in [EdgeKind::Plus, EdgeKind::Minus] {
        let level = kind.level();
        let net_crossing = ((da - level) < 0.0) != ((db - level) < 0.0);
        if let Some((zs, ds)) = extremum {
            if (ds - level).abs() <= s.bcfg.tangency_tol && !net_crossing {
                tangencies.push(BandEdge {
                    z: zs,
                    kind,
                    residual: (ds - level).abs(),
                });
                continue;
            }
        }
        for w in nodes.windows(2) {
            let (z0, d0) = w[0];
            let (z1, d1) = w[1];
            let g0 = d0 - level;
            let g1 = d1 - level;
            if g0 != 0.0 && (g1 == 0.0 || (g0 < 0.0) != (g1 < 0.0)) {
                edges.push(s.edge(z0, z1, g0, kind)?);
            }
        }
    }
    Ok((edges, tangencies))
}

fn assemble(zmin: f64, zmax: f64, delta_at_min: f64, edges: &[BandEdge]) -> Vec<BandInterval> {
    let mut bands = Vec::new();
    let mut open: Option<(f64, EdgeKind)> = if delta_at_min.abs() <= 2.0 {
        Some((zmin, EdgeKind::Window))
    } else {
        None
    };
    for e in edges {
        match open.take() {
            None => open = Some((e.z, e.kind)),
            Some((lo, edge_lo)) => bands.push(BandInterval {
                lo,
                hi: e.z,
                edge_lo,
                edge_hi: e.kind,
            }),
        }
    }
    if let Some((lo, edge_lo)) = open {
        bands.push(BandInterval {
            lo,
            hi: zmax,
            edge_lo,
            edge_hi: EdgeKind::Window,
        });
    }
    bands
}

/// Gaps whose excursion past ±2 stays within the tangency tolerance are
/// round-off around a closed gap; fold them into a single band.
fn merge_touching(
    s: &Scanner<'_>,
    bands: &mut Vec<BandInterval>,
    edges: &mut Vec<BandEdge>,
    tangencies: &mut Vec<BandEdge>,
) -> Result<(), SpectrumError> {
    let mut i = 0;
    while i + 1 < bands.len() {
        let (left, right) = (bands[i], bands[i + 1]);
        if left.edge_hi == right.edge_lo && left.edge_hi != EdgeKind::Window {
            let level = left.edge_hi.level();
            let mid = 0.5 * (left.hi + right.lo);
            let excursion = (s.delta(mid)? - level).abs();
            if excursion <= s.bcfg.tangency_tol {
                edges.retain(|e| e.z != left.hi && e.z != right.lo);
                tangencies.push(BandEdge {
                    z: mid,
                    kind: left.edge_hi,
                    residual: excursion,
                });
                bands[i].hi = right.hi;
                bands[i].edge_hi = right.edge_hi;
                bands.remove(i + 1);
                continue;
            }
        }
        i += 1;
    }
    tangencies.sort_by(|a, b| a.z.total_cmp(&b.z));
    Ok(())
}

fn check_edge_types(bands: &[BandInterval], tangencies: &[BandEdge]) -> Result<(), SpectrumError> {
    // Δ is monotone between consecutive touches of ±2 inside a band, so the
    // far edge type is fixed by the near one and the tangencies in between.
    for b in bands {
        if b.edge_lo == EdgeKind::Window || b.edge_hi == EdgeKind::Window {
            continue;
        }
        let flips = tangencies
            .iter()
            .filter(|t| t.z > b.lo && t.z < b.hi)
            .count();
        let mut expected = b.edge_lo.flipped();
        for _ in 0..flips {
            expected = expected.flipped();
        }
        if expected != b.edge_hi {
            return Err(SpectrumError::ScanTooCoarse { lo: b.lo, hi: b.hi });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(v: &FourierPotential, lo: f64, hi: f64) -> BandStructure {
        band_edges_real(v, lo, hi, &BandConfig::default(), &IntegratorConfig::default()).unwrap()
    }

    #[test]
    fn free_operator_half_line() {
        let s = run(&FourierPotential::zero(), -1.0, 5.0);
        assert_eq!(s.bands.len(), 1, "{s:?}");
        let b = s.bands[0];
        assert!(b.lo.abs() < 1e-10, "{b:?}");
        assert_eq!(b.edge_lo, EdgeKind::Plus);
        assert_eq!(b.hi, 5.0);
        assert_eq!(b.edge_hi, EdgeKind::Window);
        // closed gaps at 1/4, 1, 9/4, 4
        let mut t: Vec<f64> = s.tangencies.iter().map(|t| t.z).collect();
        t.sort_by(f64::total_cmp);
        assert_eq!(t.len(), 4, "{t:?}");
        for (got, want) in t.iter().zip([0.25, 1.0, 2.25, 4.0]) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn constant_shift_translates_bands() {
        let shifted = FourierPotential::from_real_modes([(0, 0.75)]);
        let s = run(&shifted, -1.0, 5.0);
        assert_eq!(s.bands.len(), 1);
        assert!((s.bands[0].lo - 0.75).abs() < 1e-10);
    }

    #[test]
    fn mathieu_has_gaps() {
        let s = run(&FourierPotential::mathieu(), -2.0, 6.0);
        assert!(s.bands.len() >= 3, "{s:?}");
        for w in s.bands.windows(2) {
            assert!(w[0].hi < w[1].lo);
        }
    }

    #[test]
    fn rejects_complex_potential() {
        let v = FourierPotential::from_real_modes([(1, 1.0)]);
        assert_eq!(
            band_edges_real(&v, 0.0, 1.0, &BandConfig::default(), &IntegratorConfig::default())
                .unwrap_err(),
            SpectrumError::NotReal
        );
        assert!(matches!(
            band_edges_real(
                &FourierPotential::zero(),
                1.0,
                0.0,
                &BandConfig::default(),
                &IntegratorConfig::default()
            ),
            Err(SpectrumError::BadWindow(_))
        ));
    }
}
