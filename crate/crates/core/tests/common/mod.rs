//! Independent oracles shared by the integration tests. Nothing here calls
//! into the integrator or the Picard recursion.

#![allow(dead_code)]

use hill_core::FourierPotential;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Eigenvalues of the truncated Hill matrix on modes `m = j + offset`,
/// `|j| ≤ k`: diagonal `m²` plus convolution by the Fourier coefficients of
/// `V`. `offset = 0` gives periodic, `offset = 0.5` antiperiodic
/// eigenvalues. Requires a real-valued potential with real coefficients.
pub fn hill_matrix_eigenvalues(v: &FourierPotential, k: i64, offset: f64) -> Vec<f64> {
    assert!(v.is_real());
    let n = (2 * k + 1) as usize;
    let m = DMatrix::from_fn(n, n, |r, c| {
        let (jr, jc) = (r as i64 - k, c as i64 - k);
        let a = v.coeff(jr - jc);
        assert!(a.im == 0.0, "oracle expects real coefficients");
        let diag = if r == c {
            let mm = jr as f64 + offset;
            mm * mm
        } else {
            0.0
        };
        diag + a.re
    });
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Periodic and antiperiodic eigenvalues inside `[lo, hi]`, sorted.
pub fn hill_band_edges(v: &FourierPotential, k: i64, lo: f64, hi: f64) -> Vec<(f64, bool)> {
    let mut edges: Vec<(f64, bool)> = hill_matrix_eigenvalues(v, k, 0.0)
        .into_iter()
        .map(|e| (e, true))
        .chain(
            hill_matrix_eigenvalues(v, k, 0.5)
                .into_iter()
                .map(|e| (e, false)),
        )
        .filter(|(e, _)| *e >= lo && *e <= hi)
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    edges
}

/// Composite Gauss–Legendre (5 nodes) quadrature of a complex integrand.
pub fn quad<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            total += f(mid + 0.5 * h * x) * w;
        }
    }
    total * (0.5 * h)
}

/// Uniform point in the disk of radius `r`.
pub fn in_disk<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    loop {
        let x: f64 = rng.gen_range(-1.0..=1.0);
        let y: f64 = rng.gen_range(-1.0..=1.0);
        if x * x + y * y <= 1.0 {
            return Complex64::new(r * x, r * y);
        }
    }
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
