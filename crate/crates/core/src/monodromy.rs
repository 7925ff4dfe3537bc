//! Monodromy matrix, Floquet discriminant and multipliers of
//! `-ψ'' + V ψ = z ψ` over one period `[0, 2π]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::ode::{self, IntegratorConfig, OdeError};
use crate::potential::FourierPotential;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("non-finite spectral parameter {0}")]
    NonFiniteZ(Complex64),
    #[error(transparent)]
    Integration(#[from] OdeError),
}

/// Values at `x = 2π` of the fundamental system `c, s` normalised by
/// `c(0) = s'(0) = 1`, `c'(0) = s(0) = 0`. Laid out as `[[c, s], [c', s']]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonodromyMatrix {
    pub c2pi: Complex64,
    pub s2pi: Complex64,
    pub cp2pi: Complex64,
    pub sp2pi: Complex64,
}

impl MonodromyMatrix {
    pub fn trace(&self) -> Complex64 {
        self.c2pi + self.sp2pi
    }

    pub fn determinant(&self) -> Complex64 {
        self.c2pi * self.sp2pi - self.s2pi * self.cp2pi
    }

    /// Magnitude of the products that cancel in the determinant; the
    /// attainable accuracy of `det = 1` is relative to this.
    pub fn determinant_scale(&self) -> f64 {
        ((self.c2pi * self.sp2pi).norm() + (self.s2pi * self.cp2pi).norm()).max(1.0)
    }

    pub fn as_rows(&self) -> [[Complex64; 2]; 2] {
        [[self.c2pi, self.s2pi], [self.cp2pi, self.sp2pi]]
    }
}

/// Discriminant together with its `z`-derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscriminantJet {
    pub delta: Complex64,
    pub derivative: Complex64,
}

/// The roots `ρ, 1/ρ` of `ρ² - Δρ + 1 = 0`, larger modulus first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierPair {
    pub rho_plus: Complex64,
    pub rho_minus: Complex64,
}

impl MultiplierPair {
    pub fn product(&self) -> Complex64 {
        self.rho_plus * self.rho_minus
    }

    pub fn sum(&self) -> Complex64 {
        self.rho_plus + self.rho_minus
    }
}

/// Flattened mode table for fast repeated evaluation inside the integrator.
struct ModeTable(Vec<(f64, Complex64)>);

impl ModeTable {
    fn new(v: &FourierPotential) -> Self {
        Self(v.modes().map(|(k, a)| (k as f64, a)).collect())
    }

    #[inline]
    fn eval(&self, x: f64) -> Complex64 {
        self.0
            .iter()
            .map(|&(k, a)| a * Complex64::cis(k * x))
            .sum()
    }
}

fn check_z(z: Complex64) -> Result<(), MonodromyError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(MonodromyError::NonFiniteZ(z))
    }
}

pub fn integrate_monodromy(
    v: &FourierPotential,
    z: Complex64,
    cfg: &IntegratorConfig,
) -> Result<MonodromyMatrix, MonodromyError> {
    check_z(z)?;
    let table = ModeTable::new(v);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (y, _) = ode::integrate(
        |x, y: &[Complex64; 4]| {
            let w = table.eval(x) - z;
            [y[1], w * y[0], y[3], w * y[2]]
        },
        0.0,
        TWO_PI,
        [one, zero, zero, one],
        cfg,
    )?;
    Ok(MonodromyMatrix {
        c2pi: y[0],
        cp2pi: y[1],
        s2pi: y[2],
        sp2pi: y[3],
    })
}

/// `Δ(V; z) = c(2π) + s'(2π)`.
pub fn discriminant(
    v: &FourierPotential,
    z: Complex64,
    cfg: &IntegratorConfig,
) -> Result<Complex64, MonodromyError> {
    integrate_monodromy(v, z, cfg).map(|m| m.trace())
}

/// `Δ` and `dΔ/dz`, the latter from the variational equations
/// `(∂_z y)'' = (V - z) ∂_z y - y` integrated alongside the fundamental system.
pub fn discriminant_jet(
    v: &FourierPotential,
    z: Complex64,
    cfg: &IntegratorConfig,
) -> Result<DiscriminantJet, MonodromyError> {
    check_z(z)?;
    let table = ModeTable::new(v);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (y, _) = ode::integrate(
        |x, y: &[Complex64; 8]| {
            let w = table.eval(x) - z;
            [
                y[1],
                w * y[0],
                y[3],
                w * y[2],
                y[5],
                w * y[4] - y[0],
                y[7],
                w * y[6] - y[2],
            ]
        },
        0.0,
        TWO_PI,
        [one, zero, zero, one, zero, zero, zero, zero],
        cfg,
    )?;
    Ok(DiscriminantJet {
        delta: y[0] + y[3],
        derivative: y[4] + y[7],
    })
}

pub fn discriminant_derivative(
    v: &FourierPotential,
    z: Complex64,
    cfg: &IntegratorConfig,
) -> Result<Complex64, MonodromyError> {
    discriminant_jet(v, z, cfg).map(|j| j.derivative)
}

/// Free discriminant `Δ(0; z) = 2 cos(2π √z)`. Cosine is even, so the
/// branch of the square root does not matter.
pub fn reference_discriminant(z: Complex64) -> Complex64 {
    (z.sqrt() * TWO_PI).cos() * 2.0
}

/// Floquet multipliers for a given discriminant. The larger root is formed
/// without cancellation and the smaller one as its reciprocal.
pub fn multipliers(delta: Complex64) -> MultiplierPair {
    let disc = (delta * delta - 4.0).sqrt();
    let a = (delta + disc) * 0.5;
    let b = (delta - disc) * 0.5;
    let big = if a.norm() >= b.norm() { a } else { b };
    let small = big.inv();
    let (bn, sn) = (big.norm(), small.norm());
    if (bn - sn).abs() <= 1e-12 * bn.max(1.0) && small.arg() > big.arg() {
        MultiplierPair {
            rho_plus: small,
            rho_minus: big,
        }
    } else {
        MultiplierPair {
            rho_plus: big,
            rho_minus: small,
        }
    }
}
