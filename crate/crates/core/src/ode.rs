//! Dormand–Prince 5(4) integrator for fixed-size complex linear systems.
//!
//! Step acceptance uses the usual mixed error norm
//! `sqrt(mean((|err_i| / (atol + rtol max(|y_i|, |y_new_i|)))²))`
//! with PI step-size control. The solution is accumulated with compensated
//! summation so that round-off does not dominate at tight tolerances.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("exceeded {max_steps} steps at x = {x}")]
    TooManySteps { max_steps: usize, x: f64 },
    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid integrator configuration: {0}")]
    BadConfig(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-14,
            atol: 1e-14,
            initial_step: 2.0 * std::f64::consts::PI / 256.0,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(OdeError::BadConfig("rtol must be positive"));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(OdeError::BadConfig("atol must be positive"));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(OdeError::BadConfig("initial step must be positive"));
        }
        if self.max_steps == 0 {
            return Err(OdeError::BadConfig("max steps must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

#[inline]
fn combine<const N: usize>(
    y: &[Complex64; N],
    h: f64,
    terms: &[(f64, &[Complex64; N])],
) -> [Complex64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        *o += acc * h;
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x1 > x0`, returning `y(x1)`.
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    x1: f64,
    y0: [Complex64; N],
    cfg: &IntegratorConfig,
) -> Result<([Complex64; N], IntegrationStats), OdeError>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    cfg.validate()?;
    let mut stats = IntegrationStats::default();
    let mut x = x0;
    let mut y = y0;
    let mut comp = [Complex64::new(0.0, 0.0); N];
    let mut h = cfg.initial_step.min(x1 - x0);
    let mut err_prev: f64 = 1e-4;
    let mut k1 = f(x, &y);

    while x < x1 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(OdeError::TooManySteps {
                max_steps: cfg.max_steps,
                x,
            });
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        if h <= f64::EPSILON * x.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { x });
        }

        let k2 = f(x + C2 * h, &combine(&y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            x + C4 * h,
            &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            x + C5 * h,
            &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &combine(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let mut incr = [Complex64::new(0.0, 0.0); N];
        for (i, d) in incr.iter_mut().enumerate() {
            *d = (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        let mut y_new = y;
        for i in 0..N {
            y_new[i] += incr[i];
        }
        let k7 = f(x + h, &y_new);

        let mut sum = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * h;
            let scale = cfg.atol + cfg.rtol * y[i].norm().max(y_new[i].norm());
            sum += (e.norm() / scale).powi(2);
        }
        let err = (sum / N as f64).sqrt();
        if !err.is_finite() {
            return Err(OdeError::NonFinite { x });
        }

        if err <= 1.0 {
            // Kahan update of y += incr.
            for i in 0..N {
                let t = incr[i] - comp[i];
                let s = y[i] + t;
                comp[i] = (s - y[i]) - t;
                y[i] = s;
            }
            x = if last { x1 } else { x + h };
            k1 = f(x, &y);
            stats.accepted += 1;
            let fac = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            err_prev = err.max(1e-4);
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
        }
        if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(OdeError::NonFinite { x });
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let lambda = Complex64::new(0.3, 2.0);
        let (y, stats) = integrate(
            |_, y: &[Complex64; 1]| [lambda * y[0]],
            0.0,
            3.0,
            [Complex64::new(1.0, 0.0)],
            &IntegratorConfig::default(),
        )
        .unwrap();
        let exact = (lambda * 3.0).exp();
        assert!((y[0] - exact).norm() < 1e-11 * exact.norm());
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let (y, _) = integrate(
            |_, y: &[Complex64; 2]| [y[1], -y[0]],
            0.0,
            2.0 * std::f64::consts::PI,
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!((y[0] - 1.0).norm() < 1e-11);
        assert!(y[1].norm() < 1e-11);
    }

    #[test]
    fn step_budget_exhausted() {
        let cfg = IntegratorConfig {
            max_steps: 3,
            ..Default::default()
        };
        let r = integrate(
            |_, y: &[Complex64; 1]| [y[0] * 50.0],
            0.0,
            10.0,
            [Complex64::new(1.0, 0.0)],
            &cfg,
        );
        assert!(matches!(r, Err(OdeError::TooManySteps { max_steps: 3, .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn blow_up_reports_location() {
        // y' = y^2 has a pole at x = 1.
        let r = integrate(
            |_, y: &[Complex64; 1]| [y[0] * y[0]],
            0.0,
            2.0,
            [Complex64::new(1.0, 0.0)],
            &IntegratorConfig::default(),
        );
        match r {
            Err(OdeError::StepUnderflow { x }) | Err(OdeError::NonFinite { x }) => {
                assert!(x > 0.9 && x <= 1.0 + 1e-6, "x = {x}")
            }
            Err(OdeError::TooManySteps { x, .. }) => assert!(x > 0.9 && x < 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
