//! Closed-form fundamental solution of the lossy coupled-mode equations in the
//! comoving frame,
//!
//! ```text
//! d/dy [psi_p]   [-kappa_p   -Omega ] [psi_p]
//!      [psi_i] = [ Omega*   -kappa_i] [psi_i],     Omega = omega0 e^{i phi_s}
//! ```
//!
//! whose fundamental matrix is `[[f1p, -f2], [f2*, f1i]]`. Writing the
//! generator as `-kappa_s I + B` with `B^2 = -theta^2 I`, the exponential is a
//! rotation (`theta^2 > 0`), a boost (`theta^2 < 0`) or a shear
//! (`theta^2 = 0`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{effective_kappas, EffectiveRates, NoiseModel, PhysicalConfig};
use crate::error::{Error, Result};

/// Relative width of the band around `theta^2 = 0` treated as degenerate.
pub const REGIME_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// |Omega| > |kappa_D|: oscillating exchange between the bands.
    Trig,
    /// |Omega| = |kappa_D| within tolerance.
    Degenerate,
    /// |kappa_D| > |Omega|: overdamped exchange.
    Hyper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    /// Signed `omega0^2 - kappa_D^2`.
    pub theta_sq: f64,
    pub regime: Regime,
}

pub fn compute_theta(omega0: f64, kappa_d: f64) -> Theta {
    compute_theta_with_tolerance(omega0, kappa_d, REGIME_REL_TOL)
}

pub fn compute_theta_with_tolerance(omega0: f64, kappa_d: f64, rel_tol: f64) -> Theta {
    let kd = kappa_d.abs();
    // factored form keeps precision near the degenerate point
    let theta_sq = (omega0 - kd) * (omega0 + kd);
    let eps = rel_tol * omega0.max(kd);
    let eps_sq = eps * eps;
    let regime = if theta_sq > eps_sq {
        Regime::Trig
    } else if theta_sq < -eps_sq {
        Regime::Hyper
    } else {
        Regime::Degenerate
    };
    Theta { theta_sq, regime }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorCoefficients {
    pub f1p: Complex64,
    pub f1i: Complex64,
    pub f2: Complex64,
    pub theta_sq: f64,
    pub regime: Regime,
    pub kappa_s: f64,
    pub kappa_d: f64,
    pub tau: f64,
}

impl PropagatorCoefficients {
    /// `f1p f1i + |f2|^2`, equal to `exp(-2 kappa_s tau)`.
    pub fn determinant(&self) -> Complex64 {
        self.f1p * self.f1i + self.f2.norm_sqr()
    }

    /// Fundamental matrix `[[f1p, -f2], [f2*, f1i]]`, row major.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.f1p, -self.f2], [self.f2.conj(), self.f1i]]
    }
}

/// Coefficients `(f1p, f1i, f2)` after a delay `tau` in the comoving frame.
pub fn propagator_coeffs(
    omega0: f64,
    phi_s: f64,
    kappa_p: f64,
    kappa_i: f64,
    tau: f64,
) -> Result<PropagatorCoefficients> {
    Propagator::new(
        omega0,
        phi_s,
        EffectiveRates::from_band_rates(kappa_p, kappa_i),
    )
    .coefficients(tau)
}

/// `|f2|^2`, the probability that a p photon leaves in the i band.
pub fn conversion_probability(coeffs: &PropagatorCoefficients) -> f64 {
    let p = coeffs.f2.norm_sqr();
    if p > 1.0 {
        log::warn!(
            "conversion probability {p} exceeds unity at tau = {:e} s (net gain)",
            coeffs.tau
        );
    }
    p
}

/// Delay maximizing `|f2|^2`, i.e. the first root of
/// `theta tau = atan(theta / kappa_s)` in `(0, pi / theta)`.
pub fn optimal_tau(omega0: f64, kappa_s: f64, kappa_d: f64) -> Result<f64> {
    let th = compute_theta(omega0, kappa_d);
    if th.regime != Regime::Trig {
        return Err(Error::NoInteriorOptimum {
            theta_sq: th.theta_sq,
        });
    }
    let theta = th.theta_sq.sqrt();
    Ok(theta.atan2(kappa_s) / theta)
}

/// Pump coupling and net band rates bundled for repeated evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagator {
    pub omega0: f64,
    pub phi_s: f64,
    pub rates: EffectiveRates,
    pub regime_tol: f64,
}

impl Propagator {
    pub fn new(omega0: f64, phi_s: f64, rates: EffectiveRates) -> Self {
        Self {
            omega0,
            phi_s,
            rates,
            regime_tol: REGIME_REL_TOL,
        }
    }

    pub fn from_config(cfg: &PhysicalConfig, noise: &NoiseModel) -> Self {
        Self::new(cfg.coupling_omega0, cfg.pump_phase, effective_kappas(noise))
    }

    pub fn with_regime_tolerance(mut self, rel_tol: f64) -> Self {
        self.regime_tol = rel_tol;
        self
    }

    pub fn theta(&self) -> Theta {
        compute_theta_with_tolerance(self.omega0, self.rates.kappa_d, self.regime_tol)
    }

    pub fn coefficients(&self, tau: f64) -> Result<PropagatorCoefficients> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::Domain(format!(
                "delay must be non-negative, got {tau}"
            )));
        }
        let EffectiveRates {
            kappa_s, kappa_d, ..
        } = self.rates;
        let th = self.theta();
        // even part C(y) and odd part S(y) of exp(B y) = C I + S B
        let (c, s) = match th.regime {
            Regime::Trig => {
                let theta = th.theta_sq.sqrt();
                ((theta * tau).cos(), (theta * tau).sin() / theta)
            }
            Regime::Hyper => {
                let theta = (-th.theta_sq).sqrt();
                ((theta * tau).cosh(), (theta * tau).sinh() / theta)
            }
            Regime::Degenerate => (1.0, tau),
        };
        let damp = (-kappa_s * tau).exp();
        let omega = Complex64::from_polar(self.omega0, self.phi_s);
        Ok(PropagatorCoefficients {
            f1p: Complex64::new(damp * (c - kappa_d * s), 0.0),
            f1i: Complex64::new(damp * (c + kappa_d * s), 0.0),
            f2: omega * (damp * s),
            theta_sq: th.theta_sq,
            regime: th.regime,
            kappa_s,
            kappa_d,
            tau,
        })
    }

    pub fn conversion_probability(&self, tau: f64) -> Result<f64> {
        Ok(conversion_probability(&self.coefficients(tau)?))
    }

    pub fn optimal_tau(&self) -> Result<f64> {
        optimal_tau(self.omega0, self.rates.kappa_s, self.rates.kappa_d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn theta_regimes() {
        let t = compute_theta(1.0, 0.0);
        assert_eq!((t.theta_sq, t.regime), (1.0, Regime::Trig));
        assert_eq!(compute_theta(0.03, 0.03).regime, Regime::Degenerate);
        let t = compute_theta(1.0, 2.0);
        assert_eq!((t.theta_sq, t.regime), (-3.0, Regime::Hyper));
        assert_eq!(compute_theta(1.0, -2.0).regime, Regime::Hyper);
        assert_eq!(compute_theta(0.0, 0.0).regime, Regime::Degenerate);
    }

    #[test]
    fn identity_at_zero_delay() {
        for (k_p, k_i) in [(0.0, 0.0), (0.3, -0.1), (3.0, 0.0), (1.0, -1.0)] {
            let c = propagator_coeffs(1.0, 0.4, k_p, k_i, 0.0).unwrap();
            assert_eq!(c.f1p, Complex64::new(1.0, 0.0));
            assert_eq!(c.f1i, Complex64::new(1.0, 0.0));
            assert_eq!(c.f2, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn lossless_quarter_period_converts_fully() {
        let c = propagator_coeffs(1.0, 0.0, 0.0, 0.0, PI / 2.0).unwrap();
        assert!(c.f1p.norm() < 1e-15);
        assert!(c.f1i.norm() < 1e-15);
        assert_relative_eq!(c.f2.norm(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(conversion_probability(&c), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn symmetric_loss_quarter_period() {
        let w = 2.0 * PI * 0.6e9;
        let c = propagator_coeffs(w, 0.0, 0.03 * w, 0.03 * w, PI / 2.0 / w).unwrap();
        assert_relative_eq!(
            conversion_probability(&c),
            (-0.03 * PI).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(conversion_probability(&c), 0.9100, epsilon = 1e-4);
    }

    #[test]
    fn negative_delay_is_rejected() {
        assert!(matches!(
            propagator_coeffs(1.0, 0.0, 0.0, 0.0, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zero_delay_has_zero_probability() {
        let c = propagator_coeffs(1.0, 0.0, 0.1, 0.1, 0.0).unwrap();
        assert_eq!(conversion_probability(&c), 0.0);
    }

    #[test]
    fn optimal_delay_values() {
        assert_relative_eq!(
            optimal_tau(2.0, 0.0, 0.0).unwrap(),
            PI / 4.0,
            max_relative = 1e-15
        );
        // atan(1 / 0.03)
        assert_relative_eq!(
            optimal_tau(1.0, 0.03, 0.0).unwrap(),
            1.540_805_4,
            epsilon = 1e-6
        );
        assert!(optimal_tau(1.0, 1e9, 0.0).unwrap() < 1e-8);
        assert!(matches!(
            optimal_tau(1.0, 0.1, 1.0),
            Err(Error::NoInteriorOptimum { .. })
        ));
        assert!(matches!(
            optimal_tau(1.0, 0.1, 2.0),
            Err(Error::NoInteriorOptimum { .. })
        ));
    }

    #[test]
    fn optimal_delay_matches_dense_sweep() {
        let prop = Propagator::new(1.0, 0.0, EffectiveRates::from_band_rates(0.03, 0.03));
        let best = prop.optimal_tau().unwrap();
        let n = 200_000;
        let (arg, _) = (0..=n)
            .map(|k| PI * k as f64 / n as f64)
            .map(|t| (t, prop.conversion_probability(t).unwrap()))
            .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert!((arg - best).abs() < 1e-4, "sweep argmax {arg} vs {best}");
    }

    #[test]
    fn degenerate_limits() {
        let c = propagator_coeffs(0.5, 0.0, 0.7, -0.3, 2.0).unwrap();
        assert_eq!(c.regime, Regime::Degenerate);
        let damp = (-0.2f64 * 2.0).exp();
        assert_relative_eq!(c.f1p.re, damp * (1.0 - 0.5 * 2.0), epsilon = 1e-15);
        assert_relative_eq!(c.f1i.re, damp * (1.0 + 0.5 * 2.0), epsilon = 1e-15);
        assert_relative_eq!(c.f2.re, 0.5 * 2.0 * damp, epsilon = 1e-15);
    }

    #[test]
    fn determinant_identity() {
        for (k_p, k_i) in [(0.2, 0.1), (0.3, -2.4), (1.5, -0.5)] {
            let c = propagator_coeffs(1.0, 1.1, k_p, k_i, 1.7).unwrap();
            let rhs = (-2.0 * c.kappa_s * 1.7).exp();
            assert!((c.determinant() - rhs).norm() < 1e-12 * rhs.max(1.0));
        }
    }
}
