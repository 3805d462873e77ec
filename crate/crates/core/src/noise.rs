//! Langevin noise contribution `I(L; t, t + dt)` to the i-band correlators.
//!
//! Both delta functions of the Markovian correlators collapse the double
//! propagation integral onto the diagonal, so the contribution factorizes
//! into a stationary flux times a delay profile:
//!
//! ```text
//! I(L; t, t + dt) = D(dt) * int_0^tau_L [ |f1i(y)|^2 sum kappa_i^(-) + |f2(y)|^2 sum kappa_p^(-) ] dy
//! ```
//!
//! `D` is a unit-area Gaussian whose width is set by the noise-photon
//! bandwidth, standing in for `delta(dt)`. The `1/v_g` from
//! `delta(x2 - x1)` is absorbed so that `I` is a flux (1/s) at `x = L`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::NoiseModel;
use crate::error::{Error, Result};
use crate::propagator::PropagatorCoefficients;
use crate::quadrature::{integrate, SimpsonSettings};

/// Unit-area Gaussian of standard deviation `1 / (2 pi bandwidth)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseKernel {
    pub bandwidth: f64,
    pub sigma: f64,
}

impl NoiseKernel {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::Domain(format!(
                "noise bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self {
            bandwidth,
            sigma: 1.0 / (2.0 * PI * bandwidth),
        })
    }

    /// Kernel density at delay `dt` (1/s).
    pub fn density(&self, dt: f64) -> f64 {
        let x = dt / self.sigma;
        (-0.5 * x * x).exp() / ((2.0 * PI).sqrt() * self.sigma)
    }

    pub fn peak(&self) -> f64 {
        self.density(0.0)
    }

    /// `D(dt) / D(0)`.
    pub fn profile(&self, dt: f64) -> f64 {
        let x = dt / self.sigma;
        (-0.5 * x * x).exp()
    }

    /// Half width at half maximum, `sigma sqrt(2 ln 2)`.
    pub fn half_width(&self) -> f64 {
        self.sigma * (2.0 * std::f64::consts::LN_2).sqrt()
    }
}

pub fn noise_kernel(bandwidth: f64, dt: f64) -> Result<f64> {
    Ok(NoiseKernel::new(bandwidth)?.density(dt))
}

/// Stationary noise flux at the output facet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBackground {
    /// Coincidence value `I(L; t, t)` (1/s).
    pub b0: f64,
    /// Dimensionless `int [...] dy`; `b0 = D(0) * weight`.
    pub weight: f64,
    pub kernel: Option<NoiseKernel>,
    pub quadrature_nodes: usize,
}

impl NoiseBackground {
    pub fn zero() -> Self {
        Self {
            b0: 0.0,
            weight: 0.0,
            kernel: None,
            quadrature_nodes: 0,
        }
    }

    /// `I(L; t, t + dt)`; there is no `t` argument because the noise is
    /// stationary.
    pub fn at(&self, dt: f64) -> f64 {
        match self.kernel {
            Some(k) if self.weight != 0.0 => self.weight * k.density(dt),
            _ => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.b0 == 0.0
    }
}

/// Integrates the gain-weighted propagator intensities over `[0, tau_l]`.
pub fn noise_background<F>(coeffs: F, noise: &NoiseModel, tau_l: f64) -> Result<NoiseBackground>
where
    F: Fn(f64) -> PropagatorCoefficients,
{
    noise_background_with(coeffs, noise, tau_l, SimpsonSettings::default())
}

pub fn noise_background_with<F>(
    coeffs: F,
    noise: &NoiseModel,
    tau_l: f64,
    settings: SimpsonSettings,
) -> Result<NoiseBackground>
where
    F: Fn(f64) -> PropagatorCoefficients,
{
    if !(tau_l.is_finite() && tau_l >= 0.0) {
        return Err(Error::Domain(format!(
            "transit time must be non-negative, got {tau_l}"
        )));
    }
    noise.validate()?;
    let gain_i = noise.gain_sum_i();
    let gain_p = noise.gain_sum_p();
    if gain_i == 0.0 && gain_p == 0.0 {
        return Ok(NoiseBackground::zero());
    }
    let kernel = NoiseKernel::new(noise.noise_bandwidth)?;
    let integrand = |y: f64| {
        let c = coeffs(y);
        c.f1i.norm_sqr() * gain_i + c.f2.norm_sqr() * gain_p
    };
    let integral = integrate(integrand, 0.0, tau_l, settings)?;
    Ok(NoiseBackground {
        b0: kernel.peak() * integral.value,
        weight: integral.value,
        kernel: Some(kernel),
        quadrature_nodes: integral.nodes,
    })
}
