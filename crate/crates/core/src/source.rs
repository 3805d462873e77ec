//! Train of single-photon Gaussian pulses at the input facet and its field
//! correlators.
//!
//! Pulse `j` (1-based) is a single photon in the temporal mode
//! `u_j(t) = (pi sigma^2)^{-1/4} exp(-(t - j T_rep)^2 / (2 sigma^2))`. The
//! carrier is a global phase in the rotating frame and is dropped. For the
//! product state of single-photon Fock modes
//!
//! ```text
//! <psi^+(t1) psi(t2)>                      = sum_j u_j*(t1) u_j(t2)
//! <psi^+(t1) psi^+(t2) psi(t2) psi(t1)>    = sum_{j != k} |u_j(t1)|^2 |u_k(t2)|^2
//!                                            + u_j*(t1) u_j(t2) u_k*(t2) u_k(t1)
//! ```
//!
//! The second line keeps the exchange term, which is negligible for well
//! separated pulses.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::TimeGrid;
use crate::error::{invalid, Result};

/// Minimum `T_rep / sigma` below which pulses overlap noticeably.
pub const SEPARATION_WARNING_RATIO: f64 = 10.0;

/// How a quoted pulse duration maps onto `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthConvention {
    /// Full width at half maximum of `|u|^2`: `sigma = w / (2 sqrt(ln 2))`.
    #[default]
    IntensityFwhm,
    /// The width is `sigma` itself (1/e half-width of `|u|^2`).
    Sigma,
}

impl WidthConvention {
    pub fn to_sigma(self, width: f64) -> f64 {
        match self {
            Self::IntensityFwhm => width / (2.0 * std::f64::consts::LN_2.sqrt()),
            Self::Sigma => width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseTrainSpec {
    pub n_pulses: usize,
    /// Repetition period (s).
    pub rep_period: f64,
    /// Envelope parameter sigma (s).
    pub sigma_t: f64,
}

impl PulseTrainSpec {
    pub fn new(n_pulses: usize, rep_period: f64, sigma_t: f64) -> Result<Self> {
        let spec = Self {
            n_pulses,
            rep_period,
            sigma_t,
        };
        spec.validate()?;
        if !spec.well_separated() {
            log::warn!(
                "pulses overlap: T_rep / sigma = {:.3} < {SEPARATION_WARNING_RATIO}",
                rep_period / sigma_t
            );
        }
        Ok(spec)
    }

    pub fn with_width(
        n_pulses: usize,
        rep_period: f64,
        width: f64,
        convention: WidthConvention,
    ) -> Result<Self> {
        Self::new(n_pulses, rep_period, convention.to_sigma(width))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return Err(invalid("pulse train needs at least one pulse"));
        }
        if !(self.rep_period.is_finite() && self.rep_period > 0.0) {
            return Err(invalid("repetition period must be positive"));
        }
        if !(self.sigma_t.is_finite() && self.sigma_t > 0.0) {
            return Err(invalid("pulse width must be positive"));
        }
        Ok(())
    }

    pub fn well_separated(&self) -> bool {
        self.rep_period / self.sigma_t >= SEPARATION_WARNING_RATIO
    }

    /// Center `j T_rep` of pulse `j` (1-based).
    pub fn center(&self, j: usize) -> f64 {
        j as f64 * self.rep_period
    }

    pub fn peak_amplitude(&self) -> f64 {
        (PI * self.sigma_t * self.sigma_t).powf(-0.25)
    }

    /// Peak of `|u_j|^2`.
    pub fn peak_rate(&self) -> f64 {
        1.0 / (PI.sqrt() * self.sigma_t)
    }

    /// Pulse indices whose envelope is non-negligible at `t`.
    fn active(&self, t: f64) -> std::ops::RangeInclusive<usize> {
        // beyond 40 sigma the amplitude is below 1e-300
        let reach = 40.0 * self.sigma_t;
        let lo = ((t - reach) / self.rep_period).ceil().max(1.0);
        let hi = ((t + reach) / self.rep_period)
            .floor()
            .min(self.n_pulses as f64);
        if hi < lo {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        lo as usize..=hi as usize
    }
}

/// Temporal mode of pulse `j` at time `t` (1/sqrt(s)).
pub fn pulse_envelope(spec: &PulseTrainSpec, j: usize, t: f64) -> Complex64 {
    let x = (t - spec.center(j)) / spec.sigma_t;
    Complex64::new(spec.peak_amplitude() * (-0.5 * x * x).exp(), 0.0)
}

/// Photon flux `n_p(0, t) = sum_j |u_j(t)|^2` (1/s).
pub fn input_rate(spec: &PulseTrainSpec, t: f64) -> f64 {
    spec.active(t)
        .map(|j| pulse_envelope(spec, j, t).norm_sqr())
        .sum()
}

/// `<psi^+(0, t) psi(0, t + dt)>` (1/s).
pub fn input_g1(spec: &PulseTrainSpec, t: f64, dt: f64) -> Complex64 {
    let t2 = t + dt;
    let (a, b) = (spec.active(t), spec.active(t2));
    let lo = *a.start().max(b.start());
    let hi = *a.end().min(b.end());
    (lo..=hi)
        .map(|j| pulse_envelope(spec, j, t).conj() * pulse_envelope(spec, j, t2))
        .sum()
}

/// `<psi^+(0,t) psi^+(0,t+dt) psi(0,t+dt) psi(0,t)>` (1/s^2), direct plus
/// exchange contributions.
pub fn input_g2(spec: &PulseTrainSpec, t: f64, dt: f64) -> f64 {
    input_g2_terms(spec, t, dt).total()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputG2 {
    pub direct: f64,
    pub exchange: f64,
}

impl InputG2 {
    pub fn total(&self) -> f64 {
        self.direct + self.exchange
    }
}

pub fn input_g2_terms(spec: &PulseTrainSpec, t: f64, dt: f64) -> InputG2 {
    let t2 = t + dt;
    let first: Vec<(usize, Complex64, Complex64)> = spec
        .active(t)
        .map(|j| (j, pulse_envelope(spec, j, t), pulse_envelope(spec, j, t2)))
        .collect();
    let second: Vec<(usize, Complex64, Complex64)> = spec
        .active(t2)
        .map(|k| (k, pulse_envelope(spec, k, t), pulse_envelope(spec, k, t2)))
        .collect();
    let mut direct = 0.0;
    let mut exchange = Complex64::new(0.0, 0.0);
    for &(j, uj_t, uj_t2) in &first {
        for &(k, uk_t, uk_t2) in &second {
            if j == k {
                continue;
            }
            direct += uj_t.norm_sqr() * uk_t2.norm_sqr();
            exchange += uj_t.conj() * uj_t2 * uk_t2.conj() * uk_t;
        }
    }
    InputG2 {
        direct,
        exchange: exchange.re,
    }
}

/// Envelope of one pulse sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub grid: TimeGrid,
    pub pulse: usize,
    pub samples: Vec<Complex64>,
}

impl Envelope {
    pub fn sample(spec: &PulseTrainSpec, pulse: usize, grid: TimeGrid) -> Result<Self> {
        if pulse == 0 || pulse > spec.n_pulses {
            return Err(invalid(format!(
                "pulse index {pulse} outside 1..={}",
                spec.n_pulses
            )));
        }
        let samples = grid
            .points()
            .map(|t| pulse_envelope(spec, pulse, t))
            .collect();
        Ok(Self {
            grid,
            pulse,
            samples,
        })
    }

    /// Trapezoidal `int |u|^2 dt` over the grid.
    pub fn norm(&self) -> f64 {
        let dt = self.grid.dt();
        let n = self.samples.len();
        let inner: f64 = self.samples.iter().map(|u| u.norm_sqr()).sum();
        dt * (inner - 0.5 * (self.samples[0].norm_sqr() + self.samples[n - 1].norm_sqr()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nanosecond_train(n: usize) -> PulseTrainSpec {
        PulseTrainSpec::with_width(n, 1e-7, 1e-9, WidthConvention::IntensityFwhm).unwrap()
    }

    #[test]
    fn fwhm_conversion() {
        let s = nanosecond_train(1);
        assert_relative_eq!(s.sigma_t, 0.6005612e-9, max_relative = 1e-6);
        // |u|^2 at +-FWHM/2 is half the peak
        let half = input_rate(&s, s.center(1) + 0.5e-9);
        assert_relative_eq!(half, 0.5 * s.peak_rate(), max_relative = 1e-12);
    }

    #[test]
    fn envelope_peak_and_normalization() {
        let s = nanosecond_train(3);
        assert_relative_eq!(pulse_envelope(&s, 2, s.center(2)).re, s.peak_amplitude());
        let grid = TimeGrid::centered(s.center(2), 12.0 * s.sigma_t, 2001).unwrap();
        let env = Envelope::sample(&s, 2, grid).unwrap();
        assert!((env.norm() - 1.0).abs() < 1e-6);
        assert!(Envelope::sample(&s, 0, grid).is_err());
        assert!(Envelope::sample(&s, 4, grid).is_err());
    }

    #[test]
    fn single_pulse_peak_rate() {
        let s = nanosecond_train(1);
        assert_relative_eq!(
            input_rate(&s, s.center(1)),
            1.0 / (PI.sqrt() * s.sigma_t),
            max_relative = 1e-14
        );
    }

    #[test]
    fn rate_vanishes_between_pulses() {
        let s = nanosecond_train(4);
        let mid = 0.5 * (s.center(2) + s.center(3));
        assert!(input_rate(&s, mid) < 1e-300);
    }

    #[test]
    fn g1_at_zero_delay_is_rate() {
        let s = nanosecond_train(3);
        for t in [0.9e-7, 1e-7, 2.0003e-7] {
            assert_eq!(input_g1(&s, t, 0.0).re, input_rate(&s, t));
        }
    }

    #[test]
    fn g1_gaussian_decay() {
        let s = nanosecond_train(1);
        let t = s.center(1);
        for dt in [0.1e-9, 0.5e-9, 1.3e-9] {
            let want = s.peak_rate() * (-dt * dt / (4.0 * s.sigma_t * s.sigma_t)).exp();
            let g = input_g1(&s, t - 0.5 * dt, dt).re;
            assert_relative_eq!(g, want, max_relative = 1e-12);
        }
        // fixed t at the center: exp(-dt^2/(2 sigma^2)) decay of one factor
        let g = input_g1(&s, t, 0.5e-9).re;
        assert_relative_eq!(
            g,
            s.peak_rate() * (-0.125e-18f64 / (s.sigma_t * s.sigma_t)).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn g1_has_no_cross_pulse_coherence() {
        let s = nanosecond_train(3);
        assert!(input_g1(&s, s.center(1), s.rep_period).norm() < 1e-300);
    }

    #[test]
    fn single_photon_never_coincides() {
        let s = nanosecond_train(1);
        for dt in [-1e-9, 0.0, 1e-10, 5e-9] {
            assert_eq!(input_g2(&s, s.center(1), dt), 0.0);
        }
    }

    #[test]
    fn two_pulse_peak_coincidence() {
        let s = nanosecond_train(2);
        let t = s.center(1);
        let terms = input_g2_terms(&s, t, s.rep_period);
        let want = input_rate(&s, t) * input_rate(&s, t + s.rep_period);
        assert_relative_eq!(terms.direct, want, max_relative = 1e-14);
        assert!(terms.exchange.abs() <= 1e-10 * terms.direct);
        // antibunching
        assert!(input_g2(&s, t, 0.0) < 1e-300);
    }
}
