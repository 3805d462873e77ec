//! Physical configuration of the crystal, noise channels, time grids and the
//! regime-validity checks for the ideal-conversion approximation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default threshold for the "much smaller than one" checks.
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.1;

/// Crystal and pump parameters.
///
/// Propagation formulas use a single group velocity, the p-band value. The
/// i-band velocity only enters the mismatch check in [`check_validity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Crystal length (m).
    pub crystal_length: f64,
    /// Group velocity in the p band (m/s).
    pub group_velocity_p: f64,
    /// Group velocity in the i band (m/s).
    pub group_velocity_i: f64,
    /// Pump coupling |Omega| (rad/s).
    pub coupling_omega0: f64,
    /// Phase of the classical pump field (rad).
    pub pump_phase: f64,
    /// d^2 omega / dk^2 in the p band (m^2/s).
    pub gvd_p: Option<f64>,
    /// d^2 omega / dk^2 in the i band (m^2/s).
    pub gvd_i: Option<f64>,
    /// Spontaneous down-conversion rate (1/s).
    pub sdc_rate: Option<f64>,
    /// Wavenumber half-width of the photon (1/m). When absent the
    /// interaction-limited value `omega0 / v_g` is used.
    pub photon_bandwidth: Option<f64>,
}

impl PhysicalConfig {
    pub fn new(
        crystal_length: f64,
        group_velocity_p: f64,
        group_velocity_i: f64,
        coupling_omega0: f64,
        pump_phase: f64,
    ) -> Result<Self> {
        let cfg = Self {
            crystal_length,
            group_velocity_p,
            group_velocity_i,
            coupling_omega0,
            pump_phase,
            gvd_p: None,
            gvd_i: None,
            sdc_rate: None,
            photon_bandwidth: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gvd(mut self, gvd_p: f64, gvd_i: f64) -> Self {
        self.gvd_p = Some(gvd_p);
        self.gvd_i = Some(gvd_i);
        self
    }

    pub fn with_sdc_rate(mut self, gamma: f64) -> Self {
        self.sdc_rate = Some(gamma);
        self
    }

    pub fn with_photon_bandwidth(mut self, delta_k: f64) -> Self {
        self.photon_bandwidth = Some(delta_k);
        self
    }

    /// Same configuration with a different crystal length.
    pub fn with_length(&self, crystal_length: f64) -> Self {
        Self {
            crystal_length,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.crystal_length.is_finite() && self.crystal_length > 0.0) {
            return Err(invalid(format!(
                "crystal length must be positive, got {}",
                self.crystal_length
            )));
        }
        if !(self.group_velocity_p.is_finite() && self.group_velocity_p > 0.0) {
            return Err(invalid("p-band group velocity must be positive"));
        }
        if !(self.group_velocity_i.is_finite() && self.group_velocity_i > 0.0) {
            return Err(invalid("i-band group velocity must be positive"));
        }
        if !(self.coupling_omega0.is_finite() && self.coupling_omega0 >= 0.0) {
            return Err(invalid("coupling omega0 must be finite and non-negative"));
        }
        if !self.pump_phase.is_finite() {
            return Err(invalid("pump phase must be finite"));
        }
        for (name, v) in [("gvd_p", self.gvd_p), ("gvd_i", self.gvd_i)] {
            if matches!(v, Some(x) if !x.is_finite()) {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        if matches!(self.sdc_rate, Some(g) if !(g.is_finite() && g >= 0.0)) {
            return Err(invalid(
                "spontaneous down-conversion rate must be non-negative",
            ));
        }
        if matches!(self.photon_bandwidth, Some(k) if !(k.is_finite() && k > 0.0)) {
            return Err(invalid("photon bandwidth must be positive"));
        }
        Ok(())
    }

    /// Effective group velocity used in all propagation formulas.
    pub fn group_velocity(&self) -> f64 {
        self.group_velocity_p
    }

    /// Transit time tau = L / v_g.
    pub fn transit_time(&self) -> f64 {
        self.crystal_length / self.group_velocity()
    }

    /// Photon wavenumber half-width, falling back to `omega0 / v_g`.
    pub fn photon_bandwidth(&self) -> f64 {
        self.photon_bandwidth
            .unwrap_or(self.coupling_omega0 / self.group_velocity())
    }
}

/// One Markovian reservoir attached to a band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub label: String,
    /// Loss rate kappa^(+) (1/s).
    pub loss_rate: f64,
    /// Gain rate kappa^(-) (1/s).
    pub gain_rate: f64,
}

impl NoiseChannel {
    pub fn new(label: impl Into<String>, loss_rate: f64, gain_rate: f64) -> Result<Self> {
        let ch = Self {
            label: label.into(),
            loss_rate,
            gain_rate,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn loss(label: impl Into<String>, rate: f64) -> Result<Self> {
        Self::new(label, rate, 0.0)
    }

    pub fn gain(label: impl Into<String>, rate: f64) -> Result<Self> {
        Self::new(label, 0.0, rate)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.loss_rate.is_finite() && self.loss_rate >= 0.0) {
            return Err(invalid(format!(
                "channel '{}': loss rate must be finite and non-negative",
                self.label
            )));
        }
        if !(self.gain_rate.is_finite() && self.gain_rate >= 0.0) {
            return Err(invalid(format!(
                "channel '{}': gain rate must be finite and non-negative",
                self.label
            )));
        }
        Ok(())
    }

    /// Net rate kappa^(+) - kappa^(-).
    pub fn net_rate(&self) -> f64 {
        self.loss_rate - self.gain_rate
    }
}

/// Loss and gain channels of both bands plus the bandwidth of noise photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub channels_p: Vec<NoiseChannel>,
    pub channels_i: Vec<NoiseChannel>,
    /// Noise-photon bandwidth (Hz), regularizes the delta-correlated forces.
    pub noise_bandwidth: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn new(
        channels_p: Vec<NoiseChannel>,
        channels_i: Vec<NoiseChannel>,
        noise_bandwidth: f64,
    ) -> Result<Self> {
        let model = Self {
            channels_p,
            channels_i,
            noise_bandwidth,
        };
        model.validate()?;
        Ok(model)
    }

    /// No channels at all.
    pub fn noiseless() -> Self {
        Self {
            channels_p: Vec::new(),
            channels_i: Vec::new(),
            noise_bandwidth: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for ch in self.channels_p.iter().chain(&self.channels_i) {
            ch.validate()?;
        }
        if !self.noise_bandwidth.is_finite() || self.noise_bandwidth < 0.0 {
            return Err(invalid("noise bandwidth must be finite and non-negative"));
        }
        if self.has_gain() && self.noise_bandwidth <= 0.0 {
            return Err(invalid(
                "noise bandwidth must be positive when any gain channel is present",
            ));
        }
        Ok(())
    }

    pub fn has_gain(&self) -> bool {
        self.channels_p
            .iter()
            .chain(&self.channels_i)
            .any(|c| c.gain_rate > 0.0)
    }

    pub fn gain_sum_p(&self) -> f64 {
        self.channels_p.iter().map(|c| c.gain_rate).sum()
    }

    pub fn gain_sum_i(&self) -> f64 {
        self.channels_i.iter().map(|c| c.gain_rate).sum()
    }

    /// Same model with every gain rate set to zero.
    pub fn loss_only(&self) -> Self {
        let strip = |chs: &[NoiseChannel]| {
            chs.iter()
                .map(|c| NoiseChannel {
                    gain_rate: 0.0,
                    ..c.clone()
                })
                .collect()
        };
        Self {
            channels_p: strip(&self.channels_p),
            channels_i: strip(&self.channels_i),
            noise_bandwidth: self.noise_bandwidth,
        }
    }

    /// Concatenates channel lists band by band; keeps `self`'s bandwidth.
    pub fn merged(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.channels_p.extend(other.channels_p.iter().cloned());
        out.channels_i.extend(other.channels_i.iter().cloned());
        out
    }
}

/// Net band rates and their symmetric / antisymmetric combinations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    pub kappa_p: f64,
    pub kappa_i: f64,
    /// (kappa_i + kappa_p) / 2
    pub kappa_s: f64,
    /// (kappa_p - kappa_i) / 2
    pub kappa_d: f64,
}

impl EffectiveRates {
    pub fn from_band_rates(kappa_p: f64, kappa_i: f64) -> Self {
        Self {
            kappa_p,
            kappa_i,
            kappa_s: 0.5 * (kappa_i + kappa_p),
            kappa_d: 0.5 * (kappa_p - kappa_i),
        }
    }
}

/// Net rates per band; negative values mean net gain.
pub fn effective_kappas(noise: &NoiseModel) -> EffectiveRates {
    let kappa_p = noise.channels_p.iter().map(NoiseChannel::net_rate).sum();
    let kappa_i = noise.channels_i.iter().map(NoiseChannel::net_rate).sum();
    EffectiveRates::from_band_rates(kappa_p, kappa_i)
}

/// Length for which `omega0 L / v_g = (2n + 1) pi / 2`, i.e. complete
/// conversion at the output facet.
pub fn minimal_length(cfg: &PhysicalConfig, n: u32) -> Result<f64> {
    if cfg.coupling_omega0 <= 0.0 {
        return Err(Error::UndrivenMedium);
    }
    let order = f64::from(2 * n + 1);
    Ok(order * (PI / 2.0) * cfg.group_velocity() / cfg.coupling_omega0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotEvaluated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when the number is below the limit.
    Below,
    /// Passes when the number is above the limit.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityCheck {
    pub name: String,
    pub value: Option<f64>,
    pub bound: Bound,
    pub limit: f64,
    pub verdict: Verdict,
}

impl ValidityCheck {
    fn evaluate(name: &str, value: Option<f64>, bound: Bound, limit: f64) -> Self {
        let verdict = match value {
            None => Verdict::NotEvaluated,
            Some(v) => {
                let ok = match bound {
                    Bound::Below => v < limit,
                    Bound::Above => v > limit,
                };
                if ok {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
        };
        Self {
            name: name.to_string(),
            value,
            bound,
            limit,
            verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub order_n: u32,
    pub threshold: f64,
    pub dispersion_p: ValidityCheck,
    pub dispersion_i: ValidityCheck,
    pub gv_mismatch: ValidityCheck,
    pub coherence: ValidityCheck,
    pub sdc: ValidityCheck,
}

impl ValidityReport {
    pub fn checks(&self) -> [&ValidityCheck; 5] {
        [
            &self.dispersion_p,
            &self.dispersion_i,
            &self.gv_mismatch,
            &self.coherence,
            &self.sdc,
        ]
    }

    /// True when no evaluated check failed.
    pub fn all_evaluated_pass(&self) -> bool {
        self.checks().iter().all(|c| c.verdict != Verdict::Fail)
    }
}

/// Dimensionless numbers controlling the dispersion-free, matched-velocity,
/// long-medium and negligible down-conversion approximations.
pub fn check_validity(cfg: &PhysicalConfig, n: u32, threshold: f64) -> Result<ValidityReport> {
    let positive = |x: f64| x.is_finite() && x > 0.0;
    if !(positive(cfg.crystal_length)
        && positive(cfg.group_velocity_p)
        && positive(cfg.group_velocity_i))
    {
        return Err(invalid(
            "crystal length and group velocities must be positive",
        ));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(invalid("validity threshold must be positive"));
    }
    let order = f64::from(2 * n + 1);
    let vg = cfg.group_velocity();
    let length = cfg.crystal_length;

    let dispersion =
        |gvd: Option<f64>| gvd.map(|d| order * (PI * PI / 8.0) * d.abs() / (vg * length));
    let mismatch = order * (PI / 2.0) * (cfg.group_velocity_p - cfg.group_velocity_i).abs() / vg;
    let coherence = length * cfg.photon_bandwidth();
    let sdc = cfg.sdc_rate.map(|g| g * length / vg);

    Ok(ValidityReport {
        order_n: n,
        threshold,
        dispersion_p: ValidityCheck::evaluate(
            "dispersion_p",
            dispersion(cfg.gvd_p),
            Bound::Below,
            threshold,
        ),
        dispersion_i: ValidityCheck::evaluate(
            "dispersion_i",
            dispersion(cfg.gvd_i),
            Bound::Below,
            threshold,
        ),
        gv_mismatch: ValidityCheck::evaluate(
            "gv_mismatch",
            Some(mismatch),
            Bound::Below,
            threshold,
        ),
        coherence: ValidityCheck::evaluate(
            "coherence",
            Some(coherence),
            Bound::Above,
            1.0 / threshold,
        ),
        sdc: ValidityCheck::evaluate("sdc", sdc, Bound::Below, threshold),
    })
}

/// Uniform sampling of an interval, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(invalid("a grid needs at least two samples"));
        }
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(invalid(format!(
                "grid bounds must be finite and increasing, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_samples,
        })
    }

    /// Grid centered on `center` spanning `center ± half_width`.
    pub fn centered(center: f64, half_width: f64, n_samples: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, n_samples)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_samples - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_samples {
            self.t_end
        } else {
            self.t_start + i as f64 * self.dt()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |i| self.point(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }
}
