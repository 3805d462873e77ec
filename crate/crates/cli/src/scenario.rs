//! JSON scenario files.
//!
//! Every field name carries its SI unit. Unknown keys are rejected so that a
//! misspelled parameter cannot silently fall back to a default.

use std::path::Path;

use chi2fc::{
    minimal_length, NoiseChannel, NoiseModel, Normalization, PeakSearch, PhysicalConfig,
    PulseTrainSpec, TimeGrid, WidthConvention, DEFAULT_VALIDITY_THRESHOLD,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub physical: PhysicalSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub pulses: PulseSection,
    #[serde(default)]
    pub grids: GridSection,
    #[serde(default)]
    pub validity: ValiditySection,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    /// Defaults to the shortest full-conversion length.
    #[serde(default)]
    pub crystal_length_m: Option<f64>,
    pub group_velocity_p_m_per_s: f64,
    /// Defaults to the p-band value.
    #[serde(default)]
    pub group_velocity_i_m_per_s: Option<f64>,
    pub coupling_omega0_rad_per_s: f64,
    #[serde(default)]
    pub pump_phase_rad: f64,
    #[serde(default)]
    pub gvd_p_m2_per_s: Option<f64>,
    #[serde(default)]
    pub gvd_i_m2_per_s: Option<f64>,
    #[serde(default)]
    pub sdc_rate_per_s: Option<f64>,
    #[serde(default)]
    pub photon_bandwidth_per_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub channels_p: Vec<ChannelSection>,
    #[serde(default)]
    pub channels_i: Vec<ChannelSection>,
    #[serde(default)]
    pub noise_bandwidth_hz: f64,
}

/// Each rate may be given in 1/s or in units of `omega0`, not both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_rate_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_rate_over_omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_rate_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_rate_over_omega0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub n_pulses: usize,
    pub rep_period_s: f64,
    pub width_s: f64,
    #[serde(default)]
    pub width_convention: WidthConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub start: f64,
    pub end: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Crystal lengths of a rate sweep, in units of `L0`.
    #[serde(default = "default_length_grid")]
    pub length_over_l0: RangeSection,
    /// Delay segments (s); the correlation axis is their sorted union.
    #[serde(default = "default_delay_grids")]
    pub delays_s: Vec<RangeSection>,
    /// Pulse whose arrival fixes `t` in correlation traces; defaults to an
    /// interior pulse.
    #[serde(default)]
    pub pulse_index: Option<usize>,
    #[serde(default)]
    pub peak_search: PeakSearch,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            length_over_l0: default_length_grid(),
            delays_s: default_delay_grids(),
            pulse_index: None,
            peak_search: PeakSearch::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValiditySection {
    #[serde(default)]
    pub order_n: u32,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for ValiditySection {
    fn default() -> Self {
        Self {
            order_n: 0,
            threshold: DEFAULT_VALIDITY_THRESHOLD,
        }
    }
}

/// File names relative to the `--out` directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_rate_sweep")]
    pub rate_sweep: String,
    #[serde(default = "default_g1")]
    pub g1: String,
    #[serde(default = "default_g2")]
    pub g2: String,
    #[serde(default = "default_validity")]
    pub validity: String,
    #[serde(default = "default_manifest")]
    pub manifest: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            rate_sweep: default_rate_sweep(),
            g1: default_g1(),
            g2: default_g2(),
            validity: default_validity(),
            manifest: default_manifest(),
        }
    }
}

fn default_normalization() -> Normalization {
    Normalization::RescaledToNoiselessMax
}

fn default_threshold() -> f64 {
    DEFAULT_VALIDITY_THRESHOLD
}

fn default_length_grid() -> RangeSection {
    RangeSection {
        start: 0.05,
        end: 3.0,
        n_samples: 60,
    }
}

fn default_delay_grids() -> Vec<RangeSection> {
    vec![
        RangeSection {
            start: -1.5e-7,
            end: 1.5e-7,
            n_samples: 3001,
        },
        RangeSection {
            start: -2e-11,
            end: 2e-11,
            n_samples: 401,
        },
    ]
}

fn default_rate_sweep() -> String {
    "rate_sweep.csv".into()
}

fn default_g1() -> String {
    "g1.csv".into()
}

fn default_g2() -> String {
    "g2.csv".into()
}

fn default_validity() -> String {
    "validity.json".into()
}

fn default_manifest() -> String {
    "manifest.json".into()
}

/// Core-level objects built from a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: PhysicalConfig,
    pub noise: NoiseModel,
    pub pulses: PulseTrainSpec,
    pub l0: f64,
    pub lengths: Vec<f64>,
    pub delays: Vec<f64>,
    pub pulse_index: usize,
}

impl Scenario {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(CliError::scenario)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Validates every section and builds the core objects.
    pub fn resolve(&self) -> CliResult<Resolved> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Scenario(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = &self.physical;
        let vp = p.group_velocity_p_m_per_s;
        let omega0 = p.coupling_omega0_rad_per_s;
        let probe = PhysicalConfig::new(
            1.0,
            vp,
            p.group_velocity_i_m_per_s.unwrap_or(vp),
            omega0,
            p.pump_phase_rad,
        )
        .map_err(CliError::scenario)?;
        let l0 = minimal_length(&probe, 0).map_err(CliError::scenario)?;
        let mut config = probe.with_length(p.crystal_length_m.unwrap_or(l0));
        config.gvd_p = p.gvd_p_m2_per_s;
        config.gvd_i = p.gvd_i_m2_per_s;
        config.sdc_rate = p.sdc_rate_per_s;
        config.photon_bandwidth = p.photon_bandwidth_per_m;
        config.validate().map_err(CliError::scenario)?;

        let channels = |list: &[ChannelSection]| {
            list.iter()
                .map(|c| c.to_channel(omega0))
                .collect::<CliResult<Vec<_>>>()
        };
        let noise = NoiseModel::new(
            channels(&self.noise.channels_p)?,
            channels(&self.noise.channels_i)?,
            self.noise.noise_bandwidth_hz,
        )
        .map_err(CliError::scenario)?;

        let s = &self.pulses;
        let pulses =
            PulseTrainSpec::with_width(s.n_pulses, s.rep_period_s, s.width_s, s.width_convention)
                .map_err(CliError::scenario)?;

        self.grids
            .peak_search
            .validate()
            .map_err(CliError::scenario)?;
        let lengths = self
            .grids
            .length_over_l0
            .to_grid()?
            .points()
            .map(|x| x * l0)
            .collect();
        if self.grids.delays_s.is_empty() {
            return Err(CliError::Scenario(
                "grids.delays_s must not be empty".into(),
            ));
        }
        let mut delays = Vec::new();
        for r in &self.grids.delays_s {
            delays.extend(r.to_grid()?.points());
        }
        delays.sort_by(f64::total_cmp);
        delays.dedup();

        let pulse_index = self
            .grids
            .pulse_index
            .unwrap_or(pulses.n_pulses / 2 + 1)
            .min(pulses.n_pulses);
        if pulse_index == 0 {
            return Err(CliError::Scenario("grids.pulse_index starts at 1".into()));
        }
        let earliest = pulses.center(pulse_index) + delays[0];
        if earliest < 0.0 {
            return Err(CliError::Scenario(format!(
                "delay {:e} s reaches before the crystal is filled (t - tau = {earliest:e} s)",
                delays[0]
            )));
        }
        if !(self.validity.threshold.is_finite() && self.validity.threshold > 0.0) {
            return Err(CliError::Scenario(
                "validity.threshold must be positive".into(),
            ));
        }

        Ok(Resolved {
            config,
            noise,
            pulses,
            l0,
            lengths,
            delays,
            pulse_index,
        })
    }

    /// The same scenario with every default made explicit and rates in 1/s.
    pub fn resolved_echo(&self, resolved: &Resolved) -> Self {
        let mut out = self.clone();
        let c = &resolved.config;
        out.physical.crystal_length_m = Some(c.crystal_length);
        out.physical.group_velocity_i_m_per_s = Some(c.group_velocity_i);
        let echo = |list: &[NoiseChannel]| {
            list.iter()
                .map(|ch| ChannelSection {
                    label: ch.label.clone(),
                    loss_rate_per_s: Some(ch.loss_rate),
                    loss_rate_over_omega0: None,
                    gain_rate_per_s: Some(ch.gain_rate),
                    gain_rate_over_omega0: None,
                })
                .collect()
        };
        out.noise.channels_p = echo(&resolved.noise.channels_p);
        out.noise.channels_i = echo(&resolved.noise.channels_i);
        out.grids.pulse_index = Some(resolved.pulse_index);
        out
    }
}

impl ChannelSection {
    fn to_channel(&self, omega0: f64) -> CliResult<NoiseChannel> {
        let pick = |per_s: Option<f64>, over: Option<f64>, what: &str| match (per_s, over) {
            (Some(_), Some(_)) => Err(CliError::Scenario(format!(
                "channel '{}': give {what}_rate_per_s or {what}_rate_over_omega0, not both",
                self.label
            ))),
            (Some(r), None) => Ok(r),
            (None, Some(x)) => Ok(x * omega0),
            (None, None) => Ok(0.0),
        };
        let loss = pick(self.loss_rate_per_s, self.loss_rate_over_omega0, "loss")?;
        let gain = pick(self.gain_rate_per_s, self.gain_rate_over_omega0, "gain")?;
        NoiseChannel::new(self.label.clone(), loss, gain).map_err(CliError::scenario)
    }
}

impl RangeSection {
    fn to_grid(self) -> CliResult<TimeGrid> {
        TimeGrid::new(self.start, self.end, self.n_samples).map_err(CliError::scenario)
    }
}
