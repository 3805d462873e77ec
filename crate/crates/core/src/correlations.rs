//! Output-field observables at the far facet `x = L`: photon flux, first- and
//! second-order correlation functions, length sweeps and signal-to-noise.
//!
//! All output times are retarded by the transit time `tau = L / v_g`; times
//! before the first transit are rejected.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{minimal_length, NoiseModel, PhysicalConfig, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::noise::{noise_background, NoiseBackground};
use crate::propagator::{conversion_probability, Propagator, PropagatorCoefficients};
use crate::source::{input_g1, input_g2, input_rate, PulseTrainSpec};

/// Conversion of one pulse train through a crystal of fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionModel {
    config: PhysicalConfig,
    noise: NoiseModel,
    pulses: PulseTrainSpec,
    propagator: Propagator,
    tau: f64,
    coeffs: PropagatorCoefficients,
    p_i: f64,
    background: NoiseBackground,
}

impl ConversionModel {
    pub fn new(config: PhysicalConfig, noise: NoiseModel, pulses: PulseTrainSpec) -> Result<Self> {
        config.validate()?;
        noise.validate()?;
        pulses.validate()?;
        let propagator = Propagator::from_config(&config, &noise);
        let tau = config.transit_time();
        let coeffs = propagator.coefficients(tau)?;
        let p_i = conversion_probability(&coeffs);
        let background = noise_background(
            |y| {
                propagator
                    .coefficients(y)
                    .expect("quadrature nodes lie in [0, tau]")
            },
            &noise,
            tau,
        )?;
        Ok(Self {
            config,
            noise,
            pulses,
            propagator,
            tau,
            coeffs,
            p_i,
            background,
        })
    }

    pub fn config(&self) -> &PhysicalConfig {
        &self.config
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn pulses(&self) -> &PulseTrainSpec {
        &self.pulses
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn coefficients(&self) -> &PropagatorCoefficients {
        &self.coeffs
    }

    pub fn transit_time(&self) -> f64 {
        self.tau
    }

    pub fn conversion_probability(&self) -> f64 {
        self.p_i
    }

    pub fn background(&self) -> &NoiseBackground {
        &self.background
    }

    /// Time at which the center of pulse `j` reaches the output facet.
    pub fn arrival(&self, j: usize) -> f64 {
        self.pulses.center(j) + self.tau
    }

    /// A pulse away from the train edges, `floor(N / 2) + 1`.
    pub fn interior_pulse(&self) -> usize {
        self.pulses.n_pulses / 2 + 1
    }

    fn check(&self, t: f64) -> Result<()> {
        if t >= self.tau {
            Ok(())
        } else {
            Err(Error::PreTransit { t, tau: self.tau })
        }
    }

    /// `sin^2(omega0 tau) n_p(0, t - tau)`, lossless and noiseless.
    pub fn ideal_photon_rate(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let s = (self.config.coupling_omega0 * self.tau).sin();
        Ok(s * s * input_rate(&self.pulses, t - self.tau))
    }

    /// `p_i n_p(0, t - tau) + I(L; t, t)`.
    pub fn photon_rate(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.p_i * input_rate(&self.pulses, t - self.tau) + self.background.b0)
    }

    /// `p_i Re g1_p(0, t - tau, dt)`.
    pub fn g1_noiseless(&self, t: f64, dt: f64) -> Result<f64> {
        self.check(t)?;
        self.check(t + dt)?;
        Ok(self.p_i * input_g1(&self.pulses, t - self.tau, dt).re)
    }

    /// Non-normalized first-order correlation `Re <psi_i^+(L,t) psi_i(L,t+dt)>`.
    pub fn g1(&self, t: f64, dt: f64) -> Result<f64> {
        Ok(self.g1_noiseless(t, dt)? + self.background.at(dt))
    }

    /// Non-normalized second-order correlation, term by term.
    pub fn g2(&self, t: f64, dt: f64) -> Result<G2Terms> {
        self.check(t)?;
        self.check(t + dt)?;
        let p = self.p_i;
        let t_in = t - self.tau;
        let bg = &self.background;
        let signal = p * p * input_g2(&self.pulses, t_in, dt);
        let interference = 2.0 * p * (input_g1(&self.pulses, t_in, dt) * bg.at(-dt)).re;
        let signal_background =
            p * (input_rate(&self.pulses, t_in) + input_rate(&self.pulses, t_in + dt)) * bg.b0;
        let noise_noise = bg.at(dt) * bg.at(-dt);
        let background_sq = bg.b0 * bg.b0;
        Ok(G2Terms {
            signal,
            interference,
            signal_background,
            noise_noise,
            background_sq,
        })
    }

    /// Peak converted signal over background.
    pub fn snr(&self) -> SnrReport {
        let n_peak = (1..=self.pulses.n_pulses)
            .map(|j| input_rate(&self.pulses, self.pulses.center(j)))
            .fold(0.0, f64::max);
        let signal_peak = self.p_i * n_peak;
        let background = self.background.b0;
        let snr = if self.noise.has_gain() && background > 0.0 {
            signal_peak / background
        } else {
            f64::INFINITY
        };
        SnrReport {
            snr,
            signal_peak,
            background,
            conversion_probability: self.p_i,
        }
    }
}

/// The five contributions to `g2(L, t, dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Terms {
    /// `p_i^2 g2_p(0, t - tau, dt)`
    pub signal: f64,
    /// `2 p_i Re{g1_p(0, t - tau, dt) I(L; t + dt, t)}`
    pub interference: f64,
    /// `p_i (n_p(0, t - tau) + n_p(0, t + dt - tau)) I(L; t, t)`
    pub signal_background: f64,
    /// `I(L; t, t + dt) I(L; t + dt, t)`
    pub noise_noise: f64,
    /// `I(L; t, t)^2`
    pub background_sq: f64,
}

impl G2Terms {
    pub const NAMES: [&'static str; 5] = [
        "signal",
        "interference",
        "signal_background",
        "noise_noise",
        "background_sq",
    ];

    pub fn total(&self) -> f64 {
        self.signal
            + self.interference
            + self.signal_background
            + self.noise_noise
            + self.background_sq
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.signal,
            self.interference,
            self.signal_background,
            self.noise_noise,
            self.background_sq,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    /// `signal_peak / background`, infinite without gain.
    pub snr: f64,
    /// `p_i max_t n_p(0, t)` (1/s).
    pub signal_peak: f64,
    /// `I(L; t, t)` (1/s).
    pub background: f64,
    pub conversion_probability: f64,
}

pub fn compute_snr(
    cfg: &PhysicalConfig,
    pulses: &PulseTrainSpec,
    noise: &NoiseModel,
) -> Result<SnrReport> {
    Ok(ConversionModel::new(cfg.clone(), noise.clone(), *pulses)?.snr())
}

/// Dense-grid peak search around each pulse arrival with parabolic
/// refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakSearch {
    pub samples_per_sigma: usize,
    /// Half-width of the window around each arrival, in units of sigma.
    pub window_sigmas: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self {
            samples_per_sigma: 64,
            window_sigmas: 6.0,
        }
    }
}

impl PeakSearch {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_sigma < 2
            || !(self.window_sigmas.is_finite() && self.window_sigmas > 0.0)
        {
            return Err(invalid(
                "peak search needs >= 2 samples per sigma and a positive window",
            ));
        }
        Ok(())
    }

    /// Maximum of `f` over windows centered on every pulse arrival
    /// (`offset` is the transit time). Returns `(t, value)`.
    pub fn find<F>(&self, pulses: &PulseTrainSpec, offset: f64, f: F) -> Result<(f64, f64)>
    where
        F: Fn(f64) -> Result<f64>,
    {
        self.validate()?;
        let half = self.window_sigmas * pulses.sigma_t;
        let steps = (self.window_sigmas * self.samples_per_sigma as f64)
            .round()
            .max(1.0) as usize;
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for j in 1..=pulses.n_pulses {
            let c = pulses.center(j) + offset;
            let grid = TimeGrid::new((c - half).max(offset), c + half, 2 * steps + 1)?;
            let ts = grid.to_vec();
            let ys = ts.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
            let (k, &yk) = ys
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("grid is non-empty");
            let mut cand = (ts[k], yk);
            if k > 0 && k + 1 < ys.len() {
                let (y0, y1, y2) = (ys[k - 1], yk, ys[k + 1]);
                let denom = y0 - 2.0 * y1 + y2;
                if denom < 0.0 {
                    let shift = 0.5 * (y0 - y2) / denom;
                    let t_ref = ts[k] + shift * grid.dt();
                    let y_ref = f(t_ref)?;
                    if y_ref > cand.1 {
                        cand = (t_ref, y_ref);
                    }
                }
            }
            if cand.1 > best.1 {
                best = cand;
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    PhotonRate,
    G1,
    G2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Raw,
    /// Divided by the maximum of the lossless, noiseless prediction.
    RescaledToIdealMax,
    /// Divided by the maximum of the noiseless (lossy) prediction.
    RescaledToNoiselessMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Output time t (s).
    Time,
    /// Delay dt (s).
    Delay,
    /// Crystal length L (m).
    Length,
}

/// Sampled observable with its normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTrace {
    pub kind: TraceKind,
    pub axis_kind: AxisKind,
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    /// Divisor applied to the raw values (1 for raw traces).
    pub scale: f64,
    /// Named raw contributions sampled on the same axis.
    pub components: Vec<(String, Vec<f64>)>,
    pub metadata: BTreeMap<String, f64>,
}

impl CorrelationTrace {
    pub fn raw_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * self.scale).collect()
    }

    pub fn component(&self, name: &str) -> Option<&[f64]> {
        self.components
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

fn metadata(model: &ConversionModel) -> BTreeMap<String, f64> {
    let cfg = model.config();
    let mut m = BTreeMap::new();
    m.insert("crystal_length_m".into(), cfg.crystal_length);
    m.insert("coupling_omega0_rad_per_s".into(), cfg.coupling_omega0);
    m.insert("transit_time_s".into(), model.transit_time());
    m.insert(
        "conversion_probability".into(),
        model.conversion_probability(),
    );
    m.insert("background_per_s".into(), model.background().b0);
    m.insert("sigma_t_s".into(), model.pulses().sigma_t);
    m.insert("rep_period_s".into(), model.pulses().rep_period);
    m.insert("n_pulses".into(), model.pulses().n_pulses as f64);
    m
}

fn apply_scale(values: &mut [f64], scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!(
            "cannot rescale by non-positive maximum {scale}"
        )));
    }
    values.iter_mut().for_each(|v| *v /= scale);
    Ok(())
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `max_t n_i^ideal(L0, t)`, the reference for rate rescaling.
pub fn ideal_reference_peak(
    cfg: &PhysicalConfig,
    pulses: &PulseTrainSpec,
    search: &PeakSearch,
) -> Result<f64> {
    let l0 = minimal_length(cfg, 0)?;
    let model = ConversionModel::new(cfg.with_length(l0), NoiseModel::noiseless(), *pulses)?;
    Ok(search
        .find(pulses, model.transit_time(), |t| model.ideal_photon_rate(t))?
        .1)
}

/// Photon flux on a set of output times.
pub fn photon_rate_trace(
    model: &ConversionModel,
    times: &[f64],
    normalization: Normalization,
    search: &PeakSearch,
) -> Result<CorrelationTrace> {
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut values = times
        .iter()
        .map(|&t| model.photon_rate(t))
        .collect::<Result<Vec<_>>>()?;
    let signal = times
        .iter()
        .map(|&t| Ok(model.photon_rate(t)? - model.background().b0))
        .collect::<Result<Vec<_>>>()?;
    let scale = match normalization {
        Normalization::Raw => 1.0,
        Normalization::RescaledToIdealMax => {
            ideal_reference_peak(model.config(), model.pulses(), search)?
        }
        Normalization::RescaledToNoiselessMax => {
            search
                .find(model.pulses(), model.transit_time(), |t| {
                    Ok(model.photon_rate(t)? - model.background().b0)
                })?
                .1
        }
    };
    apply_scale(&mut values, scale)?;
    Ok(CorrelationTrace {
        kind: TraceKind::PhotonRate,
        axis_kind: AxisKind::Time,
        axis: times.to_vec(),
        values,
        normalization,
        scale,
        components: vec![
            ("signal".into(), signal),
            (
                "background".into(),
                vec![model.background().b0; times.len()],
            ),
        ],
        metadata: metadata(model),
    })
}

/// `g1(L, t, dt)` at fixed `t` over a set of delays.
pub fn g1_trace(
    model: &ConversionModel,
    t: f64,
    delays: &[f64],
    normalization: Normalization,
) -> Result<CorrelationTrace> {
    if delays.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let noiseless = delays
        .iter()
        .map(|&dt| model.g1_noiseless(t, dt))
        .collect::<Result<Vec<_>>>()?;
    let noise: Vec<f64> = delays.iter().map(|&dt| model.background().at(dt)).collect();
    let mut values: Vec<f64> = noiseless.iter().zip(&noise).map(|(a, b)| a + b).collect();
    let scale = match normalization {
        Normalization::Raw => 1.0,
        Normalization::RescaledToNoiselessMax => max_of(&noiseless),
        Normalization::RescaledToIdealMax => {
            let s = (model.config().coupling_omega0 * model.transit_time())
                .sin()
                .powi(2);
            s * max_of(&noiseless) / model.conversion_probability()
        }
    };
    apply_scale(&mut values, scale)?;
    let mut meta = metadata(model);
    meta.insert("t_s".into(), t);
    Ok(CorrelationTrace {
        kind: TraceKind::G1,
        axis_kind: AxisKind::Delay,
        axis: delays.to_vec(),
        values,
        normalization,
        scale,
        components: vec![("noiseless".into(), noiseless), ("noise".into(), noise)],
        metadata: meta,
    })
}

/// `g2(L, t, dt)` at fixed `t` over a set of delays, with its five terms.
pub fn g2_trace(
    model: &ConversionModel,
    t: f64,
    delays: &[f64],
    normalization: Normalization,
) -> Result<CorrelationTrace> {
    if delays.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let terms = delays
        .iter()
        .map(|&dt| model.g2(t, dt))
        .collect::<Result<Vec<_>>>()?;
    let mut values: Vec<f64> = terms.iter().map(G2Terms::total).collect();
    let signal: Vec<f64> = terms.iter().map(|g| g.signal).collect();
    let scale = match normalization {
        Normalization::Raw => 1.0,
        Normalization::RescaledToNoiselessMax => max_of(&signal),
        Normalization::RescaledToIdealMax => {
            let s = (model.config().coupling_omega0 * model.transit_time())
                .sin()
                .powi(4);
            let p = model.conversion_probability();
            s * max_of(&signal) / (p * p)
        }
    };
    apply_scale(&mut values, scale)?;
    let components = G2Terms::NAMES
        .iter()
        .enumerate()
        .map(|(k, name)| {
            (
                name.to_string(),
                terms.iter().map(|g| g.as_array()[k]).collect(),
            )
        })
        .collect();
    let mut meta = metadata(model);
    meta.insert("t_s".into(), t);
    Ok(CorrelationTrace {
        kind: TraceKind::G2,
        axis_kind: AxisKind::Delay,
        axis: delays.to_vec(),
        values,
        normalization,
        scale,
        components,
        metadata: meta,
    })
}

/// One crystal length of a sweep; rates are in units of
/// `max_t n_i^ideal(L0, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub length: f64,
    pub length_over_l0: f64,
    /// Lossless, noiseless peak rate.
    pub ideal: f64,
    /// Peak rate with gain channels switched off.
    pub lossy: f64,
    /// Peak rate of the full model.
    pub total: f64,
    /// Noise background of the full model.
    pub background: f64,
    /// Output time of the total-rate peak (s).
    pub t_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSweep {
    pub l0: f64,
    /// Rescaling reference (1/s).
    pub reference_peak: f64,
    pub rows: Vec<SweepRow>,
}

impl LengthSweep {
    pub fn trace(&self) -> CorrelationTrace {
        let col = |f: fn(&SweepRow) -> f64| self.rows.iter().map(f).collect::<Vec<f64>>();
        let mut meta = BTreeMap::new();
        meta.insert("l0_m".into(), self.l0);
        meta.insert("reference_peak_per_s".into(), self.reference_peak);
        CorrelationTrace {
            kind: TraceKind::PhotonRate,
            axis_kind: AxisKind::Length,
            axis: col(|r| r.length),
            values: col(|r| r.total),
            normalization: Normalization::RescaledToIdealMax,
            scale: self.reference_peak,
            components: vec![
                ("ideal".into(), col(|r| r.ideal)),
                ("lossy".into(), col(|r| r.lossy)),
                ("background".into(), col(|r| r.background)),
            ],
            metadata: meta,
        }
    }
}

/// Peak photon rate versus crystal length. Lengths are evaluated
/// independently (in parallel on the current rayon pool); row order follows
/// `lengths`.
pub fn sweep_length_rows(
    cfg: &PhysicalConfig,
    pulses: &PulseTrainSpec,
    noise: &NoiseModel,
    lengths: &[f64],
    search: &PeakSearch,
) -> Result<LengthSweep> {
    if lengths.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(bad) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(invalid(format!(
            "crystal lengths must be positive, got {bad}"
        )));
    }
    let l0 = minimal_length(cfg, 0)?;
    let reference_peak = ideal_reference_peak(cfg, pulses, search)?;
    let lossy_noise = noise.loss_only();
    let rows = lengths
        .par_iter()
        .map(|&length| {
            let at = cfg.with_length(length);
            let full = ConversionModel::new(at.clone(), noise.clone(), *pulses)?;
            let lossy = ConversionModel::new(at, lossy_noise.clone(), *pulses)?;
            let tau = full.transit_time();
            let ideal = search.find(pulses, tau, |t| full.ideal_photon_rate(t))?.1;
            let lossy_peak = search.find(pulses, tau, |t| lossy.photon_rate(t))?.1;
            let (t_peak, total) = search.find(pulses, tau, |t| full.photon_rate(t))?;
            Ok(SweepRow {
                length,
                length_over_l0: length / l0,
                ideal: ideal / reference_peak,
                lossy: lossy_peak / reference_peak,
                total: total / reference_peak,
                background: full.background().b0 / reference_peak,
                t_peak,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LengthSweep {
        l0,
        reference_peak,
        rows,
    })
}

/// Rescaled peak photon rate of the full model versus length.
pub fn sweep_length(
    cfg: &PhysicalConfig,
    pulses: &PulseTrainSpec,
    noise: &NoiseModel,
    lengths: &[f64],
) -> Result<CorrelationTrace> {
    Ok(sweep_length_rows(cfg, pulses, noise, lengths, &PeakSearch::default())?.trace())
}
