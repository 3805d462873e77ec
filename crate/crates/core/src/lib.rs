//! Single-photon frequency conversion in a continuously pumped chi(2)
//! crystal.
//!
//! A photon in the p band is converted to the i band by a strong classical
//! pump. Losses and Markovian gain enter through Heisenberg-Langevin terms;
//! the crate evaluates the closed-form propagator, the stationary noise flux,
//! and the photon rate and `g1` / `g2` correlation functions at the output
//! facet for a train of single-photon Gaussian pulses.
//!
//! Units are SI throughout: lengths in m, times in s, rates and couplings in
//! 1/s (rad/s for `omega0`), noise bandwidth in Hz.

pub mod config;
pub mod correlations;
pub mod error;
pub mod noise;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod source;

pub use config::{
    check_validity, effective_kappas, minimal_length, EffectiveRates, NoiseChannel, NoiseModel,
    PhysicalConfig, TimeGrid, ValidityCheck, ValidityReport, Verdict, DEFAULT_VALIDITY_THRESHOLD,
};
pub use correlations::{
    compute_snr, g1_trace, g2_trace, photon_rate_trace, sweep_length, sweep_length_rows,
    ConversionModel, CorrelationTrace, G2Terms, LengthSweep, Normalization, PeakSearch, SnrReport,
    SweepRow, TraceKind,
};
pub use error::{Error, Result};
pub use noise::{noise_background, noise_kernel, NoiseBackground, NoiseKernel};
pub use oracle::{
    brute_force_fock_correlators, rk4_propagator, FockCorrelators, ModeGrid, OdeSolution,
};
pub use propagator::{
    compute_theta, conversion_probability, optimal_tau, propagator_coeffs, Propagator,
    PropagatorCoefficients, Regime,
};
pub use source::{
    input_g1, input_g2, input_rate, pulse_envelope, Envelope, PulseTrainSpec, WidthConvention,
};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
