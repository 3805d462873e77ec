use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("undriven medium: coupling omega0 must be positive")]
    UndrivenMedium,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pre-transit time: t = {t:e} s precedes the transit time tau = {tau:e} s")]
    PreTransit { t: f64, tau: f64 },

    #[error("no interior optimum: conversion probability is monotone for theta^2 = {theta_sq:e}")]
    NoInteriorOptimum { theta_sq: f64 },

    #[error("step size h = {h:e} exceeds the admissible bound {bound:e}")]
    StepSize { h: f64, bound: f64 },

    #[error("brute-force enumeration supports at most {max} pulses, got {got}")]
    TooManyPulses { got: usize, max: usize },

    #[error("empty grid")]
    EmptyGrid,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
