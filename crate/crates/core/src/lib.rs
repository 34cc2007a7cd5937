//! Baseband simulation library for OFDM-based joint radar sensing and
//! communication under transmitter/receiver IQ imbalance.
//!
//! The library covers three waveform constructions (standard OFDM and two
//! subcarrier-redundancy rules that trade random image leakage for
//! deterministic ghost objects), the radar range-Doppler processing chain,
//! a full communication receiver (effective-channel estimation, CPE
//! synchronization, conjugate-stacked LMMSE data estimation, soft-decision
//! Viterbi decoding), and Monte-Carlo experiment drivers for BER, PAPR and
//! radar ghost-geometry studies.

pub mod aliasing;
pub mod channel;
pub mod comm;
pub mod experiment;
pub mod fft;
pub mod grid;
pub mod impairments;
pub mod params;
pub mod radar;
pub mod waveform;
pub mod window;

use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subcarrier index {k} out of range for Nc = {nc}")]
    SubcarrierOutOfRange { k: i64, nc: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("IQ profile side mismatch: expected {expected}")]
    SideMismatch { expected: &'static str },
    #[error("zero transmit symbol at bin {bin}, symbol {symbol}: element-wise division undefined")]
    ZeroTransmitSymbol { bin: usize, symbol: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
