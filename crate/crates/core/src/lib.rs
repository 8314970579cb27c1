//! Media-based modulation (MBM) link simulator.
//!
//! The core is generic over the real scalar type; the aliases below pin it
//! to `f64` (and `f32` where that is enough).

pub mod channel;
pub mod config;
pub mod curve_io;
pub mod detect;
pub mod diversity;
pub mod engine;
pub mod error;
pub mod mapsel;
pub mod pccr;
pub mod scalar;
pub mod selftest;
pub mod signalset;
pub mod tcm;

pub use config::{Feedback, Scheme, SimConfig, StopRule};
pub use engine::{run_ber_sweep, run_ber_sweep_with, BerCurve, BerPoint, EngineOptions};
pub use error::{Error, Result};
pub use scalar::Real;

pub type SignalSetF64 = signalset::SignalSet<f64>;
pub type SignalSetF32 = signalset::SignalSet<f32>;
pub type ChannelMatrixF64 = channel::ChannelMatrix<f64>;
pub type ChannelMatrixF32 = channel::ChannelMatrix<f32>;
