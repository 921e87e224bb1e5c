//! Rate and error analytics for temporally multiplexed atomic-ensemble
//! quantum repeater links, with a microscopic spin-wave model and Monte
//! Carlo verification of the closed forms.
//!
//! The crate has four layers:
//!
//! - [`ensemble`] / [`spinwave`]: inhomogeneously broadened atoms, the
//!   controlled detuning-sign schedule, and the directional anti-Stokes
//!   emission amplitude with its echo at `2T - t_i`.
//! - [`budget`]: closed-form error budget `p (2 + (N-1) beta_as/beta_s)`,
//!   the multimode rate factor, cavity spectrum, fiber loss, and memory
//!   decay helpers.
//! - [`montecarlo`]: seeded, thread-count-independent simulation of write
//!   sequences, selective readout, and elementary-link / swap-chain
//!   entanglement generation, each paired with its analytic prediction.
//! - [`config`] / [`cli`]: JSON run configuration and the CSV-emitting
//!   subcommands behind the `dlcz-multiplex` binary.

pub mod budget;
pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod montecarlo;
pub mod spinwave;
pub mod vec3;

pub use budget::{Cavity, EmissionParams, ProtocolParams, SPEED_OF_LIGHT};
pub use ensemble::{Atom, Broadening, Ensemble, FieldSchedule, Geometry};
pub use error::{Error, Result};
pub use montecarlo::{BinRecord, LinkConfig, RateEstimate, TrialConfig};
pub use spinwave::{Amplitude, SpinWave};
