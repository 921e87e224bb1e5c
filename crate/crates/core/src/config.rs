//! Run configuration: a single flat JSON object with documented keys.
//! Unknown keys are rejected by name; omitted keys fall back to the
//! defaults below, which mirror the typical operating point (100 km
//! spacing, 0.2 dB/km fiber, 1 MHz broadening, finesse-100 cavity).

// Validators use `!(x > 0.0)`-style comparisons on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::budget::{Cavity, EmissionParams, ProtocolParams};
use crate::ensemble::{Broadening, Geometry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BroadeningKind {
    Uniform,
    Gaussian,
}

/// Everything a run needs, in one diff-able flat object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed; every estimator derives per-trial streams from it.
    pub seed: u64,
    /// Monte Carlo trials (per sweep point for `mc sweep`).
    pub trials: u64,
    /// Output path; stdout when absent.
    pub out: Option<String>,

    // protocol
    pub epsilon: f64,
    pub n_modes: u64,
    pub n_grid: Vec<u64>,
    pub l0_m: f64,
    pub fiber_speed_m_per_s: f64,
    pub attenuation_db_per_km: f64,
    pub gamma_inh_hz: f64,
    pub eta_detect: f64,
    pub eta_memory0: f64,
    pub tau_fast_s: f64,
    pub tau_slow_s: f64,
    pub memory_weight_fast: f64,
    pub swap_levels: u32,

    // emission and cavity
    pub p: f64,
    pub beta_s: f64,
    /// Detected anti-Stokes fraction; defaults to `beta_s / finesse`
    /// (the cavity enhances Stokes collection only).
    pub beta_as: Option<f64>,
    pub cavity_length_m: f64,
    pub finesse: f64,

    // microscopic ensemble
    pub n_atoms: usize,
    pub ensemble_length_m: f64,
    pub ensemble_radius_m: f64,
    pub broadening: BroadeningKind,
    pub k_magnitude_rad_per_m: f64,

    // dephase time series
    pub dephase_wave_times_s: Vec<f64>,
    pub dephase_flip_time_s: f64,
    pub dephase_t_end_s: f64,
    pub dephase_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            trials: 100_000,
            out: None,
            epsilon: 0.01,
            n_modes: 10,
            n_grid: vec![1, 10, 100, 500],
            l0_m: 1.0e5,
            fiber_speed_m_per_s: 2.0e8,
            attenuation_db_per_km: 0.2,
            gamma_inh_hz: 1.0e6,
            eta_detect: 0.5,
            eta_memory0: 0.5,
            tau_fast_s: 2.4e-3,
            tau_slow_s: 0.24,
            memory_weight_fast: 0.5,
            swap_levels: 1,
            p: 1.0e-2,
            beta_s: 1.0e-4,
            beta_as: None,
            cavity_length_m: 0.03,
            finesse: 100.0,
            n_atoms: 10_000,
            ensemble_length_m: 1.0e-2,
            ensemble_radius_m: 1.0e-3,
            broadening: BroadeningKind::Uniform,
            k_magnitude_rad_per_m: std::f64::consts::TAU / 795.0e-9,
            dephase_wave_times_s: vec![1.0e-6, 2.0e-6, 3.0e-6],
            dephase_flip_time_s: 1.0e-5,
            dephase_t_end_s: 2.0e-5,
            dephase_samples: 401,
        }
    }
}

impl RunConfig {
    /// Parses a config from JSON and fills derived defaults. Unknown keys
    /// are rejected with the offending key name.
    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str::<RunConfig>(s).map(RunConfig::resolved)
    }

    /// Fills derived defaults so the serialized form is self-describing.
    pub fn resolved(mut self) -> Self {
        if self.beta_as.is_none() {
            self.beta_as = Some(self.beta_s / self.finesse);
        }
        self
    }

    /// One-line canonical JSON of the full resolved configuration.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(&self.clone().resolved()).expect("config serializes")
    }

    pub fn effective_beta_as(&self) -> f64 {
        self.beta_as.unwrap_or(self.beta_s / self.finesse)
    }

    pub fn protocol(&self) -> ProtocolParams {
        ProtocolParams {
            epsilon: self.epsilon,
            n_modes: self.n_modes,
            l0: self.l0_m,
            fiber_speed: self.fiber_speed_m_per_s,
            attenuation: self.attenuation_db_per_km,
            gamma_inh: self.gamma_inh_hz,
            eta_detect: self.eta_detect,
            eta_memory0: self.eta_memory0,
            tau_fast: self.tau_fast_s,
            tau_slow: self.tau_slow_s,
            memory_weight_fast: self.memory_weight_fast,
        }
    }

    pub fn emission(&self) -> Result<EmissionParams> {
        EmissionParams::new(self.p, self.beta_s, self.effective_beta_as())
    }

    pub fn cavity(&self) -> Result<Cavity> {
        Cavity::new(self.cavity_length_m, self.finesse)
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            length: self.ensemble_length_m,
            radius: self.ensemble_radius_m,
        }
    }

    pub fn broadening_spec(&self) -> Broadening {
        match self.broadening {
            BroadeningKind::Uniform => Broadening::Uniform {
                gamma_inh: self.gamma_inh_hz,
            },
            BroadeningKind::Gaussian => Broadening::Gaussian {
                gamma_inh: self.gamma_inh_hz,
            },
        }
    }

    /// Checks every nested invariant; called once at load time so the
    /// commands can assume a coherent configuration.
    pub fn validate(&self) -> Result<()> {
        self.protocol().validate()?;
        self.emission()?;
        self.cavity()?;
        self.geometry().validate()?;
        self.broadening_spec().validate()?;
        if self.trials < 1 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid must not be empty"));
        }
        if self.n_grid.iter().any(|&n| n < 1) {
            return Err(Error::invalid("every n_grid entry must be >= 1"));
        }
        if self.n_atoms < 2 {
            return Err(Error::invalid("n_atoms must be >= 2"));
        }
        if !(self.k_magnitude_rad_per_m > 0.0) {
            return Err(Error::invalid("k_magnitude_rad_per_m must be > 0"));
        }
        if self.dephase_samples < 2 {
            return Err(Error::invalid("dephase_samples must be >= 2"));
        }
        if !(self.dephase_flip_time_s > 0.0) {
            return Err(Error::invalid("dephase_flip_time_s must be > 0"));
        }
        if self.dephase_t_end_s <= self.dephase_flip_time_s {
            return Err(Error::invalid(
                "dephase_t_end_s must exceed dephase_flip_time_s",
            ));
        }
        if let Some(&t) = self
            .dephase_wave_times_s
            .iter()
            .find(|&&t| !(t >= 0.0 && t < self.dephase_flip_time_s))
        {
            return Err(Error::invalid(format!(
                "dephase wave time {t} must lie in [0, flip time)"
            )));
        }
        Ok(())
    }
}
