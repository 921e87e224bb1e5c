//! C ABI for the dlcz-multiplex library: closed-form budget analytics,
//! the microscopic ensemble model behind an opaque handle, and the seeded
//! Monte Carlo estimators.
//!
//! Conventions: every function returns a [`DlczStatus`]; results come
//! back through out-pointers, which are written only on `Ok`. Handles
//! from `dlcz_ensemble_sample` must be released with
//! `dlcz_ensemble_free`. All functions are thread-safe; an ensemble
//! handle may be shared across threads for read-only calls.
//!
//! Safety contract, shared by every pointer-taking function: pointer
//! arguments must be null or valid for the call (3-vector arguments must
//! point at three readable doubles, out-pointers at writable storage),
//! and ensemble handles must come from `dlcz_ensemble_sample` and not
//! have been freed. Null pointers are reported as
//! `DlczStatus::NullPointer`, never dereferenced.

// Validators use `!(x > 0.0)`-style comparisons on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// The pointer-safety contract is shared by the whole surface and lives in
// the module docs above.
#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, c_int};

use dlcz_multiplex::budget;
use dlcz_multiplex::ensemble::{Broadening, Ensemble, FieldSchedule, Geometry};
use dlcz_multiplex::error::Error;
use dlcz_multiplex::montecarlo;
use dlcz_multiplex::spinwave::{self, SpinWave};
use dlcz_multiplex::{EmissionParams, ProtocolParams};

/// Status codes returned by every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlczStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    TemporalOrder = 3,
    UnsupportedSchedule = 4,
    IndexOutOfRange = 5,
    InsufficientHeralds = 6,
    NonTerminating = 7,
}

impl From<&Error> for DlczStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => DlczStatus::InvalidParameter,
            Error::IndexOutOfRange { .. } => DlczStatus::IndexOutOfRange,
            Error::TemporalOrder(_) => DlczStatus::TemporalOrder,
            Error::UnsupportedSchedule(_) => DlczStatus::UnsupportedSchedule,
            Error::InsufficientHeralds { .. } => DlczStatus::InsufficientHeralds,
            Error::NonTerminating(_) => DlczStatus::NonTerminating,
        }
    }
}

/// Link-level protocol parameters (mirror of the Rust struct).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DlczProtocolParams {
    pub epsilon: f64,
    pub n_modes: u64,
    pub l0_m: f64,
    pub fiber_speed_m_per_s: f64,
    pub attenuation_db_per_km: f64,
    pub gamma_inh_hz: f64,
    pub eta_detect: f64,
    pub eta_memory0: f64,
    pub tau_fast_s: f64,
    pub tau_slow_s: f64,
    pub memory_weight_fast: f64,
}

impl DlczProtocolParams {
    fn to_rust(self) -> ProtocolParams {
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
}

/// Emission and collection fractions.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DlczEmissionParams {
    pub p: f64,
    pub beta_s: f64,
    pub beta_as: f64,
}

impl DlczEmissionParams {
    fn to_rust(self) -> Result<EmissionParams, DlczStatus> {
        EmissionParams::new(self.p, self.beta_s, self.beta_as).map_err(|e| DlczStatus::from(&e))
    }
}

/// A Monte Carlo mean, its standard error, the sample count, and the
/// paired closed-form value (NaN when none exists).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DlczRateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub analytic: f64,
}

/// Opaque ensemble handle.
pub struct DlczEnsemble {
    inner: Ensemble,
}

/// Detuning distribution selector for `dlcz_ensemble_sample`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlczBroadening {
    Uniform = 0,
    Gaussian = 1,
}

macro_rules! out_ptr {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => return DlczStatus::NullPointer,
        }
    };
}

macro_rules! in_ptr {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return DlczStatus::NullPointer,
        }
    };
}

fn read_vec3(ptr: *const f64) -> Option<[f64; 3]> {
    if ptr.is_null() {
        return None;
    }
    let s = unsafe { std::slice::from_raw_parts(ptr, 3) };
    Some([s[0], s[1], s[2]])
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dlcz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn dlcz_status_message(status: DlczStatus) -> *const c_char {
    let msg: &'static str = match status {
        DlczStatus::Ok => "ok\0",
        DlczStatus::NullPointer => "null pointer argument\0",
        DlczStatus::InvalidParameter => "invalid parameter\0",
        DlczStatus::TemporalOrder => "temporal order violated\0",
        DlczStatus::UnsupportedSchedule => "unsupported field schedule\0",
        DlczStatus::IndexOutOfRange => "index out of range\0",
        DlczStatus::InsufficientHeralds => "insufficient heralded events\0",
        DlczStatus::NonTerminating => "non-terminating simulation\0",
    };
    msg.as_ptr() as *const c_char
}

/// Same-bin, cross-bin, and total error probabilities for an N-mode
/// protocol: 2p, (N-1) p beta_as/beta_s, and their sum.
#[no_mangle]
pub unsafe extern "C" fn dlcz_error_budget(
    em: *const DlczEmissionParams,
    n_modes: u64,
    same_bin: *mut f64,
    cross_bin: *mut f64,
    total: *mut f64,
) -> DlczStatus {
    let em = *in_ptr!(em);
    let same = out_ptr!(same_bin);
    let cross = out_ptr!(cross_bin);
    let tot = out_ptr!(total);
    if n_modes < 1 {
        return DlczStatus::InvalidParameter;
    }
    let em = match em.to_rust() {
        Ok(em) => em,
        Err(status) => return status,
    };
    let b = budget::error_budget(&em, n_modes);
    *same = b.same_bin;
    *cross = b.cross_bin;
    *tot = b.total;
    DlczStatus::Ok
}

/// Largest detected-mode emission probability keeping the total error at
/// epsilon.
#[no_mangle]
pub unsafe extern "C" fn dlcz_max_p_for_error(
    epsilon: f64,
    n_modes: u64,
    ratio: f64,
    out: *mut f64,
) -> DlczStatus {
    let out = out_ptr!(out);
    if !(epsilon > 0.0 && epsilon < 1.0) || n_modes < 1 || !(ratio > 0.0 && ratio <= 1.0) {
        return DlczStatus::InvalidParameter;
    }
    *out = budget::max_p_for_error(epsilon, n_modes, ratio);
    DlczStatus::Ok
}

/// Multimode rate factor N eps / (2 + (N-1) ratio).
#[no_mangle]
pub unsafe extern "C" fn dlcz_multimode_rate_scaling(
    epsilon: f64,
    n_modes: u64,
    ratio: f64,
    out: *mut f64,
) -> DlczStatus {
    let out = out_ptr!(out);
    if !(epsilon > 0.0 && epsilon < 1.0) || n_modes < 1 || !(ratio > 0.0 && ratio <= 1.0) {
        return DlczStatus::InvalidParameter;
    }
    *out = budget::multimode_rate_scaling(epsilon, n_modes, ratio);
    DlczStatus::Ok
}

/// Number of time bins fitting one communication window.
#[no_mangle]
pub unsafe extern "C" fn dlcz_mode_capacity(
    l0_m: f64,
    fiber_speed_m_per_s: f64,
    gamma_inh_hz: f64,
    out: *mut u64,
) -> DlczStatus {
    let out = out_ptr!(out);
    if !(fiber_speed_m_per_s > 0.0) || !(l0_m >= 0.0) || !(gamma_inh_hz >= 0.0) {
        return DlczStatus::InvalidParameter;
    }
    *out = ((l0_m / fiber_speed_m_per_s) * gamma_inh_hz).floor() as u64;
    DlczStatus::Ok
}

/// Fiber power transmission over `length_m` at `attenuation_db_per_km`.
#[no_mangle]
pub unsafe extern "C" fn dlcz_fiber_transmission(
    length_m: f64,
    attenuation_db_per_km: f64,
    out: *mut f64,
) -> DlczStatus {
    let out = out_ptr!(out);
    if !(length_m >= 0.0) || !(attenuation_db_per_km >= 0.0) {
        return DlczStatus::InvalidParameter;
    }
    *out = budget::fiber_transmission(length_m, attenuation_db_per_km);
    DlczStatus::Ok
}

/// One-way classical communication time over `l0_m`.
#[no_mangle]
pub unsafe extern "C" fn dlcz_communication_time(
    l0_m: f64,
    fiber_speed_m_per_s: f64,
    out: *mut f64,
) -> DlczStatus {
    let out = out_ptr!(out);
    if !(fiber_speed_m_per_s > 0.0) || !(l0_m >= 0.0) {
        return DlczStatus::InvalidParameter;
    }
    *out = budget::communication_time(l0_m, fiber_speed_m_per_s);
    DlczStatus::Ok
}

/// Free spectral range and resonance width (Hz) of a cavity, plus the
/// beta_s/beta_as enhancement it provides (the finesse).
#[no_mangle]
pub unsafe extern "C" fn dlcz_cavity_spectrum(
    length_m: f64,
    finesse: f64,
    fsr_hz: *mut f64,
    peak_width_hz: *mut f64,
    purcell_ratio: *mut f64,
) -> DlczStatus {
    let fsr = out_ptr!(fsr_hz);
    let width = out_ptr!(peak_width_hz);
    let ratio = out_ptr!(purcell_ratio);
    let cavity = match budget::Cavity::new(length_m, finesse) {
        Ok(c) => c,
        Err(e) => return DlczStatus::from(&e),
    };
    let (f, w) = budget::cavity_spectrum(&cavity);
    *fsr = f;
    *width = w;
    *ratio = budget::purcell_ratio(&cavity);
    DlczStatus::Ok
}

/// Reconversion efficiency after `storage_time_s` of storage.
#[no_mangle]
pub unsafe extern "C" fn dlcz_memory_recall_efficiency(
    protocol: *const DlczProtocolParams,
    storage_time_s: f64,
    out: *mut f64,
) -> DlczStatus {
    let protocol = in_ptr!(protocol).to_rust();
    let out = out_ptr!(out);
    if let Err(e) = protocol.validate() {
        return DlczStatus::from(&e);
    }
    if !(storage_time_s >= 0.0) {
        return DlczStatus::InvalidParameter;
    }
    *out = budget::memory_recall_efficiency(&protocol, storage_time_s);
    DlczStatus::Ok
}

/// Samples an ensemble of `n_atoms` atoms in a pencil cylinder with the
/// given broadening. On success writes a handle that must be freed with
/// `dlcz_ensemble_free`.
#[no_mangle]
pub unsafe extern "C" fn dlcz_ensemble_sample(
    n_atoms: usize,
    length_m: f64,
    radius_m: f64,
    broadening: DlczBroadening,
    gamma_inh_hz: f64,
    seed: u64,
    out: *mut *mut DlczEnsemble,
) -> DlczStatus {
    let out = out_ptr!(out);
    let geometry = Geometry {
        length: length_m,
        radius: radius_m,
    };
    let spec = match broadening {
        DlczBroadening::Uniform => Broadening::Uniform {
            gamma_inh: gamma_inh_hz,
        },
        DlczBroadening::Gaussian => Broadening::Gaussian {
            gamma_inh: gamma_inh_hz,
        },
    };
    match Ensemble::sample(n_atoms, geometry, spec, seed) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(DlczEnsemble { inner }));
            DlczStatus::Ok
        }
        Err(e) => DlczStatus::from(&e),
    }
}

/// Installs a single detuning-sign flip at `flip_time_s`, replacing any
/// previous schedule.
#[no_mangle]
pub unsafe extern "C" fn dlcz_ensemble_set_single_flip(
    ensemble: *mut DlczEnsemble,
    flip_time_s: f64,
) -> DlczStatus {
    let handle = out_ptr!(ensemble);
    match FieldSchedule::single_flip(flip_time_s) {
        Ok(schedule) => {
            handle.inner = handle.inner.clone().with_schedule(schedule);
            DlczStatus::Ok
        }
        Err(e) => DlczStatus::from(&e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn dlcz_ensemble_n_atoms(
    ensemble: *const DlczEnsemble,
    out: *mut usize,
) -> DlczStatus {
    let handle = in_ptr!(ensemble);
    let out = out_ptr!(out);
    *out = handle.inner.n_atoms();
    DlczStatus::Ok
}

/// |A|^2 of the anti-Stokes emission in direction `k_as` at time `t_s`
/// for a spin wave created at `creation_time_s` with Stokes wave vector
/// `k_stokes` (both 3-vectors, rad/m).
#[no_mangle]
pub unsafe extern "C" fn dlcz_anti_stokes_intensity(
    ensemble: *const DlczEnsemble,
    creation_time_s: f64,
    k_stokes: *const f64,
    k_as: *const f64,
    t_s: f64,
    out: *mut f64,
) -> DlczStatus {
    let handle = in_ptr!(ensemble);
    let out = out_ptr!(out);
    let (Some(k_stokes), Some(k_as)) = (read_vec3(k_stokes), read_vec3(k_as)) else {
        return DlczStatus::NullPointer;
    };
    let wave = SpinWave::new(creation_time_s, k_stokes, k_stokes);
    match spinwave::anti_stokes_amplitude(&handle.inner, &wave, k_as, t_s) {
        Ok(a) => {
            *out = a.intensity();
            DlczStatus::Ok
        }
        Err(e) => DlczStatus::from(&e),
    }
}

/// Phase-matched intensity over the mean intensity across `n_probe`
/// random directions.
#[no_mangle]
pub unsafe extern "C" fn dlcz_directionality_ratio(
    ensemble: *const DlczEnsemble,
    creation_time_s: f64,
    k_stokes: *const f64,
    t_s: f64,
    n_probe: usize,
    seed: u64,
    out: *mut f64,
) -> DlczStatus {
    let handle = in_ptr!(ensemble);
    let out = out_ptr!(out);
    let Some(k_stokes) = read_vec3(k_stokes) else {
        return DlczStatus::NullPointer;
    };
    let wave = SpinWave::new(creation_time_s, k_stokes, k_stokes);
    match spinwave::directionality_ratio(&handle.inner, &wave, t_s, n_probe, seed) {
        Ok(r) => {
            *out = r;
            DlczStatus::Ok
        }
        Err(e) => DlczStatus::from(&e),
    }
}

/// Releases a handle from `dlcz_ensemble_sample`. Passing NULL is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn dlcz_ensemble_free(ensemble: *mut DlczEnsemble) {
    if !ensemble.is_null() {
        drop(unsafe { Box::from_raw(ensemble) });
    }
}

/// Monte Carlo conditional readout error rate paired with the analytic
/// budget total.
#[no_mangle]
pub unsafe extern "C" fn dlcz_estimate_error_rate(
    em: *const DlczEmissionParams,
    n_modes: u64,
    n_trials: u64,
    seed: u64,
    out: *mut DlczRateEstimate,
) -> DlczStatus {
    let em = *in_ptr!(em);
    let out = out_ptr!(out);
    let em = match em.to_rust() {
        Ok(em) => em,
        Err(status) => return status,
    };
    let cfg = match montecarlo::TrialConfig::new(em, n_modes, n_trials, seed) {
        Ok(cfg) => cfg,
        Err(e) => return DlczStatus::from(&e),
    };
    match montecarlo::estimate_error_rate(&cfg) {
        Ok(est) => {
            *out = DlczRateEstimate {
                mean: est.mean,
                std_error: est.std_error,
                n_samples: est.n_samples,
                analytic: est.analytic,
            };
            DlczStatus::Ok
        }
        Err(e) => DlczStatus::from(&e),
    }
}

/// Mean elementary-link generation time paired with the geometric
/// closed form.
#[no_mangle]
pub unsafe extern "C" fn dlcz_link_time_stats(
    protocol: *const DlczProtocolParams,
    em: *const DlczEmissionParams,
    trials: u64,
    seed: u64,
    out: *mut DlczRateEstimate,
) -> DlczStatus {
    let protocol = in_ptr!(protocol).to_rust();
    let em = *in_ptr!(em);
    let out = out_ptr!(out);
    let em = match em.to_rust() {
        Ok(em) => em,
        Err(status) => return status,
    };
    let cfg = match montecarlo::LinkConfig::new(protocol, em, 0) {
        Ok(cfg) => cfg,
        Err(e) => return DlczStatus::from(&e),
    };
    match montecarlo::link_time_stats(&cfg, trials, seed) {
        Ok(est) => {
            *out = DlczRateEstimate {
                mean: est.mean,
                std_error: est.std_error,
                n_samples: est.n_samples,
                analytic: est.analytic,
            };
            DlczStatus::Ok
        }
        Err(e) => DlczStatus::from(&e),
    }
}

/// Mean completion time of a nested swap chain (`swap_levels >= 1`); the
/// analytic field is NaN.
#[no_mangle]
pub unsafe extern "C" fn dlcz_chain_time_stats(
    protocol: *const DlczProtocolParams,
    em: *const DlczEmissionParams,
    swap_levels: c_int,
    trials: u64,
    seed: u64,
    out: *mut DlczRateEstimate,
) -> DlczStatus {
    let protocol = in_ptr!(protocol).to_rust();
    let em = *in_ptr!(em);
    let out = out_ptr!(out);
    if swap_levels < 1 {
        return DlczStatus::InvalidParameter;
    }
    let em = match em.to_rust() {
        Ok(em) => em,
        Err(status) => return status,
    };
    let cfg = match montecarlo::LinkConfig::new(protocol, em, swap_levels as u32) {
        Ok(cfg) => cfg,
        Err(e) => return DlczStatus::from(&e),
    };
    match montecarlo::chain_time_stats(&cfg, trials, seed) {
        Ok(est) => {
            *out = DlczRateEstimate {
                mean: est.mean,
                std_error: est.std_error,
                n_samples: est.n_samples,
                analytic: est.analytic,
            };
            DlczStatus::Ok
        }
        Err(e) => DlczStatus::from(&e),
    }
}
