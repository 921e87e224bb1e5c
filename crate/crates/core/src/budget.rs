//! Closed-form budget analytics for a temporally multiplexed ensemble
//! repeater link: cavity enhancement, per-bin excitation accounting, the
//! multimode error budget and rate scaling, plus fiber-loss, latency and
//! memory-decay helpers.
//!
//! Everything here is a pure stateless function; all the stochastic
//! verification lives in [`crate::montecarlo`].

// Validators use `!(x > 0.0)`-style comparisons on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Emission and collection fractions for one write/read pass.
///
/// `p` is the probability of emitting a Stokes photon into the detected
/// spatial mode per write pulse. `beta_s` and `beta_as` are the fractions
/// of all Stokes / anti-Stokes emissions that fall into that mode. Note
/// that `p / beta_s`, the mean number of atoms transferred per bin, is
/// usually much larger than one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionParams {
    pub p: f64,
    pub beta_s: f64,
    pub beta_as: f64,
}

impl EmissionParams {
    pub fn new(p: f64, beta_s: f64, beta_as: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("p must be in [0, 1], got {p}")));
        }
        if !(beta_s > 0.0 && beta_s <= 1.0) {
            return Err(Error::invalid(format!(
                "beta_s must be in (0, 1], got {beta_s}"
            )));
        }
        if !(beta_as > 0.0 && beta_as <= beta_s) {
            return Err(Error::invalid(format!(
                "beta_as must be in (0, beta_s]; got beta_as={beta_as}, beta_s={beta_s}"
            )));
        }
        if !(p / beta_s).is_finite() {
            return Err(Error::invalid("p/beta_s must be finite"));
        }
        Ok(Self { p, beta_s, beta_as })
    }

    /// beta_as / beta_s, the cross-bin suppression the budget formulas use.
    pub fn detection_ratio(&self) -> f64 {
        self.beta_as / self.beta_s
    }
}

/// An optical cavity resonant with the Stokes transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cavity {
    /// Cavity length, meters.
    pub length: f64,
    /// Finesse.
    pub finesse: f64,
}

impl Cavity {
    pub fn new(length: f64, finesse: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::invalid(format!(
                "cavity length must be > 0, got {length}"
            )));
        }
        if !(finesse >= 1.0) {
            return Err(Error::invalid(format!(
                "finesse must be >= 1, got {finesse}"
            )));
        }
        Ok(Self { length, finesse })
    }
}

/// Link-level protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Acceptable error probability per link.
    pub epsilon: f64,
    /// Number of temporal modes (write pulses per communication window).
    pub n_modes: u64,
    /// Node spacing, meters.
    pub l0: f64,
    /// Signal speed in fiber, m/s.
    pub fiber_speed: f64,
    /// Fiber attenuation, dB/km.
    pub attenuation: f64,
    /// Inhomogeneous width of the spin transition, Hz.
    pub gamma_inh: f64,
    /// Detector efficiency.
    pub eta_detect: f64,
    /// Zero-delay spin-wave reconversion efficiency.
    pub eta_memory0: f64,
    /// Decay constant of the fast (large wave vector) standing-wave
    /// component, seconds.
    pub tau_fast: f64,
    /// Decay constant of the slow component, seconds.
    pub tau_slow: f64,
    /// Intensity weight of the fast component; the slow component gets
    /// `1 - memory_weight_fast`.
    pub memory_weight_fast: f64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "epsilon must be in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.n_modes < 1 {
            return Err(Error::invalid("n_modes must be >= 1"));
        }
        if !(self.l0 >= 0.0) {
            return Err(Error::invalid("l0 must be >= 0"));
        }
        if !(self.fiber_speed > 0.0) {
            return Err(Error::invalid("fiber_speed must be > 0"));
        }
        if !(self.attenuation >= 0.0) {
            return Err(Error::invalid("attenuation must be >= 0"));
        }
        if !(self.gamma_inh >= 0.0) {
            return Err(Error::invalid("gamma_inh must be >= 0"));
        }
        for (name, eta) in [
            ("eta_detect", self.eta_detect),
            ("eta_memory0", self.eta_memory0),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid(format!(
                    "{name} must be in (0, 1], got {eta}"
                )));
            }
        }
        if !(self.tau_fast > 0.0 && self.tau_slow > 0.0) {
            return Err(Error::invalid("decay constants must be > 0"));
        }
        if self.tau_fast > self.tau_slow {
            return Err(Error::invalid(format!(
                "tau_fast ({}) must not exceed tau_slow ({})",
                self.tau_fast, self.tau_slow
            )));
        }
        if !(0.0..=1.0).contains(&self.memory_weight_fast) {
            return Err(Error::invalid("memory_weight_fast must be in [0, 1]"));
        }
        Ok(())
    }
}

/// The three pieces of the per-readout error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    /// Same-bin two-photon term, `2p`.
    pub same_bin: f64,
    /// Out-of-phase cross-bin term, `(N-1) p beta_as/beta_s`.
    pub cross_bin: f64,
    /// Sum of the two.
    pub total: f64,
}

/// Ratio of detected Stokes to detected anti-Stokes fractions provided by
/// a Stokes-resonant cavity: beta_s / beta_as = F.
pub fn purcell_ratio(cavity: &Cavity) -> f64 {
    cavity.finesse
}

/// Free spectral range and resonance peak width, both in Hz.
///
/// fsr = c/L, peak width = c/(L F); their ratio is the finesse.
pub fn cavity_spectrum(cavity: &Cavity) -> (f64, f64) {
    let fsr = SPEED_OF_LIGHT / cavity.length;
    let width = fsr / cavity.finesse;
    (fsr, width)
}

/// Mean number of atoms transferred to the storage state per time bin,
/// `p / beta_s`, first order in p and summed over all emission directions.
pub fn mean_unwanted_excitations(em: &EmissionParams) -> f64 {
    em.p / em.beta_s
}

/// Per-readout error budget for an N-mode protocol.
///
/// With `beta_as = beta_s` the total reduces to `(N+1) p`.
pub fn error_budget(em: &EmissionParams, n_modes: u64) -> ErrorBudget {
    assert!(n_modes >= 1, "n_modes must be >= 1");
    let same_bin = 2.0 * em.p;
    let cross_bin = (n_modes - 1) as f64 * em.p * em.detection_ratio();
    ErrorBudget {
        same_bin,
        cross_bin,
        total: same_bin + cross_bin,
    }
}

/// Largest detected-mode emission probability that keeps the total error
/// budget at `epsilon`: inverse of [`error_budget`]'s total.
pub fn max_p_for_error(epsilon: f64, n_modes: u64, ratio: f64) -> f64 {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0, 1)");
    assert!(n_modes >= 1, "n_modes must be >= 1");
    assert!(ratio > 0.0 && ratio <= 1.0, "ratio must be in (0, 1]");
    epsilon / (2.0 + (n_modes - 1) as f64 * ratio)
}

/// Dimensionless repeater-rate factor `N eps / (2 + (N-1) ratio)`.
///
/// Equals `n_modes * max_p_for_error(..)`; tends to `eps / ratio` for
/// large N and to `eps / 2` at N = 1.
pub fn multimode_rate_scaling(epsilon: f64, n_modes: u64, ratio: f64) -> f64 {
    n_modes as f64 * max_p_for_error(epsilon, n_modes, ratio)
}

/// Number of time bins that fit in one communication window,
/// `floor((l0 / fiber_speed) * gamma_inh)`.
pub fn mode_capacity(params: &ProtocolParams) -> u64 {
    assert!(params.fiber_speed > 0.0, "fiber_speed must be > 0");
    ((params.l0 / params.fiber_speed) * params.gamma_inh).floor() as u64
}

/// Fiber power transmission over `length` meters at `attenuation` dB/km.
pub fn fiber_transmission(length: f64, attenuation: f64) -> f64 {
    assert!(length >= 0.0, "length must be >= 0");
    assert!(attenuation >= 0.0, "attenuation must be >= 0");
    10f64.powf(-attenuation * (length / 1000.0) / 10.0)
}

/// One-way classical communication time over `l0` meters.
pub fn communication_time(l0: f64, fiber_speed: f64) -> f64 {
    assert!(fiber_speed > 0.0, "fiber_speed must be > 0");
    l0 / fiber_speed
}

/// Reconversion efficiency after `storage_time` seconds of storage.
///
/// The standing spin wave is a superposition of two counter-propagating
/// components with very different decay constants; the efficiency is the
/// weighted two-exponential decay of the zero-delay value.
pub fn memory_recall_efficiency(params: &ProtocolParams, storage_time: f64) -> f64 {
    assert!(storage_time >= 0.0, "storage_time must be >= 0");
    let w = params.memory_weight_fast;
    params.eta_memory0
        * (w * (-storage_time / params.tau_fast).exp()
            + (1.0 - w) * (-storage_time / params.tau_slow).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn em(p: f64, beta_s: f64, beta_as: f64) -> EmissionParams {
        EmissionParams::new(p, beta_s, beta_as).unwrap()
    }

    fn default_protocol() -> ProtocolParams {
        ProtocolParams {
            epsilon: 0.01,
            n_modes: 500,
            l0: 1.0e5,
            fiber_speed: 2.0e8,
            attenuation: 0.2,
            gamma_inh: 1.0e6,
            eta_detect: 0.5,
            eta_memory0: 0.5,
            tau_fast: 2.4e-3,
            tau_slow: 0.24,
            memory_weight_fast: 0.5,
        }
    }

    #[test]
    fn purcell_ratio_is_finesse() {
        assert_eq!(purcell_ratio(&Cavity::new(0.03, 93.0).unwrap()), 93.0);
        assert_eq!(purcell_ratio(&Cavity::new(0.03, 240.0).unwrap()), 240.0);
        assert_eq!(purcell_ratio(&Cavity::new(0.03, 1.0).unwrap()), 1.0);
    }

    #[test]
    fn cavity_spectrum_values() {
        let c = Cavity::new(0.03, 100.0).unwrap();
        let (fsr, width) = cavity_spectrum(&c);
        assert_relative_eq!(fsr, 9.993e9, max_relative = 1e-4);
        assert_relative_eq!(width, 9.993e7, max_relative = 1e-4);
        assert_relative_eq!(fsr / width, 100.0, max_relative = 1e-12);

        let halved = cavity_spectrum(&Cavity::new(0.06, 100.0).unwrap());
        assert_relative_eq!(halved.0, fsr / 2.0, max_relative = 1e-12);
        assert_relative_eq!(halved.1, width / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn cavity_validation() {
        assert!(Cavity::new(0.0, 100.0).is_err());
        assert!(Cavity::new(0.03, 0.5).is_err());
    }

    #[test]
    fn mean_unwanted_cases() {
        assert_relative_eq!(
            mean_unwanted_excitations(&em(1e-2, 1e-4, 1e-4)),
            100.0,
            max_relative = 1e-12
        );
        assert_eq!(mean_unwanted_excitations(&em(0.0, 1e-4, 1e-4)), 0.0);
        assert_eq!(mean_unwanted_excitations(&em(0.3, 1.0, 1.0)), 0.3);
    }

    #[test]
    fn emission_params_validation() {
        assert!(EmissionParams::new(-0.1, 1e-4, 1e-4).is_err());
        assert!(EmissionParams::new(1.5, 1e-4, 1e-4).is_err());
        assert!(EmissionParams::new(1e-2, 0.0, 1e-4).is_err());
        // beta_as may not exceed beta_s
        assert!(EmissionParams::new(1e-2, 1e-4, 2e-4).is_err());
        assert!(EmissionParams::new(1e-2, 1e-4, 0.0).is_err());
        // p > beta_s is the normal regime (p/beta_s ~ 100 excitations)
        assert!(EmissionParams::new(1e-2, 1e-4, 1e-5).is_ok());
    }

    #[test]
    fn error_budget_examples() {
        let b = error_budget(&em(1e-3, 1e-4, 1e-4), 100);
        assert_relative_eq!(b.total, 0.101, max_relative = 1e-12);

        let b = error_budget(&em(1e-3, 1e-4, 1e-6), 100);
        assert_relative_eq!(b.total, 2.99e-3, max_relative = 1e-12);

        let b = error_budget(&em(1e-3, 1e-4, 1e-6), 1);
        assert_eq!(b.cross_bin, 0.0);
        assert_relative_eq!(b.total, 2e-3, max_relative = 1e-12);
    }

    #[test]
    fn max_p_examples() {
        assert_relative_eq!(max_p_for_error(0.05, 1, 1.0), 0.025, max_relative = 1e-12);
        assert_relative_eq!(max_p_for_error(0.05, 99, 1.0), 5e-4, max_relative = 1e-12);
        assert_relative_eq!(
            max_p_for_error(0.01, 500, 0.01),
            0.01 / 6.99,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            max_p_for_error(0.01, 500, 0.01),
            1.431e-3,
            max_relative = 1e-3
        );
    }

    #[test]
    fn rate_scaling_endpoints() {
        assert_eq!(multimode_rate_scaling(0.01, 1, 0.01), 0.005);
        assert_relative_eq!(
            multimode_rate_scaling(0.01, 500, 0.01),
            5.0 / 6.99,
            max_relative = 1e-12
        );
        // asymptote eps * F, within 1% at N = 1e6 for F = 100
        let asymptote = 0.01 * 100.0;
        let r = multimode_rate_scaling(0.01, 1_000_000, 0.01);
        assert!((r - asymptote).abs() <= 0.01 * asymptote);
    }

    #[test]
    fn rate_scaling_asymptote_bound() {
        for finesse in [93.0, 100.0, 240.0] {
            let eps = 0.01;
            let n = (100.0 * finesse) as u64;
            let r = multimode_rate_scaling(eps, n, 1.0 / finesse);
            let bound = eps * finesse * (2.0 * finesse / n as f64);
            assert!(
                (r - eps * finesse).abs() <= bound,
                "F={finesse}: |{r} - {}| > {bound}",
                eps * finesse
            );
        }
    }

    #[test]
    fn rate_monotonic_in_n() {
        for &ratio in &[0.01, 0.1, 0.5, 1.0] {
            let mut prev = 0.0;
            for n in 1..=200 {
                let r = multimode_rate_scaling(0.01, n, ratio);
                assert!(r > prev, "not increasing at N={n}, ratio={ratio}");
                prev = r;
            }
        }
    }

    #[test]
    fn speedup_bounds() {
        // speedup vs N = 1 never exceeds 2F (ratio = 1/F), nor 2 at ratio = 1
        for finesse in [1.0, 10.0, 100.0, 240.0] {
            let ratio = 1.0 / finesse;
            for n in [1u64, 10, 100, 1000, 100_000] {
                let speedup =
                    multimode_rate_scaling(0.01, n, ratio) / multimode_rate_scaling(0.01, 1, ratio);
                assert!(speedup <= 2.0 * finesse + 1e-9);
            }
        }
    }

    #[test]
    fn mode_capacity_examples() {
        let mut p = default_protocol();
        assert_eq!(mode_capacity(&p), 500);
        p.gamma_inh = 0.0;
        assert_eq!(mode_capacity(&p), 0);
        p.gamma_inh = 3.0e6;
        assert_eq!(mode_capacity(&p), 1500);
    }

    #[test]
    fn fiber_transmission_examples() {
        assert_relative_eq!(fiber_transmission(1.0e6, 0.2), 1e-20, max_relative = 1e-12);
        assert_eq!(fiber_transmission(0.0, 0.2), 1.0);
        assert_relative_eq!(fiber_transmission(5.0e4, 0.2), 0.1, max_relative = 1e-12);
    }

    #[test]
    fn communication_time_examples() {
        assert_eq!(communication_time(1.0e5, 2.0e8), 5.0e-4);
        assert_eq!(communication_time(0.0, 2.0e8), 0.0);
        assert_relative_eq!(communication_time(2.0e5, 2.0e8), 1e-3, max_relative = 1e-15);
    }

    #[test]
    fn memory_recall_examples() {
        let mut p = default_protocol();
        assert_eq!(memory_recall_efficiency(&p, 0.0), 0.5);
        assert_eq!(memory_recall_efficiency(&p, 1e6), 0.0);

        p.tau_fast = 1.0;
        p.tau_slow = 100.0;
        let eff = memory_recall_efficiency(&p, 1.0);
        assert_relative_eq!(
            eff,
            0.25 * ((-1.0f64).exp() + (-0.01f64).exp()),
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(eff, 0.3395, epsilon = 1e-4);
    }

    #[test]
    fn protocol_validation() {
        let mut p = default_protocol();
        assert!(p.validate().is_ok());
        p.tau_fast = 1.0;
        p.tau_slow = 0.5;
        assert!(p.validate().is_err());
        p = default_protocol();
        p.epsilon = 0.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        // With beta_as = beta_s the total is exactly (N+1) p.
        #[test]
        fn reduction_identity(p in 0.0..=1.0f64, n in 1u64..10_000) {
            let b = error_budget(&em(p, 1e-4, 1e-4), n);
            let expect = (n + 1) as f64 * p;
            prop_assert!((b.total - expect).abs() <= 1e-12 * expect.max(1.0));
        }

        // error_budget(max_p_for_error(eps, N, r), N).total == eps
        #[test]
        fn budget_round_trip(
            eps in 1e-4..0.9f64,
            n in 1u64..5_000,
            ratio in 1e-3..=1.0f64,
        ) {
            let p = max_p_for_error(eps, n, ratio);
            let b = error_budget(&em(p, 1e-2, 1e-2 * ratio), n);
            prop_assert!((b.total - eps).abs() <= 1e-12);
        }

        // transmission is multiplicative in length
        #[test]
        fn transmission_multiplicative(a in 0.0..5e5f64, b in 0.0..5e5f64) {
            let lhs = fiber_transmission(a + b, 0.2);
            let rhs = fiber_transmission(a, 0.2) * fiber_transmission(b, 0.2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs));
        }
    }
}
