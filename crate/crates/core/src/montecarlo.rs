//! Seeded Monte Carlo verification of the analytic error budget and rate
//! scaling: write sequences, selective readout, elementary-link generation
//! and nested swap chains.
//!
//! Reproducibility contract: every estimator derives one RNG stream per
//! trial from the master seed and the trial index, and aggregates with
//! order-insensitive integer sums (or an index-ordered collect), so
//! results are bitwise identical for a given seed regardless of thread
//! count.
//!
//! Emission statistics: the detected-mode photon number per bin is
//! thermal (single-mode spontaneous Raman), and every detected-mode
//! photon counts as one heralding detection — the low-efficiency detector
//! limit, where a bin holding two photons is heralded twice as often.
//! Conditioned that way, the expected number of extra same-bin
//! excitations is exactly `2p`, the two-photon error convention the
//! budget formulas use. Reported error rates are mean noise-photon counts
//! per heralded readout (first order in p they are error probabilities),
//! which keeps them additive across bins like the closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::budget::{
    communication_time, error_budget, fiber_transmission, max_p_for_error,
    memory_recall_efficiency, mode_capacity, multimode_rate_scaling, EmissionParams,
    ProtocolParams,
};
use crate::error::{Error, Result};

/// Give up on a single swap after this many regeneration rounds and
/// report the configuration as non-terminating.
const MAX_SWAP_ATTEMPTS: u64 = 1_000_000;

/// Configuration for the conditional error-rate estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub em: EmissionParams,
    pub n_modes: u64,
    pub n_trials: u64,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(em: EmissionParams, n_modes: u64, n_trials: u64, seed: u64) -> Result<Self> {
        if n_modes < 1 {
            return Err(Error::invalid("n_modes must be >= 1"));
        }
        if n_trials < 1 {
            return Err(Error::invalid("n_trials must be >= 1"));
        }
        Ok(Self {
            em,
            n_modes,
            n_trials,
            seed,
        })
    }
}

/// Per-bin bookkeeping of one write sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinRecord {
    pub bin_index: usize,
    /// Photons emitted into the detected cavity mode.
    pub detected_stokes: u32,
    /// Atoms moved to the storage state by emissions into all other
    /// directions.
    pub unwanted_excitations: u32,
}

/// A Monte Carlo mean with its standard error and the paired closed-form
/// prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub analytic: f64,
}

/// Configuration for link and chain simulations. `swap_levels = 0` is a
/// single elementary link; level k spans `l0 * 2^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub protocol: ProtocolParams,
    pub em: EmissionParams,
    pub swap_levels: u32,
}

impl LinkConfig {
    pub fn new(protocol: ProtocolParams, em: EmissionParams, swap_levels: u32) -> Result<Self> {
        protocol.validate()?;
        let capacity = mode_capacity(&protocol);
        if protocol.n_modes > capacity {
            return Err(Error::invalid(format!(
                "n_modes {} exceeds the mode capacity {} of one communication window",
                protocol.n_modes, capacity
            )));
        }
        Ok(Self {
            protocol,
            em,
            swap_levels,
        })
    }

    /// Total span covered after all swap levels, meters.
    pub fn total_distance(&self) -> f64 {
        self.protocol.l0 * f64::from(2u32).powi(self.swap_levels as i32)
    }
}

/// One RNG stream per (master seed, trial index); streams are
/// cryptographically independent.
fn trial_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Thermal (geometric) photon number with the given mean.
fn sample_thermal(mean: f64, rng: &mut impl Rng) -> u32 {
    let q = mean / (1.0 + mean);
    let mut k = 0u32;
    while rng.random::<f64>() < q {
        k += 1;
    }
    k
}

/// Simulates one N-bin write sequence: per bin, a thermal detected-mode
/// photon count with mean `p` and a Poisson number of unwanted
/// excitations with mean `p/beta_s - p`.
pub fn simulate_write_sequence(cfg: &TrialConfig, rng: &mut impl Rng) -> Result<Vec<BinRecord>> {
    let lambda_unwanted = cfg.em.p / cfg.em.beta_s - cfg.em.p;
    if lambda_unwanted < 0.0 {
        return Err(Error::invalid(format!(
            "p/beta_s - p must be >= 0, got {lambda_unwanted}"
        )));
    }
    let poisson = if lambda_unwanted > 0.0 {
        Some(rand_distr::Poisson::new(lambda_unwanted).expect("lambda > 0"))
    } else {
        None
    };
    Ok((0..cfg.n_modes as usize)
        .map(|bin_index| BinRecord {
            bin_index,
            detected_stokes: sample_thermal(cfg.em.p, rng),
            unwanted_excitations: poisson.map_or(0, |d| d.sample(rng) as u32),
        })
        .collect())
}

/// Reads out the heralded bin. The retrieved photon itself is ideal here
/// (reconversion efficiency is composed separately); returned alongside
/// is the number of noise photons in the detected mode:
///
/// - every extra same-bin detected-mode excitation contributes
///   deterministically (it rephases with the heralded one), and
/// - each out-of-phase excitation from the other bins contributes with
///   probability `beta_as`. The heralded bin's own unwanted excitations
///   rephase into their own emission directions, so they are excluded.
///
/// A readout error event is `noise_photons >= 1`.
pub fn simulate_readout(
    records: &[BinRecord],
    target_bin: usize,
    em: &EmissionParams,
    rng: &mut impl Rng,
) -> Result<(bool, u64)> {
    let target = records.get(target_bin).ok_or(Error::IndexOutOfRange {
        index: target_bin,
        len: records.len(),
    })?;
    if target.detected_stokes == 0 {
        return Err(Error::invalid(format!(
            "readout requires a heralded bin; bin {target_bin} has no detected Stokes photon"
        )));
    }
    let same_bin_extra = u64::from(target.detected_stokes - 1);
    let out_of_phase: u64 = records
        .iter()
        .filter(|r| r.bin_index != target_bin)
        .map(|r| u64::from(r.unwanted_excitations))
        .sum();
    let cross_bin = if out_of_phase > 0 {
        rand_distr::Binomial::new(out_of_phase, em.beta_as)
            .expect("beta_as in (0, 1]")
            .sample(rng)
    } else {
        0
    };
    Ok((true, same_bin_extra + cross_bin))
}

/// Runs write + readout trials and returns the mean noise-photon count
/// per heralded readout (the conditional error rate, first order in p)
/// with its standard error, paired with [`error_budget`]'s total.
///
/// Each detected-mode photon is one heralding detection, so a sequence
/// contributes as many conditional readout samples as it has detected
/// photons; sequences with none contribute nothing.
pub fn estimate_error_rate(cfg: &TrialConfig) -> Result<RateEstimate> {
    // expected heralded readouts = trials * N * E[photons per bin]
    let expected = cfg.n_trials as f64 * cfg.n_modes as f64 * cfg.em.p;
    if expected < 100.0 {
        return Err(Error::InsufficientHeralds {
            expected,
            required: 100,
        });
    }

    let (heralds, sum, sum_sq) = (0..cfg.n_trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, u64, u128)> {
            let mut rng = trial_rng(cfg.seed, trial);
            let records = simulate_write_sequence(cfg, &mut rng)?;
            let mut acc = (0u64, 0u64, 0u128);
            for bin in 0..records.len() {
                for _ in 0..records[bin].detected_stokes {
                    let (_, noise) = simulate_readout(&records, bin, &cfg.em, &mut rng)?;
                    acc.0 += 1;
                    acc.1 += noise;
                    acc.2 += u128::from(noise) * u128::from(noise);
                }
            }
            Ok(acc)
        })
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;

    if heralds < 2 {
        return Err(Error::InsufficientHeralds {
            expected,
            required: 100,
        });
    }
    let (mean, std_error) = stats_from_sums(heralds, sum as u128, sum_sq);
    Ok(RateEstimate {
        mean,
        std_error,
        n_samples: heralds,
        analytic: error_budget(&cfg.em, cfg.n_modes).total,
    })
}

/// Exact mean and standard error from integer sums (deterministic
/// regardless of the order the sums were accumulated in).
fn stats_from_sums(n: u64, sum: u128, sum_sq: u128) -> (f64, f64) {
    let mean = sum as f64 / n as f64;
    // n*sum_sq >= sum^2 (Cauchy-Schwarz), and both fit u128 for our
    // count ranges, so the variance numerator is computed exactly
    let num = u128::from(n) * sum_sq - sum * sum;
    let var = num as f64 / (n as f64 * (n - 1) as f64);
    (mean, (var / n as f64).sqrt())
}

/// Per-window success probability and window duration of one elementary
/// link.
fn link_window(cfg: &LinkConfig) -> Result<(f64, f64)> {
    let window = communication_time(cfg.protocol.l0, cfg.protocol.fiber_speed);
    // photon travels to the midpoint station
    let p_attempt = cfg.em.p
        * fiber_transmission(cfg.protocol.l0 / 2.0, cfg.protocol.attenuation)
        * cfg.protocol.eta_detect;
    if p_attempt <= 0.0 {
        return Err(Error::NonTerminating(
            "attempt success probability is zero; the link would never herald".into(),
        ));
    }
    let p_win = 1.0
        - (1.0 - p_attempt).powi(
            i32::try_from(cfg.protocol.n_modes).map_err(|_| Error::invalid("n_modes too large"))?,
        );
    Ok((p_win, window))
}

fn elementary_link_windows(p_win: f64, rng: &mut impl Rng) -> u64 {
    let mut windows = 1u64;
    while rng.random::<f64>() >= p_win {
        windows += 1;
    }
    windows
}

/// Time until one elementary link heralds: a geometric number of
/// communication windows, each of duration `l0 / fiber_speed` holding all
/// N write attempts.
pub fn simulate_elementary_link(cfg: &LinkConfig, rng: &mut impl Rng) -> Result<f64> {
    if cfg.swap_levels != 0 {
        return Err(Error::invalid(
            "simulate_elementary_link requires swap_levels = 0",
        ));
    }
    let (p_win, window) = link_window(cfg)?;
    Ok(elementary_link_windows(p_win, rng) as f64 * window)
}

struct ChainContext {
    p_win: f64,
    window: f64,
    protocol: ProtocolParams,
}

fn chain_level(ctx: &ChainContext, level: u32, rng: &mut impl Rng) -> Result<f64> {
    if level == 0 {
        return Ok(elementary_link_windows(ctx.p_win, rng) as f64 * ctx.window);
    }
    let span = ctx.protocol.l0 * f64::from(2u32).powi(level as i32 - 1);
    let comm = communication_time(span, ctx.protocol.fiber_speed);
    let mut elapsed = 0.0;
    for _ in 0..MAX_SWAP_ATTEMPTS {
        let a = chain_level(ctx, level - 1, rng)?;
        let b = chain_level(ctx, level - 1, rng)?;
        elapsed += a.max(b) + comm;
        // the earlier link stores its excitation while waiting for the
        // later one and for the swap herald
        let storage = (a - b).abs() + comm;
        let success = ctx.protocol.eta_detect * memory_recall_efficiency(&ctx.protocol, storage);
        if rng.random::<f64>() < success {
            return Ok(elapsed);
        }
    }
    Err(Error::NonTerminating(format!(
        "swap at level {level} failed {MAX_SWAP_ATTEMPTS} times"
    )))
}

/// Time until end-to-end entanglement across `2^swap_levels` elementary
/// links. A level-k pair waits for its two sub-links, pays the herald
/// latency of half its span, and on swap failure regenerates both
/// sub-links from scratch.
pub fn simulate_chain(cfg: &LinkConfig, rng: &mut impl Rng) -> Result<f64> {
    if cfg.swap_levels < 1 {
        return Err(Error::invalid("simulate_chain requires swap_levels >= 1"));
    }
    let (p_win, window) = link_window(cfg)?;
    // analytic non-termination check: the most favorable storage time at
    // each level is the swap herald latency itself
    for level in 1..=cfg.swap_levels {
        let span = cfg.protocol.l0 * f64::from(2u32).powi(level as i32 - 1);
        let comm = communication_time(span, cfg.protocol.fiber_speed);
        let best = cfg.protocol.eta_detect * memory_recall_efficiency(&cfg.protocol, comm);
        if best <= 0.0 {
            return Err(Error::NonTerminating(format!(
                "swap success probability at level {level} is zero for every storage time"
            )));
        }
    }
    let ctx = ChainContext {
        p_win,
        window,
        protocol: cfg.protocol,
    };
    chain_level(&ctx, cfg.swap_levels, rng)
}

/// Mean elementary-link time over `trials` runs, paired with the
/// geometric-mean closed form `window / p_win`.
pub fn link_time_stats(cfg: &LinkConfig, trials: u64, seed: u64) -> Result<RateEstimate> {
    if trials < 1 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if cfg.swap_levels != 0 {
        return Err(Error::invalid("link statistics require swap_levels = 0"));
    }
    let (p_win, window) = link_window(cfg)?;
    let (sum_w, sum_w2) = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let w = elementary_link_windows(p_win, &mut trial_rng(seed, trial));
            (w, u128::from(w) * u128::from(w))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (mean_w, se_w) = if trials > 1 {
        stats_from_sums(trials, u128::from(sum_w), sum_w2)
    } else {
        (sum_w as f64, 0.0)
    };
    Ok(RateEstimate {
        mean: mean_w * window,
        std_error: se_w * window,
        n_samples: trials,
        analytic: window / p_win,
    })
}

/// Mean chain completion time over `trials` runs. No closed form is
/// reported (the paired analytic is NaN): swap success depends on the
/// random storage times through the memory decay.
pub fn chain_time_stats(cfg: &LinkConfig, trials: u64, seed: u64) -> Result<RateEstimate> {
    if trials < 1 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let times: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| simulate_chain(cfg, &mut trial_rng(seed, trial)))
        .collect::<Result<_>>()?;
    // sequential, index-ordered sums keep the f64 result thread-count
    // independent
    let mean = times.iter().sum::<f64>() / trials as f64;
    let std_error = if trials > 1 {
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(RateEstimate {
        mean,
        std_error,
        n_samples: trials,
        analytic: f64::NAN,
    })
}

/// One row of a rate sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n_modes: u64,
    /// Emission probability re-budgeted for this N.
    pub p: f64,
    pub mean_time_s: f64,
    pub time_std_error_s: f64,
    /// Monte Carlo entanglement rate, 1 / mean time.
    pub mc_rate_hz: f64,
    pub rate_std_error_hz: f64,
    /// Paired rate factor `N eps / (2 + (N-1) ratio)`.
    pub analytic_scaling: f64,
}

/// Sweeps the mode count: for each N the emission probability is
/// re-budgeted to keep the total error at epsilon, the elementary link is
/// simulated `trials` times per point, and the Monte Carlo rate is paired
/// with the closed-form scaling. Normalized to their N = 1 entries the
/// two columns agree in the linear regime `N * p_attempt << 1`.
pub fn rate_sweep(
    base: &LinkConfig,
    n_values: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if !(1..(1u64 << 40)).contains(&trials) {
        return Err(Error::invalid("trials must be in [1, 2^40)"));
    }
    let ratio = base.em.detection_ratio();
    let eps = base.protocol.epsilon;
    n_values
        .iter()
        .enumerate()
        .map(|(point, &n)| {
            if n < 1 {
                return Err(Error::invalid("every N in the sweep must be >= 1"));
            }
            let p = max_p_for_error(eps, n, ratio);
            let em = EmissionParams::new(p, base.em.beta_s, base.em.beta_as)?;
            let protocol = ProtocolParams {
                n_modes: n,
                ..base.protocol
            };
            let cfg = LinkConfig::new(protocol, em, 0)?;
            let (p_win, window) = link_window(&cfg)?;
            let (sum_w, sum_w2) = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    // disjoint stream ranges per sweep point
                    let stream = ((point as u64) << 40) | trial;
                    let w = elementary_link_windows(p_win, &mut trial_rng(seed, stream));
                    (w, u128::from(w) * u128::from(w))
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            let (mean_w, se_w) = if trials > 1 {
                stats_from_sums(trials, u128::from(sum_w), sum_w2)
            } else {
                (sum_w as f64, 0.0)
            };
            let mean_time = mean_w * window;
            let time_se = se_w * window;
            Ok(SweepPoint {
                n_modes: n,
                p,
                mean_time_s: mean_time,
                time_std_error_s: time_se,
                mc_rate_hz: 1.0 / mean_time,
                rate_std_error_hz: time_se / (mean_time * mean_time),
                analytic_scaling: multimode_rate_scaling(eps, n, ratio),
            })
        })
        .collect()
}

/// Speedup of N modes over single-mode operation at the same error
/// budget, `2N / (2 + (N-1) ratio)`.
pub fn speedup_vs_single_mode(epsilon: f64, n_modes: u64, ratio: f64) -> f64 {
    multimode_rate_scaling(epsilon, n_modes, ratio) / multimode_rate_scaling(epsilon, 1, ratio)
}
