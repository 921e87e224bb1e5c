//! Collective spin-wave excitations and the directional anti-Stokes
//! emission amplitude they produce.
//!
//! A wave created at `t_i` dephases under inhomogeneous broadening and,
//! after a single detuning-sign flip at `T`, realigns at `2T - t_i`. At
//! that instant the emission amplitude toward the phase-matched direction
//! (`k_as = -k_stokes`) returns to unit magnitude.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::ensemble::{Ensemble, FieldSchedule};
use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// One collective excitation: when it was written and with which wave
/// vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinWave {
    /// Time of the heralding Stokes emission, seconds.
    pub creation_time: f64,
    /// Write-laser wave vector, rad/m.
    pub k_write: Vec3,
    /// Stokes-photon wave vector, rad/m.
    pub k_stokes: Vec3,
}

impl SpinWave {
    pub fn new(creation_time: f64, k_write: Vec3, k_stokes: Vec3) -> Self {
        Self {
            creation_time,
            k_write,
            k_stokes,
        }
    }

    /// The stored wave vector, k_write - k_stokes.
    pub fn stored_wave_vector(&self) -> Vec3 {
        vec3::sub(self.k_write, self.k_stokes)
    }
}

/// Normalized emission amplitude; magnitude 1 means perfect rephasing in
/// the phase-matched direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub value: Complex64,
}

impl Amplitude {
    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }

    /// |A|^2, the relative emission intensity.
    pub fn intensity(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// Anti-Stokes emission amplitude of `wave` in direction `k_as` at time
/// `t`, normalized by the atom number:
///
/// A = (1/N_A) sum_n exp(-i Phi_n(t_create, t)) exp(-i (k_as + k_stokes) . x_n)
///
/// where Phi_n is the accumulated temporal phase of atom n under the
/// ensemble's field schedule.
pub fn anti_stokes_amplitude(
    ensemble: &Ensemble,
    wave: &SpinWave,
    k_as: Vec3,
    t: f64,
) -> Result<Amplitude> {
    if t < wave.creation_time {
        return Err(Error::TemporalOrder(format!(
            "readout time {t} precedes creation time {}",
            wave.creation_time
        )));
    }
    let k_sum = vec3::add(k_as, wave.k_stokes);
    let signed_dt = ensemble.schedule().integrate_sign(wave.creation_time, t);
    let sum: Complex64 = ensemble
        .atoms()
        .iter()
        .map(|atom| {
            let phase = atom.detuning * signed_dt + vec3::dot(k_sum, atom.position);
            Complex64::from_polar(1.0, -phase)
        })
        .sum();
    Ok(Amplitude {
        value: sum / ensemble.n_atoms() as f64,
    })
}

/// Echo times `2T - t_i` for waves created before a single flip at `T`.
///
/// Schedules with zero or more than one flip are rejected; echo-train
/// sequencing is out of scope.
pub fn rephasing_times(waves: &[SpinWave], schedule: &FieldSchedule) -> Result<Vec<f64>> {
    let flips = schedule.flip_times();
    if flips.len() != 1 {
        return Err(Error::UnsupportedSchedule(format!(
            "rephasing requires exactly one flip, schedule has {}",
            flips.len()
        )));
    }
    let flip = flips[0];
    if let Some(w) = waves.iter().find(|w| w.creation_time >= flip) {
        return Err(Error::TemporalOrder(format!(
            "wave created at {} is not before the flip at {flip}",
            w.creation_time
        )));
    }
    Ok(waves.iter().map(|w| 2.0 * flip - w.creation_time).collect())
}

/// Phase-matched intensity |A(-k_stokes, t)|^2 divided by the mean
/// intensity over `n_probe` directions drawn uniformly on the sphere of
/// radius |k_stokes|. Large at an echo, near 1 when fully dephased.
pub fn directionality_ratio(
    ensemble: &Ensemble,
    wave: &SpinWave,
    t: f64,
    n_probe: usize,
    seed: u64,
) -> Result<f64> {
    if n_probe < 10 {
        return Err(Error::invalid(format!(
            "n_probe must be >= 10, got {n_probe}"
        )));
    }
    let peak = anti_stokes_amplitude(ensemble, wave, vec3::neg(wave.k_stokes), t)?.intensity();
    let k_mag = vec3::norm(wave.k_stokes);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut mean_off = 0.0;
    for _ in 0..n_probe {
        let dir: [f64; 3] = UnitSphere.sample(&mut rng);
        let k = vec3::scale(dir, k_mag);
        mean_off += anti_stokes_amplitude(ensemble, wave, k, t)?.intensity();
    }
    mean_off /= n_probe as f64;
    Ok(peak / mean_off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{Atom, Broadening, Geometry};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    const K_MAG: f64 = TAU / 795.0e-9;

    fn axial_wave(t: f64) -> SpinWave {
        SpinWave::new(t, [0.0, 0.0, K_MAG], [0.0, 0.0, K_MAG])
    }

    fn sample(n: usize, gamma: f64, seed: u64) -> Ensemble {
        Ensemble::sample(
            n,
            Geometry::default_pencil(),
            Broadening::Uniform { gamma_inh: gamma },
            seed,
        )
        .unwrap()
    }

    #[test]
    fn stored_wave_vector_accessor() {
        let w = SpinWave::new(0.0, [1.0, 2.0, 3.0], [0.5, 0.0, 3.0]);
        assert_eq!(w.stored_wave_vector(), [0.5, 2.0, 0.0]);
    }

    #[test]
    fn amplitude_is_one_at_creation_in_matched_direction() {
        let e = sample(200, 1.0e6, 5);
        let w = axial_wave(1.0e-6);
        let a = anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), w.creation_time).unwrap();
        assert_eq!(a.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn echo_restores_unit_magnitude() {
        let flip = 1.0e-5;
        let e = sample(10_000, 1.0e6, 23).with_schedule(FieldSchedule::single_flip(flip).unwrap());
        let w = axial_wave(2.0e-6);
        let t_echo = 2.0 * flip - w.creation_time;
        let a = anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), t_echo).unwrap();
        assert!(
            (a.magnitude() - 1.0).abs() < 1e-10,
            "|A| = {} at echo",
            a.magnitude()
        );
    }

    #[test]
    fn dephased_intensity_scales_as_inverse_atom_number() {
        // seed-averaged |A|^2 of a dephased wave vs the i.i.d.-phasor
        // brute-force oracle, both ~ 1/N
        let n = 10_000;
        let gamma = 1.0e6;
        let t = 25.0 / gamma; // sinc zero: E[e^{-iwt}] = 0 exactly
        let seeds = 200;

        let mut samples = Vec::with_capacity(seeds as usize);
        for seed in 0..seeds {
            let e = sample(n, gamma, 1000 + seed);
            let w = axial_wave(0.0);
            let a = anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), t).unwrap();
            samples.push(a.intensity());
        }
        let mean = samples.iter().sum::<f64>() / seeds as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
        let sigma = (var / seeds as f64).sqrt();
        let expect = 1.0 / n as f64;
        assert!(
            (mean - expect).abs() <= 3.0 * sigma,
            "mean {mean} vs 1/N {expect} (3 sigma {})",
            3.0 * sigma
        );

        // oracle: |mean of N i.i.d. unit phasors|^2 averaged over draws
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut oracle = 0.0;
        for _ in 0..seeds {
            let s: Complex64 = (0..n)
                .map(|_| Complex64::from_polar(1.0, rand::Rng::random_range(&mut rng, 0.0..TAU)))
                .sum();
            oracle += (s / n as f64).norm_sqr();
        }
        oracle /= seeds as f64;
        assert!((oracle - expect).abs() <= 3.0 * sigma.max(expect / 10.0));
    }

    #[test]
    fn amplitude_rejects_times_before_creation() {
        let e = sample(10, 1.0e6, 1);
        let w = axial_wave(1.0e-6);
        assert!(matches!(
            anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), 0.5e-6),
            Err(Error::TemporalOrder(_))
        ));
    }

    #[test]
    fn rephasing_times_pattern() {
        let waves: Vec<SpinWave> = [1.0e-6, 2.0e-6, 3.0e-6]
            .iter()
            .map(|&t| axial_wave(t))
            .collect();
        let sched = FieldSchedule::single_flip(1.0e-5).unwrap();
        let times = rephasing_times(&waves, &sched).unwrap();
        assert_eq!(times, vec![1.9e-5, 1.8e-5, 1.7e-5]);
    }

    #[test]
    fn rephasing_edge_cases() {
        let sched = FieldSchedule::single_flip(1.0e-5).unwrap();
        assert_eq!(rephasing_times(&[], &sched).unwrap(), Vec::<f64>::new());

        // wave created just before the flip rephases just after it
        let t_minus = 1.0e-5 - 1.0e-12;
        let times = rephasing_times(&[axial_wave(t_minus)], &sched).unwrap();
        assert_abs_diff_eq!(times[0], 1.0e-5 + 1.0e-12, epsilon = 1e-17);

        assert!(matches!(
            rephasing_times(&[axial_wave(0.0)], &FieldSchedule::constant()),
            Err(Error::UnsupportedSchedule(_))
        ));
        let two = FieldSchedule::new(vec![1.0e-5, 2.0e-5], 1).unwrap();
        assert!(matches!(
            rephasing_times(&[axial_wave(0.0)], &two),
            Err(Error::UnsupportedSchedule(_))
        ));
        // creation after the flip
        assert!(matches!(
            rephasing_times(&[axial_wave(2.0e-5)], &sched),
            Err(Error::TemporalOrder(_))
        ));
    }

    #[test]
    fn directionality_peaks_at_echo() {
        let n = 10_000;
        let flip = 1.0e-5;
        let mut ratios = Vec::new();
        for seed in 0..100 {
            let e = sample(n, 1.0e6, 7000 + seed)
                .with_schedule(FieldSchedule::single_flip(flip).unwrap());
            let w = axial_wave(1.0e-6);
            let t_echo = 2.0 * flip - w.creation_time;
            ratios.push(directionality_ratio(&e, &w, t_echo, 20, seed).unwrap());
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(
            mean > n as f64 / 2.0 && mean < n as f64 * 2.0,
            "mean ratio {mean} not within factor 2 of N = {n}"
        );
    }

    #[test]
    fn directionality_flat_when_dephased() {
        let n = 2_000;
        let gamma = 1.0e6;
        let t = 25.0 / gamma;
        let mut ratios = Vec::new();
        for seed in 0..100 {
            let e = sample(n, gamma, 3000 + seed);
            let w = axial_wave(0.0);
            ratios.push(directionality_ratio(&e, &w, t, 20, seed).unwrap());
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let var =
            ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64;
        let sigma = (var / ratios.len() as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * sigma,
            "mean ratio {mean}, 3 sigma {}",
            3.0 * sigma
        );
    }

    #[test]
    fn degenerate_two_atom_ensemble_has_no_contrast() {
        let pos = [0.0, 0.0, 1.0e-4];
        let atoms = vec![
            Atom {
                position: pos,
                detuning: 0.0,
            },
            Atom {
                position: pos,
                detuning: 0.0,
            },
        ];
        let e = Ensemble::from_atoms(atoms, Geometry::default_pencil(), FieldSchedule::constant())
            .unwrap();
        let w = axial_wave(0.0);
        let ratio = directionality_ratio(&e, &w, 1.0e-6, 10, 0).unwrap();
        assert_abs_diff_eq!(ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn probe_count_precondition() {
        let e = sample(10, 1.0e6, 0);
        let w = axial_wave(0.0);
        assert!(directionality_ratio(&e, &w, 1.0e-6, 9, 0).is_err());
    }

    #[test]
    fn distinct_waves_are_out_of_phase_at_each_others_echo() {
        // wave 2 created 1/gamma after wave 1 contributes only the 1/N
        // floor at wave 1's echo time
        let n = 2_000;
        let gamma = 1.0e6;
        let flip = 2.0e-5;
        let t1 = 2.0e-6;
        let t2 = t1 + 1.0 / gamma;
        let seeds = 150;
        let mut samples = Vec::new();
        for seed in 0..seeds {
            let e = sample(n, gamma, 5000 + seed)
                .with_schedule(FieldSchedule::single_flip(flip).unwrap());
            let w2 = axial_wave(t2);
            let echo1 = 2.0 * flip - t1;
            samples.push(
                anti_stokes_amplitude(&e, &w2, vec3::neg(w2.k_stokes), echo1)
                    .unwrap()
                    .intensity(),
            );
        }
        let mean = samples.iter().sum::<f64>() / seeds as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
        let sigma = (var / seeds as f64).sqrt();
        let expect = 1.0 / n as f64;
        assert!(
            (mean - expect).abs() <= 3.0 * sigma,
            "mean {mean} vs {expect} (3 sigma {})",
            3.0 * sigma
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // |A| never exceeds 1 (up to accumulated rounding)
        #[test]
        fn amplitude_magnitude_bounded(
            seed in 0u64..1000,
            n in 2usize..300,
            t in 0.0..1e-4f64,
            flip_at in prop::option::of(1e-7..5e-5f64),
        ) {
            let mut e = sample(n, 1.0e6, seed);
            if let Some(f) = flip_at {
                e = e.with_schedule(FieldSchedule::single_flip(f).unwrap());
            }
            let w = axial_wave(0.0);
            let a = anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), t).unwrap();
            prop_assert!(a.magnitude() <= 1.0 + 1e-10);
        }

        // echo exactness for arbitrary single-flip schedules
        #[test]
        fn echo_exactness_property(
            seed in 0u64..500,
            t_create in 0.0..9e-6f64,
            flip in 1e-5..2e-5f64,
        ) {
            let e = sample(500, 1.0e6, seed)
                .with_schedule(FieldSchedule::single_flip(flip).unwrap());
            let w = axial_wave(t_create);
            let t_echo = 2.0 * flip - t_create;
            let a = anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), t_echo).unwrap();
            prop_assert!((a.magnitude() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn echo_report_relative_magnitudes() {
        // sanity: intensity at the echo dominates intensity slightly off it
        let flip = 1.0e-5;
        let e = sample(5_000, 1.0e6, 77).with_schedule(FieldSchedule::single_flip(flip).unwrap());
        let w = axial_wave(1.0e-6);
        let t_echo = 2.0 * flip - w.creation_time;
        let at_echo = anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), t_echo)
            .unwrap()
            .intensity();
        let off = anti_stokes_amplitude(&e, &w, vec3::neg(w.k_stokes), t_echo + 20.0 / 1.0e6)
            .unwrap()
            .intensity();
        assert_relative_eq!(at_echo, 1.0, max_relative = 1e-9);
        assert!(off < 0.05);
    }
}
