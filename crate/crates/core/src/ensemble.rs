//! Microscopic ensemble model: atom positions, inhomogeneous detunings,
//! and the field-sign schedule that drives reversible spin-wave dephasing.
//!
//! An [`Ensemble`] is immutable after construction and safe to share across
//! threads; every operation on it is a pure function of its inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// One Lambda atom: where it sits and how far its g-s transition is
/// detuned from the ensemble center frequency (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: Vec3,
    pub detuning: f64,
}

/// Pencil-shaped cylindrical cloud, axis along z, centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Cylinder length, meters.
    pub length: f64,
    /// Cylinder radius, meters.
    pub radius: f64,
}

impl Geometry {
    /// Typical cold-gas pencil: 10 mm long, 1 mm radius.
    pub fn default_pencil() -> Self {
        Geometry {
            length: 1.0e-2,
            radius: 1.0e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.radius > 0.0) {
            return Err(Error::invalid(format!(
                "geometry must have positive length and radius, got {} x {}",
                self.length, self.radius
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p[2].abs() <= self.length / 2.0 && (p[0] * p[0] + p[1] * p[1]) <= self.radius * self.radius
    }
}

/// Detuning distribution of the broadened spin transition.
///
/// `gamma_inh` is the width in Hz. A linear field gradient across a
/// uniform cloud gives a uniform detuning distribution, so `Uniform`
/// spans [-pi*gamma_inh, +pi*gamma_inh] rad/s (full width gamma_inh in
/// frequency units). `Gaussian` uses gamma_inh as the FWHM. A zero width
/// is the unbroadened (delta) limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Broadening {
    Uniform { gamma_inh: f64 },
    Gaussian { gamma_inh: f64 },
}

impl Broadening {
    pub fn gamma_inh(&self) -> f64 {
        match *self {
            Broadening::Uniform { gamma_inh } | Broadening::Gaussian { gamma_inh } => gamma_inh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_inh() < 0.0 {
            return Err(Error::invalid(format!(
                "broadening width must be >= 0, got {}",
                self.gamma_inh()
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            Broadening::Uniform { gamma_inh } => {
                let half = std::f64::consts::PI * gamma_inh;
                if half == 0.0 {
                    0.0
                } else {
                    rng.random_range(-half..half)
                }
            }
            Broadening::Gaussian { gamma_inh } => {
                if gamma_inh == 0.0 {
                    0.0
                } else {
                    // FWHM -> sigma, in rad/s
                    let sigma = 2.0 * std::f64::consts::PI * gamma_inh
                        / (8.0 * std::f64::consts::LN_2).sqrt();
                    let dist = rand_distr::Normal::new(0.0, sigma).expect("sigma > 0");
                    rng.sample(dist)
                }
            }
        }
    }
}

/// Piecewise-constant sign of the controlled field gradient: starts at
/// `initial_sign` and toggles at each flip time.
///
/// Flips are instantaneous in the model; the physical validity condition
/// is a switching time much shorter than the communication window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSchedule {
    flip_times: Vec<f64>,
    initial_sign: i8,
}

impl FieldSchedule {
    pub fn new(flip_times: Vec<f64>, initial_sign: i8) -> Result<Self> {
        if initial_sign != 1 && initial_sign != -1 {
            return Err(Error::invalid(format!(
                "initial_sign must be +1 or -1, got {initial_sign}"
            )));
        }
        if !flip_times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("flip times must be strictly increasing"));
        }
        if flip_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("flip times must be finite"));
        }
        Ok(Self {
            flip_times,
            initial_sign,
        })
    }

    /// No flips, sign +1 forever.
    pub fn constant() -> Self {
        Self {
            flip_times: Vec::new(),
            initial_sign: 1,
        }
    }

    /// One flip at time `t`.
    pub fn single_flip(t: f64) -> Result<Self> {
        Self::new(vec![t], 1)
    }

    pub fn flip_times(&self) -> &[f64] {
        &self.flip_times
    }

    pub fn initial_sign(&self) -> i8 {
        self.initial_sign
    }

    /// Sign at time `t`; a flip takes effect at its own instant.
    pub fn sign_at(&self, t: f64) -> f64 {
        let flips_before = self.flip_times.iter().filter(|&&f| f <= t).count();
        if flips_before % 2 == 0 {
            self.initial_sign as f64
        } else {
            -(self.initial_sign as f64)
        }
    }

    /// Integral of sign(tau) over [t0, t1].
    pub fn integrate_sign(&self, t0: f64, t1: f64) -> f64 {
        debug_assert!(t0 <= t1);
        let mut acc = 0.0;
        let mut prev = t0;
        let mut sign = self.sign_at(t0);
        for &f in &self.flip_times {
            if f <= t0 {
                continue;
            }
            if f >= t1 {
                break;
            }
            acc += sign * (f - prev);
            prev = f;
            sign = -sign;
        }
        acc + sign * (t1 - prev)
    }
}

/// An immutable collection of atoms with a geometry and field schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    atoms: Vec<Atom>,
    geometry: Geometry,
    schedule: FieldSchedule,
    rng_seed: u64,
}

impl Ensemble {
    /// Draws `n_atoms` atoms with i.i.d. positions uniform in `geometry`
    /// and detunings from `broadening`. Same inputs give bit-identical
    /// ensembles. The schedule starts empty (constant +1 sign).
    pub fn sample(
        n_atoms: usize,
        geometry: Geometry,
        broadening: Broadening,
        seed: u64,
    ) -> Result<Self> {
        if n_atoms < 2 {
            return Err(Error::invalid(format!(
                "n_atoms must be >= 2, got {n_atoms}"
            )));
        }
        geometry.validate()?;
        broadening.validate()?;

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let atoms = (0..n_atoms)
            .map(|_| {
                // draw order is part of the reproducibility contract:
                // radius, angle, z, then detuning
                let r = geometry.radius * rng.random::<f64>().sqrt();
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let z = rng.random_range(-geometry.length / 2.0..geometry.length / 2.0);
                let position = [r * theta.cos(), r * theta.sin(), z];
                let detuning = broadening.sample(&mut rng);
                Atom { position, detuning }
            })
            .collect();

        Ok(Self {
            atoms,
            geometry,
            schedule: FieldSchedule::constant(),
            rng_seed: seed,
        })
    }

    /// Builds an ensemble from explicit atoms (degenerate configurations
    /// included). Positions must lie inside `geometry`.
    pub fn from_atoms(
        atoms: Vec<Atom>,
        geometry: Geometry,
        schedule: FieldSchedule,
    ) -> Result<Self> {
        if atoms.len() < 2 {
            return Err(Error::invalid("an ensemble needs at least 2 atoms"));
        }
        geometry.validate()?;
        if let Some(a) = atoms.iter().find(|a| !geometry.contains(a.position)) {
            return Err(Error::invalid(format!(
                "atom at {:?} lies outside the geometry",
                a.position
            )));
        }
        Ok(Self {
            atoms,
            geometry,
            schedule,
            rng_seed: 0,
        })
    }

    /// Returns a copy with the given field schedule installed.
    pub fn with_schedule(mut self, schedule: FieldSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn schedule(&self) -> &FieldSchedule {
        &self.schedule
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Temporal phase accumulated by atom `atom_index` between `t0` and
    /// `t1`: its detuning times the signed time integral of the schedule.
    pub fn accumulated_phase(&self, atom_index: usize, t0: f64, t1: f64) -> Result<f64> {
        if atom_index >= self.atoms.len() {
            return Err(Error::IndexOutOfRange {
                index: atom_index,
                len: self.atoms.len(),
            });
        }
        if t0 > t1 {
            return Err(Error::TemporalOrder(format!(
                "t0 ({t0}) must not exceed t1 ({t1})"
            )));
        }
        Ok(self.atoms[atom_index].detuning * self.schedule.integrate_sign(t0, t1))
    }
}
