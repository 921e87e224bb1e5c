//! CSV-emitting subcommand implementations behind the `dlcz-multiplex`
//! binary. Each command renders a complete output (header block plus data
//! rows) into a string; the binary decides where it goes.
//!
//! Output format: `#`-prefixed header lines carry the subcommand name,
//! master seed, the full resolved configuration, and any volatile
//! diagnostics (wall time). Data rows below the column line are a pure
//! function of (config, seed) — byte-identical across reruns and thread
//! counts.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::budget::{max_p_for_error, multimode_rate_scaling, purcell_ratio};
use crate::config::RunConfig;
use crate::ensemble::{Ensemble, FieldSchedule};
use crate::montecarlo::{
    chain_time_stats, estimate_error_rate, link_time_stats, rate_sweep, LinkConfig, TrialConfig,
};
use crate::spinwave::{anti_stokes_amplitude, rephasing_times, SpinWave};
use crate::vec3;

/// Failure classes map directly onto process exit codes: config 2,
/// runtime 3, io 4.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(#[from] crate::error::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Machine-parseable error record for stderr.
    pub fn to_json_record(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McKind {
    Error,
    Link,
    Chain,
    Sweep,
}

impl McKind {
    fn name(self) -> &'static str {
        match self {
            McKind::Error => "error",
            McKind::Link => "link",
            McKind::Chain => "chain",
            McKind::Sweep => "sweep",
        }
    }
}

fn header(cfg: &RunConfig, subcommand: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# dlcz-multiplex {subcommand}");
    let _ = writeln!(s, "# seed: {}", cfg.seed);
    let _ = writeln!(s, "# config: {}", cfg.to_canonical_json());
    s
}

/// Time series of the phase-matched readout intensity |A(-k_S, t)|^2 for
/// each configured spin wave across a write / flip / read timeline. The
/// analytic echo instants are echoed as header lines; cells before a
/// wave's creation are NaN.
pub fn render_dephase(cfg: &RunConfig) -> Result<String, CliError> {
    let ensemble = Ensemble::sample(cfg.n_atoms, cfg.geometry(), cfg.broadening_spec(), cfg.seed)?
        .with_schedule(FieldSchedule::single_flip(cfg.dephase_flip_time_s)?);

    let k = [0.0, 0.0, cfg.k_magnitude_rad_per_m];
    let waves: Vec<SpinWave> = cfg
        .dephase_wave_times_s
        .iter()
        .map(|&t| SpinWave::new(t, k, k))
        .collect();

    let mut out = header(cfg, "dephase");
    if !waves.is_empty() {
        for (i, echo) in rephasing_times(&waves, ensemble.schedule())?
            .iter()
            .enumerate()
        {
            let _ = writeln!(out, "# rephasing_time_wave_{i}: {echo}");
        }
    }

    let _ = write!(out, "t_s");
    for i in 0..waves.len() {
        let _ = write!(out, ",wave_{i}");
    }
    let _ = writeln!(out);
    if waves.is_empty() {
        return Ok(out);
    }

    let steps = cfg.dephase_samples;
    for i in 0..steps {
        let t = cfg.dephase_t_end_s * i as f64 / (steps - 1) as f64;
        let _ = write!(out, "{t}");
        for w in &waves {
            if t < w.creation_time {
                let _ = write!(out, ",NaN");
            } else {
                let a = anti_stokes_amplitude(&ensemble, w, vec3::neg(w.k_stokes), t)?;
                let _ = write!(out, ",{}", a.intensity());
            }
        }
        let _ = writeln!(out);
    }
    Ok(out)
}

/// Error budget and rate scaling over the configured N grid, using the
/// cavity's beta_s/beta_as = F ratio.
pub fn render_budget(cfg: &RunConfig) -> Result<String, CliError> {
    let cavity = cfg.cavity()?;
    let ratio = 1.0 / purcell_ratio(&cavity);
    let eps = cfg.epsilon;

    let mut out = header(cfg, "budget");
    for &n in &cfg.n_grid {
        if n as f64 > 5.0 * cavity.finesse {
            let _ = writeln!(
                out,
                "# note: N={n} exceeds 5*F={}; multimode speedup is saturating",
                5.0 * cavity.finesse
            );
        }
    }
    let _ = writeln!(
        out,
        "N,p_max,err_same_bin,err_cross_bin,err_total,rate_scaling,speedup_vs_N1"
    );

    let rate_n1 = multimode_rate_scaling(eps, 1, ratio);
    for &n in &cfg.n_grid {
        let p_max = max_p_for_error(eps, n, ratio);
        let same = 2.0 * p_max;
        let cross = (n - 1) as f64 * p_max * ratio;
        let rate = multimode_rate_scaling(eps, n, ratio);
        let _ = writeln!(
            out,
            "{n},{p_max},{same},{cross},{},{rate},{}",
            same + cross,
            rate / rate_n1
        );
    }
    Ok(out)
}

/// Runs one of the Monte Carlo estimators and writes its mean, standard
/// error, paired analytic value and trial count. Wall time goes into the
/// header so the data rows stay deterministic.
pub fn render_mc(cfg: &RunConfig, kind: McKind) -> Result<String, CliError> {
    let started = Instant::now();
    let em = cfg.emission()?;
    let mut rows = String::new();

    match kind {
        McKind::Error => {
            let trial = TrialConfig::new(em, cfg.n_modes, cfg.trials, cfg.seed)?;
            let est = estimate_error_rate(&trial)?;
            let _ = writeln!(
                rows,
                "error,{},{},{},{},{}",
                cfg.n_modes, est.mean, est.std_error, est.analytic, cfg.trials
            );
        }
        McKind::Link => {
            let link = LinkConfig::new(cfg.protocol(), em, 0)?;
            let est = link_time_stats(&link, cfg.trials, cfg.seed)?;
            let _ = writeln!(
                rows,
                "link,{},{},{},{},{}",
                cfg.n_modes, est.mean, est.std_error, est.analytic, cfg.trials
            );
        }
        McKind::Chain => {
            if cfg.swap_levels < 1 {
                return Err(CliError::Config(
                    "mc chain requires swap_levels >= 1".into(),
                ));
            }
            let link = LinkConfig::new(cfg.protocol(), em, cfg.swap_levels)?;
            let est = chain_time_stats(&link, cfg.trials, cfg.seed)?;
            let _ = writeln!(
                rows,
                "chain,{},{},{},{},{}",
                cfg.n_modes, est.mean, est.std_error, est.analytic, cfg.trials
            );
        }
        McKind::Sweep => {
            let base = LinkConfig::new(cfg.protocol(), em, 0)?;
            for point in rate_sweep(&base, &cfg.n_grid, cfg.trials, cfg.seed)? {
                let _ = writeln!(
                    rows,
                    "sweep,{},{},{},{},{}",
                    point.n_modes,
                    point.mc_rate_hz,
                    point.rate_std_error_hz,
                    point.analytic_scaling,
                    cfg.trials
                );
            }
        }
    }

    let mut out = header(cfg, &format!("mc {}", kind.name()));
    let _ = writeln!(out, "# wall_seconds: {}", started.elapsed().as_secs_f64());
    let _ = writeln!(out, "estimator,N,mean,std_error,analytic,trials");
    out.push_str(&rows);
    Ok(out)
}

/// The non-`#` portion of an output: column line plus data rows. This is
/// the part the determinism contract covers.
pub fn csv_body(rendered: &str) -> String {
    rendered
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> RunConfig {
        RunConfig {
            n_atoms: 400,
            dephase_samples: 201,
            trials: 20_000,
            n_grid: vec![1, 10, 100, 500],
            ..RunConfig::default()
        }
        .resolved()
    }

    #[test]
    fn dephase_peaks_land_on_the_echo_times() {
        let cfg = quick_cfg();
        let out = render_dephase(&cfg).unwrap();
        for (i, &t) in cfg.dephase_wave_times_s.iter().enumerate() {
            let echo = 2.0 * cfg.dephase_flip_time_s - t;
            assert!(
                out.contains(&format!("# rephasing_time_wave_{i}: {echo}")),
                "missing echo header for wave {i}"
            );
        }

        // the post-flip argmax of each wave column must sit at its echo
        // time (the column is also 1 at creation, before dephasing sets in)
        let body: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        let echoes = [1.9e-5, 1.8e-5, 1.7e-5];
        for (col, &echo) in echoes.iter().enumerate() {
            let mut best = (0.0f64, 0.0f64);
            for row in &body[1..] {
                let cells: Vec<&str> = row.split(',').collect();
                let t: f64 = cells[0].parse().unwrap();
                if t < cfg.dephase_flip_time_s {
                    continue;
                }
                let v: f64 = cells[col + 1].parse().unwrap_or(f64::NAN);
                if v > best.1 {
                    best = (t, v);
                }
            }
            let step = 2.0e-5 / 200.0;
            assert!(
                (best.0 - echo).abs() <= step + 1e-12,
                "wave {col} peaks at {} not {echo}",
                best.0
            );
            assert!(best.1 > 0.9, "wave {col} echo intensity {}", best.1);
        }
    }

    #[test]
    fn dephase_empty_waves_is_header_only() {
        let cfg = RunConfig {
            dephase_wave_times_s: vec![],
            ..quick_cfg()
        };
        let out = render_dephase(&cfg).unwrap();
        let body: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["t_s"]);
    }

    #[test]
    fn dephase_is_reproducible() {
        let cfg = quick_cfg();
        assert_eq!(render_dephase(&cfg).unwrap(), render_dephase(&cfg).unwrap());
    }

    #[test]
    fn budget_defaults_match_closed_forms() {
        let out = render_budget(&quick_cfg()).unwrap();
        let last = out.lines().last().unwrap();
        let cells: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
        // N = 500, eps = 0.01, F = 100
        assert_eq!(cells[0], 500.0);
        assert!((cells[1] - 0.01 / 6.99).abs() < 1e-12);
        assert!((cells[5] - 0.7153).abs() < 1e-4);
        // the budgeted p makes the total land exactly on epsilon
        assert!((cells[4] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn budget_free_space_total_is_n_plus_one_p() {
        let cfg = RunConfig {
            finesse: 1.0,
            ..quick_cfg()
        }
        .resolved();
        let out = render_budget(&cfg).unwrap();
        for line in out.lines().filter(|l| !l.starts_with('#')).skip(1) {
            let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            let (n, p_max, total) = (cells[0], cells[1], cells[4]);
            assert!((total - (n + 1.0) * p_max).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_single_mode_rate_is_half_epsilon() {
        let cfg = RunConfig {
            n_grid: vec![1],
            ..quick_cfg()
        };
        let out = render_budget(&cfg).unwrap();
        let cells: Vec<f64> = out
            .lines()
            .last()
            .unwrap()
            .split(',')
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(cells[5], 0.005);
        assert_eq!(cells[6], 1.0);
    }

    #[test]
    fn budget_flags_saturated_n() {
        let cfg = RunConfig {
            n_grid: vec![1, 1000],
            ..quick_cfg()
        };
        let out = render_budget(&cfg).unwrap();
        assert!(out.contains("# note: N=1000 exceeds 5*F=500"));
    }

    #[test]
    fn mc_link_certain_attempt_takes_one_window() {
        let cfg = RunConfig {
            p: 1.0,
            beta_s: 1.0,
            beta_as: Some(1.0),
            attenuation_db_per_km: 0.0,
            eta_detect: 1.0,
            n_modes: 1,
            trials: 10,
            ..RunConfig::default()
        };
        cfg.validate().unwrap();
        let out = render_mc(&cfg, McKind::Link).unwrap();
        let row = out.lines().last().unwrap();
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0], "link");
        assert_eq!(cells[2].parse::<f64>().unwrap(), 5.0e-4);
        assert_eq!(cells[4].parse::<f64>().unwrap(), 5.0e-4);
    }

    #[test]
    fn mc_error_row_matches_budget_pairing() {
        let cfg = RunConfig {
            beta_as: Some(1.0e-4),
            trials: 2_000_000,
            ..RunConfig::default()
        };
        let out = render_mc(&cfg, McKind::Error).unwrap();
        let cells: Vec<&str> = out.lines().last().unwrap().split(',').collect();
        let mean: f64 = cells[2].parse().unwrap();
        let analytic: f64 = cells[4].parse().unwrap();
        // (N+1) p with N = 10, p = 1e-2
        assert!((analytic - 0.11).abs() < 1e-12);
        let se: f64 = cells[3].parse().unwrap();
        assert!((mean - analytic).abs() <= 3.0 * se);
    }

    #[test]
    fn csv_bodies_are_thread_count_independent() {
        let cfg = RunConfig {
            trials: 30_000,
            ..RunConfig::default()
        };
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| render_mc(&cfg, McKind::Sweep))
                .unwrap()
        };
        assert_eq!(csv_body(&run(1)), csv_body(&run(6)));
    }

    #[test]
    fn error_records_are_machine_parseable() {
        let err = CliError::Config("bad key".into());
        let parsed: serde_json::Value = serde_json::from_str(&err.to_json_record()).unwrap();
        assert_eq!(parsed["error"]["kind"], "config");
        assert_eq!(parsed["error"]["code"], 2);
    }
}
