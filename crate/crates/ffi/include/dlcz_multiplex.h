#ifndef DLCZ_MULTIPLEX_H
#define DLCZ_MULTIPLEX_H

/* Generated by cbindgen from dlcz-multiplex-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every API call.
 */
typedef enum DlczStatus {
  DlczStatus_Ok = 0,
  DlczStatus_NullPointer = 1,
  DlczStatus_InvalidParameter = 2,
  DlczStatus_TemporalOrder = 3,
  DlczStatus_UnsupportedSchedule = 4,
  DlczStatus_IndexOutOfRange = 5,
  DlczStatus_InsufficientHeralds = 6,
  DlczStatus_NonTerminating = 7,
} DlczStatus;

/*
 Detuning distribution selector for `dlcz_ensemble_sample`.
 */
typedef enum DlczBroadening {
  DlczBroadening_Uniform = 0,
  DlczBroadening_Gaussian = 1,
} DlczBroadening;

/*
 Opaque ensemble handle.
 */
typedef struct DlczEnsemble DlczEnsemble;

/*
 Emission and collection fractions.
 */
typedef struct DlczEmissionParams {
  double p;
  double beta_s;
  double beta_as;
} DlczEmissionParams;

/*
 Link-level protocol parameters (mirror of the Rust struct).
 */
typedef struct DlczProtocolParams {
  double epsilon;
  uint64_t n_modes;
  double l0_m;
  double fiber_speed_m_per_s;
  double attenuation_db_per_km;
  double gamma_inh_hz;
  double eta_detect;
  double eta_memory0;
  double tau_fast_s;
  double tau_slow_s;
  double memory_weight_fast;
} DlczProtocolParams;

/*
 A Monte Carlo mean, its standard error, the sample count, and the
 paired closed-form value (NaN when none exists).
 */
typedef struct DlczRateEstimate {
  double mean;
  double std_error;
  uint64_t n_samples;
  double analytic;
} DlczRateEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *dlcz_version(void);

/*
 Static description of a status code.
 */
const char *dlcz_status_message(enum DlczStatus status);

/*
 Same-bin, cross-bin, and total error probabilities for an N-mode
 protocol: 2p, (N-1) p beta_as/beta_s, and their sum.
 */
enum DlczStatus dlcz_error_budget(const struct DlczEmissionParams *em,
                                  uint64_t n_modes,
                                  double *same_bin,
                                  double *cross_bin,
                                  double *total);

/*
 Largest detected-mode emission probability keeping the total error at
 epsilon.
 */
enum DlczStatus dlcz_max_p_for_error(double epsilon, uint64_t n_modes, double ratio, double *out);

/*
 Multimode rate factor N eps / (2 + (N-1) ratio).
 */
enum DlczStatus dlcz_multimode_rate_scaling(double epsilon,
                                            uint64_t n_modes,
                                            double ratio,
                                            double *out);

/*
 Number of time bins fitting one communication window.
 */
enum DlczStatus dlcz_mode_capacity(double l0_m,
                                   double fiber_speed_m_per_s,
                                   double gamma_inh_hz,
                                   uint64_t *out);

/*
 Fiber power transmission over `length_m` at `attenuation_db_per_km`.
 */
enum DlczStatus dlcz_fiber_transmission(double length_m, double attenuation_db_per_km, double *out);

/*
 One-way classical communication time over `l0_m`.
 */
enum DlczStatus dlcz_communication_time(double l0_m, double fiber_speed_m_per_s, double *out);

/*
 Free spectral range and resonance width (Hz) of a cavity, plus the
 beta_s/beta_as enhancement it provides (the finesse).
 */
enum DlczStatus dlcz_cavity_spectrum(double length_m,
                                     double finesse,
                                     double *fsr_hz,
                                     double *peak_width_hz,
                                     double *purcell_ratio);

/*
 Reconversion efficiency after `storage_time_s` of storage.
 */
enum DlczStatus dlcz_memory_recall_efficiency(const struct DlczProtocolParams *protocol,
                                              double storage_time_s,
                                              double *out);

/*
 Samples an ensemble of `n_atoms` atoms in a pencil cylinder with the
 given broadening. On success writes a handle that must be freed with
 `dlcz_ensemble_free`.
 */
enum DlczStatus dlcz_ensemble_sample(size_t n_atoms,
                                     double length_m,
                                     double radius_m,
                                     enum DlczBroadening broadening,
                                     double gamma_inh_hz,
                                     uint64_t seed,
                                     struct DlczEnsemble **out);

/*
 Installs a single detuning-sign flip at `flip_time_s`, replacing any
 previous schedule.
 */
enum DlczStatus dlcz_ensemble_set_single_flip(struct DlczEnsemble *ensemble, double flip_time_s);

enum DlczStatus dlcz_ensemble_n_atoms(const struct DlczEnsemble *ensemble, size_t *out);

/*
 |A|^2 of the anti-Stokes emission in direction `k_as` at time `t_s`
 for a spin wave created at `creation_time_s` with Stokes wave vector
 `k_stokes` (both 3-vectors, rad/m).
 */
enum DlczStatus dlcz_anti_stokes_intensity(const struct DlczEnsemble *ensemble,
                                           double creation_time_s,
                                           const double *k_stokes,
                                           const double *k_as,
                                           double t_s,
                                           double *out);

/*
 Phase-matched intensity over the mean intensity across `n_probe`
 random directions.
 */
enum DlczStatus dlcz_directionality_ratio(const struct DlczEnsemble *ensemble,
                                          double creation_time_s,
                                          const double *k_stokes,
                                          double t_s,
                                          size_t n_probe,
                                          uint64_t seed,
                                          double *out);

/*
 Releases a handle from `dlcz_ensemble_sample`. Passing NULL is a
 no-op.
 */
void dlcz_ensemble_free(struct DlczEnsemble *ensemble);

/*
 Monte Carlo conditional readout error rate paired with the analytic
 budget total.
 */
enum DlczStatus dlcz_estimate_error_rate(const struct DlczEmissionParams *em,
                                         uint64_t n_modes,
                                         uint64_t n_trials,
                                         uint64_t seed,
                                         struct DlczRateEstimate *out);

/*
 Mean elementary-link generation time paired with the geometric
 closed form.
 */
enum DlczStatus dlcz_link_time_stats(const struct DlczProtocolParams *protocol,
                                     const struct DlczEmissionParams *em,
                                     uint64_t trials,
                                     uint64_t seed,
                                     struct DlczRateEstimate *out);

/*
 Mean completion time of a nested swap chain (`swap_levels >= 1`); the
 analytic field is NaN.
 */
enum DlczStatus dlcz_chain_time_stats(const struct DlczProtocolParams *protocol,
                                      const struct DlczEmissionParams *em,
                                      int swap_levels,
                                      uint64_t trials,
                                      uint64_t seed,
                                      struct DlczRateEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DLCZ_MULTIPLEX_H */
