#ifndef QDCASCADE_H
#define QDCASCADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QdcStatus {
  QDC_STATUS_OK = 0,
  QDC_STATUS_NULL_POINTER = 1,
  QDC_STATUS_INVALID_ARGUMENT = 2,
  QDC_STATUS_NUMERICAL = 3,
  QDC_STATUS_BUFFER_TOO_SMALL = 4,
  QDC_STATUS_PANIC = 5,
} QdcStatus;

/**
 * Counts for the 16 standard tomography settings.
 */
typedef struct QdcDataset QdcDataset;

/**
 * Two-photon density matrix.
 */
typedef struct QdcState QdcState;

/**
 * Recorded evolution of the dot.
 */
typedef struct QdcTrajectory QdcTrajectory;

/**
 * Radiative rates and detunings, ps⁻¹.
 */
typedef struct QdcDot {
  double gamma_x;
  double gamma_b;
  double delta_x;
  double delta_b;
} QdcDot;

/**
 * Gaussian pulse `Ω₀·exp(−ln2·(t−t₀)²/σ²)`.
 */
typedef struct QdcPulse {
  double omega0;
  double sigma;
  double t0;
} QdcPulse;

/**
 * `γ(t) = gamma_bg + gamma_i0·Ω(t)^n_p`
 */
typedef struct QdcDephasing {
  double gamma_bg;
  double gamma_i0;
  uint32_t n_p;
} QdcDephasing;

typedef struct QdcEmission {
  double p_x;
  double p_b;
} QdcEmission;

/**
 * Entanglement metrics of a two-photon state. Basis indices run
 * `ee, el, le, ll`.
 */
typedef struct QdcMetrics {
  double concurrence;
  double fidelity;
  double phi_opt;
  double coherence_re;
  double coherence_im;
  uint32_t coherence_row;
  uint32_t coherence_col;
  double visibility_time;
  double visibility_energy_0;
  double visibility_energy_90;
} QdcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qdc_version(void);

/**
 * Bytes needed for the last error message including the terminating NUL;
 * 0 when no error has been recorded on this thread.
 */
size_t qdc_last_error_length(void);

/**
 * Copies the last error message of this thread into `buf`.
 *
 * # Safety
 * `buf` must point to `len` writable bytes.
 */
enum QdcStatus qdc_last_error_message(char *buf, size_t len);

/**
 * Evolves the dot from `|g⟩` through one pulse and the following decay
 * (ten exciton lifetimes).
 *
 * # Safety
 * Input pointers must be valid; `out` receives a handle to free with
 * [`qdc_trajectory_free`].
 */
enum QdcStatus qdc_evolve(const struct QdcDot *dot,
                          const struct QdcPulse *pulse,
                          const struct QdcDephasing *dephasing,
                          double tol,
                          struct QdcTrajectory **out);

/**
 * # Safety
 * `traj` must be a live handle or NULL.
 */
size_t qdc_trajectory_len(const struct QdcTrajectory *traj);

/**
 * Time and `(ρ_gg, ρ_xx, ρ_bb)` of stored point `index`.
 *
 * # Safety
 * `traj` must be a live handle, `t` a writable double and `populations`
 * three writable doubles.
 */
enum QdcStatus qdc_trajectory_point(const struct QdcTrajectory *traj,
                                    size_t index,
                                    double *t,
                                    double *populations);

/**
 * Emission probabilities accumulated up to `t_f`.
 *
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum QdcStatus qdc_trajectory_emission(const struct QdcTrajectory *traj,
                                       double t_f,
                                       struct QdcEmission *out);

/**
 * # Safety
 * `traj` must be a handle from [`qdc_evolve`] not freed before, or NULL.
 */
void qdc_trajectory_free(struct QdcTrajectory *traj);

/**
 * Photon yields of one pulse from `|g⟩`, integrated to infinite time.
 *
 * # Safety
 * Input pointers must be valid and `out` writable.
 */
enum QdcStatus qdc_emission_after_pulse(const struct QdcDot *dot,
                                        const struct QdcPulse *pulse,
                                        const struct QdcDephasing *dephasing,
                                        double tol,
                                        struct QdcEmission *out);

/**
 * `γ_I0` that gives the first-max/first-min Rabi contrast `target` at pulse
 * length `sigma`, scanning areas up to 40.
 *
 * # Safety
 * `dot` must be valid and `gamma_i0` writable.
 */
enum QdcStatus qdc_fit_gamma_i0(const struct QdcDot *dot,
                                double sigma,
                                double gamma_bg,
                                uint32_t n_p,
                                double target,
                                double *gamma_i0);

/**
 * State from row-major real and imaginary parts (16 doubles each). Must
 * be Hermitian with unit trace; positivity is not required.
 *
 * # Safety
 * `re` and `im` must point to 16 doubles each; `out` must be writable.
 */
enum QdcStatus qdc_state_from_matrix(const double *re, const double *im, struct QdcState **out);

/**
 * Noisy time-bin state: accidental fraction from `epsilon` and the pairing
 * weight, `ee`–`ll` coherence scaled by `v_coh`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QdcStatus qdc_state_model(double phi_p,
                               double epsilon,
                               double v_coh,
                               double pairing_weight,
                               struct QdcState **out);

/**
 * # Safety
 * `state` must be a live handle; `re` and `im` writable.
 */
enum QdcStatus qdc_state_element(const struct QdcState *state,
                                 size_t row,
                                 size_t col,
                                 double *re,
                                 double *im);

/**
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum QdcStatus qdc_state_metrics(const struct QdcState *state, struct QdcMetrics *out);

/**
 * Uhlmann fidelity `(Tr√(√a b √a))²`.
 *
 * # Safety
 * `a` and `b` must be live handles and `out` writable.
 */
enum QdcStatus qdc_state_fidelity(const struct QdcState *a, const struct QdcState *b, double *out);

/**
 * # Safety
 * `state` must be a handle not freed before, or NULL.
 */
void qdc_state_free(struct QdcState *state);

/**
 * Poisson counts for the 16 standard settings, deterministic in `seed`.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum QdcStatus qdc_dataset_simulate(const struct QdcState *state,
                                    double n_mean,
                                    uint64_t seed,
                                    struct QdcDataset **out);

/**
 * Dataset from 16 measured counts in the standard setting order.
 *
 * # Safety
 * `counts` must point to 16 doubles and `out` must be writable.
 */
enum QdcStatus qdc_dataset_from_counts(const double *counts,
                                       double n_mean,
                                       struct QdcDataset **out);

/**
 * # Safety
 * `data` must be a live handle and `counts` point to 16 writable doubles.
 */
enum QdcStatus qdc_dataset_counts(const struct QdcDataset *data, double *counts);

/**
 * # Safety
 * `data` must be a handle not freed before, or NULL.
 */
void qdc_dataset_free(struct QdcDataset *data);

/**
 * Linear-inversion estimate; `physical` is set to 1 when it has no
 * negative eigenvalue.
 *
 * # Safety
 * `data` must be a live handle; `out` and `physical` writable.
 */
enum QdcStatus qdc_reconstruct_linear(const struct QdcDataset *data,
                                      struct QdcState **out,
                                      int32_t *physical);

/**
 * Maximum-likelihood estimate. Pass `max_iterations = 0` or `tol <= 0` for
 * the defaults. `converged` is 0 when the iteration cap was reached; the
 * best iterate is still returned.
 *
 * # Safety
 * `data` must be a live handle; `out` and `converged` writable.
 */
enum QdcStatus qdc_reconstruct_mle(const struct QdcDataset *data,
                                   size_t max_iterations,
                                   double tol,
                                   struct QdcState **out,
                                   int32_t *converged);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDCASCADE_H */
