#ifndef CAVITY_DARK_H
#define CAVITY_DARK_H

/* Generated by cbindgen from cavity-dark-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome.
 */
typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_ARGUMENT = 1,
  CD_STATUS_INVALID_ARGUMENT = 2,
  CD_STATUS_NUMERICAL_FAILURE = 3,
} CdStatus;

/**
 * Excitation channel of a two-atom amplitude.
 */
typedef enum CdChannel {
  /**
   * Atom 1 excited, no photon.
   */
  CD_CHANNEL_EXC_GND = 0,
  /**
   * Atom 2 excited, no photon.
   */
  CD_CHANNEL_GND_EXC = 1,
  /**
   * Both atoms in the ground state, one cavity photon.
   */
  CD_CHANNEL_PHOTON = 2,
} CdChannel;

/**
 * Whether the kinetic (recoil) term is kept in the evolution.
 */
typedef enum CdModel {
  CD_MODEL_FULL = 0,
  CD_MODEL_NO_RECOIL = 1,
} CdModel;

typedef struct CdDarkTable CdDarkTable;

typedef struct CdParams CdParams;

typedef struct CdState CdState;

typedef struct CdTrajectory CdTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code; never null.
 */
const char *cd_status_message(enum CdStatus status);

/**
 * Dimensionless system parameters: coupling `omega` (> 0), photon damping
 * `kappa` (>= 0), detuning `delta`, quasimomenta `q1`, `q2` in [0, 1), and
 * drive phase `phi`.
 */
enum CdStatus cd_params_new(double omega,
                            double kappa,
                            double delta,
                            double q1,
                            double q2,
                            double phi,
                            struct CdParams **out);

void cd_params_free(struct CdParams *params);

/**
 * Unit excitation of atom 1 at zero momentum on the window |m|, |n| <= m_max.
 */
enum CdStatus cd_state_delta(uint32_t m_max, struct CdState **out);

/**
 * Normalized four-site dark superposition centered at (m, n). Fails when the
 * window cannot hold all four sites.
 */
enum CdStatus cd_state_dark_basis(int32_t m, int32_t n, uint32_t m_max, struct CdState **out);

/**
 * Closed-form stationary dark state; `level` selects 1 or 2.
 */
enum CdStatus cd_state_exact_dark(uint32_t level, uint32_t m_max, struct CdState **out);

uint32_t cd_state_m_max(const struct CdState *state);

double cd_state_time(const struct CdState *state);

/**
 * Total excitation probability held by the state.
 */
double cd_state_survival(const struct CdState *state);

/**
 * Complex amplitude at one lattice site; (m, n) must lie inside the window.
 */
enum CdStatus cd_state_amplitude(const struct CdState *state,
                                 enum CdChannel channel,
                                 int32_t m,
                                 int32_t n,
                                 double *re,
                                 double *im);

void cd_state_free(struct CdState *state);

/**
 * Integrates the lattice equations from `initial` and records one sample per
 * entry of `times`, which must hold `n_times` non-decreasing instants not
 * earlier than the state's own time. `tol` is the adaptive step error bound.
 */
enum CdStatus cd_propagate(const struct CdParams *params,
                           enum CdModel model,
                           const struct CdState *initial,
                           const double *times,
                           size_t n_times,
                           double tol,
                           struct CdTrajectory **out);

size_t cd_trajectory_len(const struct CdTrajectory *traj);

/**
 * Survival probability of sample `index`.
 */
enum CdStatus cd_trajectory_survival(const struct CdTrajectory *traj, size_t index, double *out);

/**
 * Copies sample `index` into a fresh state handle.
 */
enum CdStatus cd_trajectory_state(const struct CdTrajectory *traj,
                                  size_t index,
                                  struct CdState **out);

/**
 * Largest population seen on the outermost momentum shell; the truncation
 * monitor for the run.
 */
double cd_trajectory_max_boundary(const struct CdTrajectory *traj);

void cd_trajectory_free(struct CdTrajectory *traj);

/**
 * Builds the quadrature table of stationary dark amplitudes out to
 * |m|, |n| <= m_max.
 */
enum CdStatus cd_dark_table_new(uint32_t m_max, struct CdDarkTable **out);

/**
 * Tabulated amplitude at (m, n); exact zero off the parity classes or outside
 * the table window. Null handle gives NaN.
 */
double cd_dark_table_amplitude(const struct CdDarkTable *table,
                               enum CdChannel channel,
                               int32_t m,
                               int32_t n);

/**
 * Σ |c|² over the diamond |m| + |n| <= r.
 */
double cd_dark_table_diamond_weight(const struct CdDarkTable *table, uint32_t r);

void cd_dark_table_free(struct CdDarkTable *table);

/**
 * Perturbative decay rate of the four-site dark superposition at (m, n).
 * `beyond_validity` is set nonzero when the damping is too strong for the
 * estimate to apply.
 */
enum CdStatus cd_decay_estimate(const struct CdParams *params,
                                int32_t m,
                                int32_t n,
                                double *rate,
                                int32_t *beyond_validity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVITY_DARK_H */
