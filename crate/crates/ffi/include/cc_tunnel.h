#ifndef CC_TUNNEL_H
#define CC_TUNNEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_PARAMETER = 2,
  CC_STATUS_NO_OPEN_CHANNEL = 3,
  CC_STATUS_INTEGRATION_FAILED = 4,
  CC_STATUS_OUT_OF_RANGE = 5,
  CC_STATUS_POINT_FAILED = 6,
  CC_STATUS_PANIC = 7,
} CcStatus;

typedef enum CcConvention {
  CC_CONVENTION_PAPER_CODE = 0,
  CC_CONVENTION_DERIVED = 1,
} CcConvention;

typedef enum CcSolver {
  /**
   * Variable reflection amplitudes (the main solver).
   */
  CC_SOLVER_VRA = 0,
  /**
   * Piecewise-constant transfer matrices (the cross-check).
   */
  CC_SOLVER_TRANSFER_MATRIX = 1,
} CcSolver;

typedef enum CcSpin {
  CC_SPIN_UP = 0,
  CC_SPIN_DOWN = 1,
} CcSpin;

/**
 * Model parameters plus integrator settings.
 */
typedef struct CcProblem CcProblem;

/**
 * Probabilities at one energy.
 */
typedef struct CcRecord CcRecord;

/**
 * An energy sweep.
 */
typedef struct CcSweep CcSweep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *cc_last_error(void);

/**
 * Static description of a status code.
 */
const char *cc_status_name(enum CcStatus status);

/**
 * New problem with the default parameters (a = b = 1, d = l = 5, u = 0,
 * V0 = m = hbar = 1, n_max = 7, paper-code convention). Free with
 * [`cc_problem_free`].
 */
struct CcProblem *cc_problem_new(void);

/**
 * # Safety
 * `problem` must come from [`cc_problem_new`] and not be used afterwards.
 */
void cc_problem_free(struct CcProblem *problem);

/**
 * Barrier width `a`, field half-width `b`, well width `d`, separation `l`.
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum CcStatus cc_problem_set_geometry(struct CcProblem *problem,
                                      double a,
                                      double b,
                                      double d,
                                      double l);

/**
 * # Safety
 * `problem` must be a live handle.
 */
enum CcStatus cc_problem_set_field(struct CcProblem *problem, double u);

/**
 * Barrier height, particle mass and hbar.
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum CcStatus cc_problem_set_scales(struct CcProblem *problem, double v0, double mass, double hbar);

/**
 * # Safety
 * `problem` must be a live handle.
 */
enum CcStatus cc_problem_set_n_max(struct CcProblem *problem, size_t n_max);

/**
 * # Safety
 * `problem` must be a live handle.
 */
enum CcStatus cc_problem_set_convention(struct CcProblem *problem, enum CcConvention convention);

/**
 * Integrator tolerances and step cap; `segments` is used by the
 * transfer-matrix solver.
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum CcStatus cc_problem_set_numerics(struct CcProblem *problem,
                                      double rtol,
                                      double atol,
                                      double max_step,
                                      size_t segments);

/**
 * Energy `ε_j` of internal mode `j` (1-based).
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum CcStatus cc_channel_energy(const struct CcProblem *problem, size_t j, double *out);

/**
 * Solves at total energy `energy`; on success `*out` owns a record to be
 * released with [`cc_record_free`].
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum CcStatus cc_solve(const struct CcProblem *problem,
                       double energy,
                       enum CcSolver solver,
                       struct CcRecord **out);

/**
 * # Safety
 * `record` must come from [`cc_solve`] and not be used afterwards.
 */
void cc_record_free(struct CcRecord *record);

/**
 * Number of open internal modes; 0 for a null handle.
 *
 * # Safety
 * `record` must be null or a live handle.
 */
size_t cc_record_open_channels(const struct CcRecord *record);

/**
 * Largest `|1 - Σ(P_r + P_t)|` over incident states; NaN for a null handle.
 *
 * # Safety
 * `record` must be null or a live handle.
 */
double cc_record_unitarity_defect(const struct CcRecord *record);

/**
 * Transmission probability from (channel, spin) to (channel, spin).
 *
 * # Safety
 * `record` must be a live handle and `out` writable.
 */
enum CcStatus cc_record_transmission(const struct CcRecord *record,
                                     size_t from_channel,
                                     enum CcSpin from_spin,
                                     size_t to_channel,
                                     enum CcSpin to_spin,
                                     double *out);

/**
 * Reflection probability from (channel, spin) to (channel, spin).
 *
 * # Safety
 * `record` must be a live handle and `out` writable.
 */
enum CcStatus cc_record_reflection(const struct CcRecord *record,
                                   size_t from_channel,
                                   enum CcSpin from_spin,
                                   size_t to_channel,
                                   enum CcSpin to_spin,
                                   double *out);

/**
 * Energy sweep at `(E - ε1)/V0 = start + i * span / points`, `i = 1..=points`,
 * from the given incident state. `threads = 0` lets the pool choose.
 * Individual points may fail without failing the sweep.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum CcStatus cc_sweep_energy(const struct CcProblem *problem,
                              double start,
                              double span,
                              size_t points,
                              size_t incident_channel,
                              enum CcSpin incident_spin,
                              size_t threads,
                              struct CcSweep **out);

/**
 * # Safety
 * `sweep` must come from [`cc_sweep_energy`] and not be used afterwards.
 */
void cc_sweep_free(struct CcSweep *sweep);

/**
 * Number of grid points; 0 for a null handle.
 *
 * # Safety
 * `sweep` must be null or a live handle.
 */
size_t cc_sweep_len(const struct CcSweep *sweep);

/**
 * Grid value `(E - ε1)/V0` of point `index` (0-based).
 *
 * # Safety
 * `sweep` must be a live handle and `out` writable.
 */
enum CcStatus cc_sweep_abscissa(const struct CcSweep *sweep, size_t index, double *out);

/**
 * Transmission at point `index` into `channel` with the incident spin kept
 * (`flip = 0`) or flipped; `channel = 0` gives the total. Returns
 * [`CcStatus::PointFailed`] for a gap in the sweep and
 * [`CcStatus::OutOfRange`] for a channel closed at that point.
 *
 * # Safety
 * `sweep` must be a live handle and `out` writable.
 */
enum CcStatus cc_sweep_transmission(const struct CcSweep *sweep,
                                    size_t index,
                                    size_t channel,
                                    bool flip,
                                    double *out);

/**
 * Unitarity defect at point `index`.
 *
 * # Safety
 * `sweep` must be a live handle and `out` writable.
 */
enum CcStatus cc_sweep_unitarity_defect(const struct CcSweep *sweep, size_t index, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CC_TUNNEL_H */
