#ifndef SBP_MHD_H
#define SBP_MHD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbpOperatorKind {
  SBP_OPERATOR_KIND_LGL = 0,
  SBP_OPERATOR_KIND_FD_SBP = 1,
} SbpOperatorKind;

typedef enum SbpStatus {
  SBP_STATUS_OK = 0,
  SBP_STATUS_NULL_POINTER = 1,
  SBP_STATUS_INVALID_ARGUMENT = 2,
  SBP_STATUS_CONFIG = 3,
  SBP_STATUS_NUMERICAL = 4,
  SBP_STATUS_IO = 5,
  SBP_STATUS_BUFFER_TOO_SMALL = 6,
  SBP_STATUS_PANIC = 7,
} SbpStatus;

/**
 * One-dimensional SBP operator.
 */
typedef struct SbpOperator SbpOperator;

/**
 * Benchmark run in progress.
 */
typedef struct SbpSimulation SbpSimulation;

/**
 * Latest diagnostics sample of a simulation.
 */
typedef struct SbpDiagnostics {
  double t;
  double mean_alpha;
  double total_entropy;
  double min_rho;
  double min_p;
} SbpDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next library call on the same thread.
 */
const char *sbp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sbp_version(void);

/**
 * Builds an operator. `n` is the polynomial degree for LGL and the node
 * count for FD-SBP.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SbpStatus sbp_operator_new(enum SbpOperatorKind kind, size_t n, struct SbpOperator **out);

/**
 * # Safety
 * `op` must be null or a handle from [`sbp_operator_new`] not yet freed.
 */
void sbp_operator_free(struct SbpOperator *op);

/**
 * Number of nodes, 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live operator handle.
 */
size_t sbp_operator_num_nodes(const struct SbpOperator *op);

/**
 * Copies the nodes on [-1, 1] into `out` (at least `num_nodes` entries).
 *
 * # Safety
 * `op` must be a live handle and `out` valid for `len` writes.
 */
enum SbpStatus sbp_operator_nodes(const struct SbpOperator *op, double *out, size_t len);

/**
 * Copies the diagonal norm weights.
 *
 * # Safety
 * `op` must be a live handle and `out` valid for `len` writes.
 */
enum SbpStatus sbp_operator_weights(const struct SbpOperator *op, double *out, size_t len);

/**
 * Checks the summation-by-parts identities at tolerance `tol` and stores
 * the verdict in `passes`.
 *
 * # Safety
 * `op` must be a live handle and `passes` writable.
 */
enum SbpStatus sbp_operator_check(const struct SbpOperator *op, double tol, bool *passes);

/**
 * Largest scaled difference between the direct and flux-differencing
 * right-hand sides over `fields` random fields.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SbpStatus sbp_equivalence_deviation(const struct SbpOperator *op,
                                         size_t elements,
                                         size_t fields,
                                         uint64_t seed,
                                         double *out);

/**
 * Sets up a run from `key=value` lines in the config-file format
 * (`problem=orszag_tang`, `dof=64`, ...). Output settings are ignored.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` writable.
 */
enum SbpStatus sbp_simulation_new(const char *config, struct SbpSimulation **out);

/**
 * # Safety
 * `sim` must be null or a handle from [`sbp_simulation_new`] not yet freed.
 */
void sbp_simulation_free(struct SbpSimulation *sim);

/**
 * Takes `steps` full time steps.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum SbpStatus sbp_simulation_step(struct SbpSimulation *sim, size_t steps);

/**
 * Advances to time `t` (the configured end time when `t` is negative),
 * recording diagnostics samples on the way.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum SbpStatus sbp_simulation_advance_to(struct SbpSimulation *sim, double t);

/**
 * Current simulation time, NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
double sbp_simulation_time(const struct SbpSimulation *sim);

/**
 * Time step in use, NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
double sbp_simulation_dt(const struct SbpSimulation *sim);

/**
 * Total number of nodes, 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t sbp_simulation_num_nodes(const struct SbpSimulation *sim);

/**
 * Copies the conserved variables, nine per node in element-major order,
 * into `out` (at least `9 * num_nodes` entries).
 *
 * # Safety
 * `sim` must be a live handle and `out` valid for `len` writes.
 */
enum SbpStatus sbp_simulation_state(const struct SbpSimulation *sim, double *out, size_t len);

/**
 * Total mass of the current state.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum SbpStatus sbp_simulation_mass(const struct SbpSimulation *sim, double *out);

/**
 * Most recent diagnostics sample.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum SbpStatus sbp_simulation_diagnostics(const struct SbpSimulation *sim,
                                          struct SbpDiagnostics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SBP_MHD_H */
