#ifndef RIDGEAPPROX_H
#define RIDGEAPPROX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RaStatus {
  RA_STATUS_OK = 0,
  RA_STATUS_NULL_POINTER = 1,
  RA_STATUS_INVALID_UTF8 = 2,
  /**
   * Config text could not be parsed or is inconsistent.
   */
  RA_STATUS_CONFIG = 3,
  /**
   * Dependent directions, vanishing slice mass, evaluation failure.
   */
  RA_STATUS_NUMERICAL = 4,
  /**
   * The fixed-point solver stopped at its sweep limit; the solution handle
   * is still produced.
   */
  RA_STATUS_NOT_CONVERGED = 5,
  /**
   * Component index out of range or buffer length mismatch.
   */
  RA_STATUS_OUT_OF_RANGE = 6,
  /**
   * The instance exceeds the oracle size limit.
   */
  RA_STATUS_TOO_LARGE = 7,
  RA_STATUS_PANIC = 8,
} RaStatus;

/**
 * Opaque problem handle.
 */
typedef struct RaProblem RaProblem;

/**
 * Opaque solution handle.
 */
typedef struct RaSolution RaSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next `ra_*` call on the same thread.
 */
const char *ra_last_error_message(void);

/**
 * Parses a config (same text format as the CLI) and samples the problem.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum RaStatus ra_problem_from_config(const char *text, struct RaProblem **out);

/**
 * # Safety
 * `problem` must come from `ra_problem_from_config` and not be freed twice.
 */
void ra_problem_free(struct RaProblem *problem);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RaStatus ra_problem_dims(const struct RaProblem *problem, size_t *n, size_t *r, size_t *q);

/**
 * `det J` of the completed basis.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RaStatus ra_problem_det(const struct RaProblem *problem, double *out);

/**
 * Gauss nodes of ridge axis `axis` into `buf`, which must hold exactly `q`
 * values.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum RaStatus ra_problem_nodes(const struct RaProblem *problem,
                               size_t axis,
                               double *buf,
                               size_t len);

/**
 * Solves the problem. On `RA_STATUS_NOT_CONVERGED` the last iterate is
 * still returned through `out`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RaStatus ra_solve(const struct RaProblem *problem,
                       bool force_fixed_point,
                       struct RaSolution **out);

/**
 * # Safety
 * `solution` must come from `ra_solve` and not be freed twice.
 */
void ra_solution_free(struct RaSolution *solution);

/**
 * The approximation error `E(f)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RaStatus ra_solution_error(const struct RaSolution *solution, double *out);

/**
 * The error recomputed from the residual norm.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RaStatus ra_solution_residual_error(const struct RaSolution *solution, double *out);

/**
 * Values of component `axis` at its Gauss nodes; `len` must equal `q`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum RaStatus ra_solution_component(const struct RaSolution *solution,
                                    size_t axis,
                                    double *buf,
                                    size_t len);

/**
 * Worst optimality defect of `solution` for `problem`: the orthogonality
 * defect, and for unit weights also the marginal characterization.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RaStatus ra_verify(const struct RaProblem *problem,
                        const struct RaSolution *solution,
                        double *out_defect);

/**
 * Runs the dense least-squares oracle and reports the gaps to `solution`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RaStatus ra_oracle_compare(const struct RaProblem *problem,
                                const struct RaSolution *solution,
                                double *error_gap,
                                double *approximant_gap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIDGEAPPROX_H */
