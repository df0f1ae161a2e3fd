#ifndef BROKENGUIDE_H
#define BROKENGUIDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum BgStatus {
  BG_STATUS_OK = 0,
  BG_STATUS_NULL_POINTER = 1,
  BG_STATUS_INVALID_ARGUMENT = 2,
  BG_STATUS_INVALID_ANGLE = 3,
  BG_STATUS_CONFIG = 4,
  BG_STATUS_NOT_POSITIVE_DEFINITE = 5,
  BG_STATUS_NO_CONVERGENCE = 6,
  BG_STATUS_UNRESOLVED = 7,
  BG_STATUS_OUT_OF_RANGE = 8,
  BG_STATUS_OUTSIDE_DOMAIN = 9,
  BG_STATUS_PANIC = 10,
} BgStatus;

typedef enum BgFormulation {
  BG_FORMULATION_MODEL_GUIDE = 0,
  BG_FORMULATION_REFERENCE_STRIP = 1,
  BG_FORMULATION_FULL_GUIDE = 2,
} BgFormulation;

// A configured eigenvalue problem.
typedef struct BgProblem BgProblem;

// Certified eigenpairs of a problem.
typedef struct BgSolution BgSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a problem with default solver settings (10 eigenpairs, subspace 25, tolerance 1e-8).
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum BgStatus bg_problem_new(enum BgFormulation formulation,
                             double theta,
                             size_t length,
                             size_t level,
                             size_t degree,
                             struct BgProblem **out);

// Creates a problem from flat `key = value` configuration text.
//
// # Safety
// `text` must be a nul-terminated string and `out` a valid pointer.
enum BgStatus bg_problem_from_config(const char *text, struct BgProblem **out);

// # Safety
// `problem` must be a handle from this library or null.
enum BgStatus bg_problem_set_solver(struct BgProblem *problem,
                                    size_t n_val,
                                    size_t n_sub,
                                    double tolerance,
                                    uint64_t seed);

// # Safety
// `problem` must be a handle from this library or null; it must not be used afterwards.
void bg_problem_free(struct BgProblem *problem);

// Meshes, assembles, solves and certifies.
//
// # Safety
// `problem` must be a valid handle and `out` a valid pointer.
enum BgStatus bg_solve(const struct BgProblem *problem, struct BgSolution **out);

// # Safety
// `solution` must be a handle from this library or null; it must not be used afterwards.
void bg_solution_free(struct BgSolution *solution);

// Number of computed eigenpairs; 0 for a null handle.
//
// # Safety
// `solution` must be a valid handle or null.
size_t bg_solution_len(const struct BgSolution *solution);

// Number of eigenvalues below the threshold 1; 0 for a null handle.
//
// # Safety
// `solution` must be a valid handle or null.
size_t bg_solution_bound_states(const struct BgSolution *solution);

// Degrees of freedom after Dirichlet elimination; 0 for a null handle.
//
// # Safety
// `solution` must be a valid handle or null.
size_t bg_solution_n_dofs(const struct BgSolution *solution);

// Eigensolver iterations; 0 for a null handle.
//
// # Safety
// `solution` must be a valid handle or null.
size_t bg_solution_iterations(const struct BgSolution *solution);

// Eigenvalue and residual of the pair with 0-based `index`; either output may be null.
//
// # Safety
// `solution` must be a valid handle; non-null outputs must be writable.
enum BgStatus bg_solution_pair(const struct BgSolution *solution,
                               size_t index,
                               double *eigenvalue,
                               double *residual);

// Copies up to `capacity` eigenvalues into `values` and stores the number written in `written`.
//
// # Safety
// `values` must hold `capacity` doubles; `written` may be null.
enum BgStatus bg_solution_eigenvalues(const struct BgSolution *solution,
                                      double *values,
                                      size_t capacity,
                                      size_t *written);

// Value of the eigenfunction with 0-based `index` at `(u, v)` in the problem's coordinates.
//
// # Safety
// `solution` must be a valid handle and `value` writable.
enum BgStatus bg_solution_evaluate(const struct BgSolution *solution,
                                   size_t index,
                                   double u,
                                   double v,
                                   double *value);

// `j`-th zero of the reverse Airy function `Ai(-x)`, `j >= 1`.
//
// # Safety
// `out` must be writable.
enum BgStatus bg_airy_zero(size_t j, double *out);

// Two-term small-angle approximation of the `j`-th eigenvalue.
//
// # Safety
// `out` must be writable.
enum BgStatus bg_two_term_eigenvalue(double theta, size_t j, double *out);

// Message of the last failure on this thread, or null. Valid until the next failing call.
const char *bg_last_error(void);

// Static description of a status code.
const char *bg_status_str(enum BgStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BROKENGUIDE_H */
