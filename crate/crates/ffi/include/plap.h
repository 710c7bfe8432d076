#ifndef PLAP_H
#define PLAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlapClassification {
  PLAP_CLASSIFICATION_CONVERGENT = 0,
  PLAP_CLASSIFICATION_DIVERGENT = 1,
  PLAP_CLASSIFICATION_INCONCLUSIVE = 2,
} PlapClassification;

typedef enum PlapProblem {
  PLAP_PROBLEM_HEAT = 0,
  PLAP_PROBLEM_COUNTEREXAMPLE = 1,
} PlapProblem;

typedef enum PlapScheme {
  PLAP_SCHEME_EXPLICIT = 0,
  PLAP_SCHEME_IMPLICIT_PICARD = 1,
} PlapScheme;

typedef enum PlapStatus {
  PLAP_STATUS_OK = 0,
  PLAP_STATUS_NULL_POINTER = 1,
  PLAP_STATUS_INVALID_ARGUMENT = 2,
  PLAP_STATUS_SINGULAR = 3,
  PLAP_STATUS_GEOMETRY = 4,
  PLAP_STATUS_NUMERICAL = 5,
  PLAP_STATUS_BUFFER_TOO_SMALL = 6,
  PLAP_STATUS_PANIC = 7,
} PlapStatus;

// Space-time field produced by the solver and the number of steps with Picard warnings.
typedef struct PlapField PlapField;

// Second-order jet `(Du, D^2u)` at a point.
typedef struct PlapJet PlapJet;

// Result of a sharpness sweep.
typedef struct PlapSweep PlapSweep;

// Exponent `p`, integrability shift `s` and regularization `eps`.
typedef struct PlapParams {
  double p;
  double s;
  double eps;
} PlapParams;

typedef struct PlapSweepRow {
  double s;
  size_t nx;
  double h;
  double lhs;
} PlapSweepRow;

// A square domain `[lower, upper]^2` evolved over `[t_start, t_end]` on `nt` time levels.
typedef struct PlapSolveSpec {
  struct PlapParams params;
  enum PlapProblem problem;
  enum PlapScheme scheme;
  double lower;
  double upper;
  size_t nx;
  double t_start;
  double t_end;
  size_t nt;
} PlapSolveSpec;

// Parabolic cylinder `B_r(x0) x (t0 - r^2, t0 + r^2)` in two space dimensions.
typedef struct PlapCylinder {
  double x0[2];
  double t0;
  double r;
} PlapCylinder;

typedef struct PlapReport {
  double lhs;
  double rhs_total;
  double empirical_constant;
  size_t singular_nodes_skipped;
  size_t picard_warnings;
  // Nonzero when the cylinder does not meet the grid.
  uint8_t empty_intersection;
} PlapReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *plap_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
// `len`) and returns the full message length without the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t plap_last_error_message(char *buf, size_t len);

// Builds a jet from a gradient of length `n` and a row-major `n x n` Hessian.
//
// # Safety
// `g` must hold `n` values, `h` must hold `n * n` values and `out` must be writable.
enum PlapStatus plap_jet_new(const double *g, const double *h, size_t n, struct PlapJet **out);

// # Safety
// `jet` must be null or a handle from [`plap_jet_new`] not yet freed.
void plap_jet_free(struct PlapJet *jet);

// Signed margin of `|D|Du||^2 <= |D^2u|^2`; never negative up to rounding.
//
// # Safety
// `jet` must be a live handle and `out` writable.
enum PlapStatus plap_fundamental_margin(const struct PlapJet *jet, double *out);

// # Safety
// `jet` must be a live handle and `out` writable.
enum PlapStatus plap_full_fundamental_margin(const struct PlapJet *jet, double *out);

// # Safety
// `jet` must be a live handle and `out` writable.
enum PlapStatus plap_trivial_inequality_margin(const struct PlapJet *jet, double *out);

// # Safety
// `jet` and `params` must be valid and `out` writable.
enum PlapStatus plap_sigma_lower_bound_margin(const struct PlapJet *jet,
                                              const struct PlapParams *params,
                                              double *out);

// # Safety
// `jet` and `params` must be valid and `out` writable.
enum PlapStatus plap_smo_esti_margin(const struct PlapJet *jet,
                                     const struct PlapParams *params,
                                     double *out);

// Writes `D V_s` as a row-major `n x n` matrix into `out`, which holds `out_len` values.
//
// # Safety
// `jet` and `params` must be valid and `out` writable for `out_len` values.
enum PlapStatus plap_d_vs_matrix(const struct PlapJet *jet,
                                 const struct PlapParams *params,
                                 double *out,
                                 size_t out_len);

// # Safety
// `params` must be valid and `out` writable.
enum PlapStatus plap_lambda(const struct PlapParams *params, double *out);

// # Safety
// `params` must be valid and `out` writable.
enum PlapStatus plap_eta(const struct PlapParams *params, double *out);

// Closed-form `|D V_s|` of the separable counterexample at abscissa `x1`.
//
// # Safety
// `out` must be writable.
enum PlapStatus plap_dvs_norm_exact(double p, double s, double x1, double *out);

// Runs the sharpness sweep for every `s` in `s_list` over the increasing resolutions `levels`.
//
// # Safety
// `s_list` and `levels` must hold `n_s` and `n_levels` values; `out` must be writable.
enum PlapStatus plap_sharpness_sweep(double p,
                                     const double *s_list,
                                     size_t n_s,
                                     const size_t *levels,
                                     size_t n_levels,
                                     struct PlapSweep **out);

// # Safety
// `sweep` must be a live handle.
size_t plap_sweep_row_count(const struct PlapSweep *sweep);

// # Safety
// `sweep` must be a live handle and `out` writable.
enum PlapStatus plap_sweep_row(const struct PlapSweep *sweep,
                               size_t index,
                               struct PlapSweepRow *out);

// Classification of the sweep at shift `s`, which must be one of the swept values.
//
// # Safety
// `sweep` must be a live handle and `out` writable.
enum PlapStatus plap_sweep_classification(const struct PlapSweep *sweep,
                                          double s,
                                          enum PlapClassification *out);

// # Safety
// `sweep` must be null or a handle not yet freed.
void plap_sweep_free(struct PlapSweep *sweep);

// Solves the regularized equation with boundary and initial data from the chosen problem.
//
// # Safety
// `spec` must be valid and `out` writable.
enum PlapStatus plap_solve(const struct PlapSolveSpec *spec, struct PlapField **out);

// Number of values in the field, `nt * nx * nx`, ordered by time level then node.
//
// # Safety
// `field` must be a live handle.
size_t plap_field_len(const struct PlapField *field);

// # Safety
// `field` must be a live handle and `out` writable for `out_len` values.
enum PlapStatus plap_field_values(const struct PlapField *field, double *out, size_t out_len);

// Caccioppoli report of `field` on `cyl`; the outer cylinder is the one of radius `2r`.
//
// # Safety
// All pointers must be valid and `out` writable.
enum PlapStatus plap_caccioppoli_report(const struct PlapField *field,
                                        const struct PlapParams *params,
                                        const struct PlapCylinder *cyl,
                                        struct PlapReport *out);

// # Safety
// `field` must be null or a handle not yet freed.
void plap_field_free(struct PlapField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLAP_H */
