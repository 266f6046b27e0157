#ifndef QLIE_H
#define QLIE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every fallible function.
typedef enum QlieStatus {
  QLIE_STATUS_OK = 0,
  // A required pointer argument was null.
  QLIE_STATUS_NULL_POINTER = 1,
  // The input was rejected (malformed JSON, non-Hermitian matrix, bad sizes, ...).
  QLIE_STATUS_INVALID_INPUT = 2,
  // An internal cross-check disagreed; the result would not be trustworthy.
  QLIE_STATUS_CONSISTENCY = 3,
  // A string argument was not valid UTF-8.
  QLIE_STATUS_UTF8 = 4,
  // A Rust panic was caught at the boundary.
  QLIE_STATUS_PANIC = 5,
} QlieStatus;

// The outcome of `qlie_analyze`.
typedef struct QlieReport QlieReport;

// A control system together with the tolerances its source file requested.
typedef struct QlieSystem QlieSystem;

// Headline numbers of a report.
typedef struct QlieSummary {
  size_t n;
  size_t lie_dim;
  size_t traceless_lie_dim;
  size_t centralizer_dim;
  size_t effective_count;
  bool any_nonzero_trace;
  bool functional_independent;
  bool density_controllable;
  bool wavefunction_controllable;
  bool full_algebra;
} QlieSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a system from the JSON file format used by the command-line tool.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum QlieStatus qlie_system_from_json(const char *json, struct QlieSystem **out);

// Lowest `n` levels of the harmonic oscillator with a dipole coupling.
//
// # Safety
// `out` must be a valid pointer.
enum QlieStatus qlie_model_oscillator(size_t n, struct QlieSystem **out);

// Two commuting diagonal operators; never controllable.
//
// # Safety
// `out` must be a valid pointer.
enum QlieStatus qlie_model_diagonal(size_t n, struct QlieSystem **out);

// Gaussian random Hermitian operators with `l` monomial couplings.
//
// # Safety
// `out` must be a valid pointer.
enum QlieStatus qlie_model_random(size_t n, size_t l, uint64_t seed, struct QlieSystem **out);

// Hilbert-space dimension of `system`, or 0 for a null handle.
//
// # Safety
// `system` must be null or a live handle.
size_t qlie_system_dim(const struct QlieSystem *system);

// # Safety
// `system` must be null or a handle not yet freed.
void qlie_system_free(struct QlieSystem *system);

// Runs the full controllability analysis.
//
// A positive `tol` overrides the closure, rank and independence tolerances;
// zero or a negative value keeps those of the system (or the defaults).
//
// # Safety
// `system` must be a live handle and `out` a valid pointer.
enum QlieStatus qlie_analyze(const struct QlieSystem *system, double tol, struct QlieReport **out);

// Copies the headline numbers of `report` into `out`.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum QlieStatus qlie_report_summary(const struct QlieReport *report, struct QlieSummary *out);

// Number of warnings attached to `report`, or 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t qlie_report_warning_count(const struct QlieReport *report);

// The full report as JSON; release with `qlie_string_free`.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum QlieStatus qlie_report_to_json(const struct QlieReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void qlie_report_free(struct QlieReport *report);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void qlie_string_free(char *s);

// Propagates a unit state through `segments` piecewise-constant segments.
//
// `durations` and `values` hold one entry per segment. The state is given and
// returned as separate real and imaginary arrays of length `n`, which must
// equal the system dimension; the output arrays may alias the inputs.
//
// # Safety
// Every non-empty array must be valid for its stated length.
enum QlieStatus qlie_propagate_state(const struct QlieSystem *system,
                                     const double *durations,
                                     const double *values,
                                     size_t segments,
                                     const double *re_in,
                                     const double *im_in,
                                     double *re_out,
                                     double *im_out,
                                     size_t n);

// Message for the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call into this library on the same
// thread.
const char *qlie_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qlie_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLIE_H */
