#ifndef ALGEBROID_POISSON_H
#define ALGEBROID_POISSON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApStatus {
  AP_STATUS_OK = 0,
  AP_STATUS_NULL_POINTER = 1,
  AP_STATUS_INVALID_UTF8 = 2,
  AP_STATUS_PARSE = 3,
  AP_STATUS_DIMENSION = 4,
  AP_STATUS_VALIDATION = 5,
  AP_STATUS_PRECONDITION = 6,
  AP_STATUS_NUMERICAL = 7,
  AP_STATUS_IO = 8,
  AP_STATUS_PANIC = 9,
} ApStatus;

/**
 * Opaque smooth function on the predual bundle.
 */
typedef struct ApFunction ApFunction;

/**
 * Opaque algebroid model.
 */
typedef struct ApModel ApModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *ap_last_error(void);

/**
 * Build a preset: `so3`, `sl2`, `precotangent:N`, `seqtriple:N[:weights=unit]`.
 *
 * # Safety
 * `name` must be a valid C string and `out` a valid pointer.
 */
enum ApStatus ap_model_from_preset(const char *name, struct ApModel **out);

/**
 * Load a model from its JSON description.
 *
 * # Safety
 * `json` must be a valid C string and `out` a valid pointer.
 */
enum ApStatus ap_model_from_json(const char *json, struct ApModel **out);

/**
 * # Safety
 * `model` must come from `ap_model_from_*` and not be used afterwards.
 */
void ap_model_free(struct ApModel *model);

/**
 * # Safety
 * `model` must be a live handle or null (returns 0).
 */
size_t ap_model_base_dim(const struct ApModel *model);

/**
 * # Safety
 * `model` must be a live handle or null (returns 0).
 */
size_t ap_model_fiber_dim(const struct ApModel *model);

/**
 * Parse a function from the JSON expression format.
 *
 * # Safety
 * `json` must be a valid C string and `out` a valid pointer.
 */
enum ApStatus ap_function_from_json(const char *json, struct ApFunction **out);

/**
 * # Safety
 * `f` must come from `ap_function_from_json` and not be used afterwards.
 */
void ap_function_free(struct ApFunction *f);

/**
 * `{f, g}(m, phi)`. `m` has `base_dim` entries and `phi` has `fiber_dim`.
 *
 * # Safety
 * All pointers must be valid for the model's dimensions.
 */
enum ApStatus ap_poisson_bracket(const struct ApModel *model,
                                 const struct ApFunction *f,
                                 const struct ApFunction *g,
                                 const double *m,
                                 const double *phi,
                                 double *out);

/**
 * Value and partial derivatives of `f` at `(m, phi)`; `d_m` and `d_phi`
 * receive `base_dim` and `fiber_dim` entries.
 *
 * # Safety
 * All pointers must be valid for the model's dimensions.
 */
enum ApStatus ap_jet(const struct ApModel *model,
                     const struct ApFunction *f,
                     const double *m,
                     const double *phi,
                     double *value,
                     double *d_m,
                     double *d_phi);

/**
 * Sharp map at `(m, phi)` applied to the covector `(mu, x)`; writes
 * `v` (`base_dim`) and `psi` (`fiber_dim`).
 *
 * # Safety
 * All pointers must be valid for the model's dimensions.
 */
enum ApStatus ap_sharp(const struct ApModel *model,
                       const double *m,
                       const double *phi,
                       const double *mu,
                       const double *x,
                       double *v,
                       double *psi);

/**
 * Run the identity suite; `*report` receives the JSON report and
 * `*all_pass` whether every check passed.
 *
 * # Safety
 * `model` must be live; `report` and `all_pass` must be valid pointers.
 */
enum ApStatus ap_verify(const struct ApModel *model,
                        uint64_t seed,
                        size_t draws,
                        char **report,
                        bool *all_pass);

/**
 * Recover anchor and bracket from the model's Poisson structure and
 * compare; same outputs as [`ap_verify`].
 *
 * # Safety
 * `model` must be live; `report` and `all_pass` must be valid pointers.
 */
enum ApStatus ap_roundtrip(const struct ApModel *model,
                           uint64_t seed,
                           char **report,
                           bool *all_pass);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ap_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALGEBROID_POISSON_H */
