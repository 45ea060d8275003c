#ifndef OSL_H
#define OSL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OslStatus {
  OSL_STATUS_OK = 0,
  OSL_STATUS_USAGE = 2,
  OSL_STATUS_DOMAIN = 3,
  OSL_STATUS_NOT_FOUND = 4,
  OSL_STATUS_NULL_ARGUMENT = 10,
  OSL_STATUS_PANIC = 11,
} OslStatus;

typedef enum OslRayMode {
  OSL_RAY_MODE_FULL = 0,
  OSL_RAY_MODE_THETA = 1,
} OslRayMode;

/**
 * A generated ray together with its recipe.
 */
typedef struct OslRay OslRay;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *osl_version(void);

/**
 * Copy of the last error message on this thread, or NULL.
 */
char *osl_last_error_message(void);

/**
 * # Safety
 * `s` is NULL or a string returned by this library, not yet freed.
 */
void osl_string_free(char *s);

/**
 * Row-major `T_ij` (1-based) of size `dim × dim` into `out[0..len]`.
 *
 * # Safety
 * `out` points to `len` writable `int64_t`.
 */
enum OslStatus osl_fold_matrix(size_t i, size_t j, size_t dim, int64_t *out, size_t len);

/**
 * Row-major `M_ij` (1-based), as [`osl_fold_matrix`].
 *
 * # Safety
 * `out` points to `len` writable `int64_t`.
 */
enum OslStatus osl_unfold_matrix(size_t i, size_t j, size_t dim, int64_t *out, size_t len);

/**
 * Brun expansion of a comma-separated rational vector, as JSON.
 *
 * # Safety
 * `vec` is a nul-terminated string; `out` is writable.
 */
enum OslStatus osl_brun_expand(const char *vec, size_t steps, char **out);

/**
 * Positive Brun matrix whose PF eigenvector is within `eps` (ℓ¹) of the target, as JSON.
 *
 * # Safety
 * `target` and `eps` are nul-terminated strings; `out` is writable.
 */
enum OslStatus osl_pf_sample(const char *target,
                             const char *eps,
                             size_t cap,
                             uint64_t seed,
                             char **out);

/**
 * # Safety
 * `out` is writable; the handle is released with [`osl_ray_free`].
 */
enum OslStatus osl_ray_generate(size_t rank,
                                size_t horizon,
                                enum OslRayMode mode,
                                struct OslRay **out);

/**
 * Parses a ray file and checks it against its regenerated recipe.
 *
 * # Safety
 * `json` is a nul-terminated string; `out` is writable.
 */
enum OslStatus osl_ray_load(const char *json, struct OslRay **out);

/**
 * # Safety
 * `ray` is NULL or a live handle from this library.
 */
void osl_ray_free(struct OslRay *ray);

/**
 * # Safety
 * `ray` is a live handle; `out` is writable.
 */
enum OslStatus osl_ray_to_json(const struct OslRay *ray, char **out);

/**
 * Number of folds, or 0 for NULL.
 *
 * # Safety
 * `ray` is NULL or a live handle.
 */
size_t osl_ray_fold_count(const struct OslRay *ray);

/**
 * Ray extent as a `p/q` string.
 *
 * # Safety
 * `ray` is a live handle; `out` is writable.
 */
enum OslStatus osl_ray_extent(const struct OslRay *ray, char **out);

/**
 * `log(vol_from / vol_to)` rounded to double.
 *
 * # Safety
 * `ray` is a live handle; `from`, `to` are nul-terminated; `out` is writable.
 */
enum OslStatus osl_ray_lipschitz(const struct OslRay *ray,
                                 const char *from,
                                 const char *to,
                                 double *out);

/**
 * Witness certificate on `[from, to]`, as JSON.
 *
 * # Safety
 * `ray` is a live handle; `from`, `to` are nul-terminated; `out` is writable.
 */
enum OslStatus osl_ray_certify(const struct OslRay *ray,
                               const char *from,
                               const char *to,
                               char **out);

/**
 * Density search for a point (JSON) or, with a non-NULL `turn` such as
 * `"+0,-1"`, for a tangent datum. The hit is written as JSON.
 *
 * # Safety
 * `ray` is a live handle; strings are nul-terminated (`turn` may be NULL); `out` is writable.
 */
enum OslStatus osl_ray_find(const struct OslRay *ray,
                            const char *target,
                            const char *turn,
                            const char *eps,
                            size_t budget,
                            char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OSL_H */
