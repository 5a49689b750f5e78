#ifndef UNISHEAR_H
#define UNISHEAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum UnishearStatus {
  UnishearOk = 0,
  UnishearInvalidArgument = 1,
  UnishearBadConfig = 2,
  UnishearNonConvergence = 3,
  UnishearInternal = 4,
} UnishearStatus;

/**
 * Opaque frame-system handle.
 */
typedef struct UnishearSystem UnishearSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a frame system.  `preset` is `"wavelet"` or `"alpha<value>"`
 * (for example `"alpha1"`); `n` is the grid size (even power of two);
 * `scales` is the scale count J.  On success writes a handle the caller
 * must free with `unishear_system_free`.
 *
 * # Safety
 * `preset` must be a valid NUL-terminated string and `out` a valid
 * pointer.
 */
enum UnishearStatus unishear_system_new(const char *preset,
                                        uintptr_t n,
                                        uintptr_t scales,
                                        struct UnishearSystem **out);

/**
 * Free a handle created by `unishear_system_new`.  NULL is a no-op.
 *
 * # Safety
 * `handle` must be NULL or a pointer returned by `unishear_system_new`
 * that has not been freed.
 */
void unishear_system_free(struct UnishearSystem *handle);

/**
 * Grid size N of the handle, or 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live handle.
 */
uintptr_t unishear_system_n(const struct UnishearSystem *handle);

/**
 * Number of frame bands, or 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live handle.
 */
uintptr_t unishear_system_bands(const struct UnishearSystem *handle);

/**
 * Scale count J of the handle, or 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live handle.
 */
uintptr_t unishear_system_scales(const struct UnishearSystem *handle);

/**
 * Max deviation of the squared band weights from the exact partition of
 * unity, or NaN for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live handle.
 */
double unishear_tiling_residual(const struct UnishearSystem *handle);

/**
 * l1-analysis norm of an N*N image into `out`.
 *
 * # Safety
 * `image` must point to N*N doubles and `out` to one double.
 */
enum UnishearStatus unishear_l1_analysis_norm(const struct UnishearSystem *handle,
                                              const double *image,
                                              double *out);

/**
 * Analyze then synthesize an image (round trip through the frame);
 * useful as a self-test of the Parseval property from C.
 *
 * # Safety
 * `image` and `out` must each point to N*N doubles.
 */
enum UnishearStatus unishear_round_trip(const struct UnishearSystem *handle,
                                        const double *image,
                                        double *out);

/**
 * Inpaint an image whose vertical strip |x1| <= h (continuum units,
 * domain [-1/2, 1/2)) is missing.  `use_splitting` selects the exact
 * splitting solver over the shrinkage path.  Writes the recovered image
 * to `out` and, when non-NULL, the attained objective to
 * `objective_out`.  Returns `UnishearNonConvergence` when the iteration
 * limit was hit; `out` is still written in that case.
 *
 * # Safety
 * `image` and `out` must each point to N*N doubles; `objective_out`
 * must be NULL or point to one double.
 */
enum UnishearStatus unishear_inpaint(const struct UnishearSystem *handle,
                                     const double *image,
                                     double h,
                                     int use_splitting,
                                     double *out,
                                     double *objective_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* UNISHEAR_H */
