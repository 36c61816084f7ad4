#ifndef HEATCUT_H
#define HEATCUT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  HC_STATUS_OK = 0,
  HC_STATUS_NULL_POINTER = 1,
  HC_STATUS_INVALID_ARGUMENT = 2,
  HC_STATUS_INVALID_MODEL = 3,
  HC_STATUS_INVALID_POINT = 4,
  HC_STATUS_ON_CUT_LOCUS = 5,
  HC_STATUS_NOT_PRINCIPAL = 6,
  HC_STATUS_NUMERICAL = 7,
  HC_STATUS_PANIC = 8,
} HcStatus;

typedef enum {
  HC_LABEL_C = 0,
  HC_LABEL_P = 1,
  HC_LABEL_R = 2,
} HcLabel;

/**
 * Opaque model handle.
 */
typedef struct HcModel HcModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or NULL. Valid until the next failing call.
 */
const char *hc_last_error_message(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
HcStatus hc_model_circle(double radius, HcModel **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
HcStatus hc_model_sphere(size_t dim, double radius, HcModel **out);

/**
 * # Safety
 * `periods` must point to `n` doubles; `out` must be valid for writes.
 */
HcStatus hc_model_torus(const double *periods, size_t n, HcModel **out);

/**
 * Model from its JSON description, e.g. `{"model":"sphere","dim":2}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
HcStatus hc_model_from_json(const char *json, HcModel **out);

/**
 * # Safety
 * `m` must come from an `hc_model_*` constructor and not be freed twice. NULL is ignored.
 */
void hc_model_free(HcModel *m);

/**
 * Number of coordinates of a point (`n + 1` on `S^n`).
 *
 * # Safety
 * `m` must be a live handle; `out` must be valid for writes.
 */
HcStatus hc_model_ambient_dim(const HcModel *m, size_t *out);

/**
 * # Safety
 * `x`, `y` must point to `len` doubles; `out` must be valid for writes.
 */
HcStatus hc_distance(const HcModel *m, const double *x, const double *y, size_t len, double *out);

/**
 * `p_t(x,y)` and its logarithm; either out-pointer may be NULL.
 *
 * # Safety
 * `x`, `y` must point to `len` doubles; non-NULL outputs must be valid for writes.
 */
HcStatus hc_heat_kernel(const HcModel *m,
                        double t,
                        const double *x,
                        const double *y,
                        size_t len,
                        double *out_value,
                        double *out_log);

/**
 * `E_t(x,y) = −t log p_t(x,y)`.
 *
 * # Safety
 * `x`, `y` must point to `len` doubles; `out` must be valid for writes.
 */
HcStatus hc_energy_t(const HcModel *m,
                     double t,
                     const double *x,
                     const double *y,
                     size_t len,
                     double *out);

/**
 * `∇²_{A,A} E_t(x,·)` at `y`; `a` is projected onto `T_yM`.
 *
 * # Safety
 * `x`, `y`, `a` must point to `len` doubles; `out` must be valid for writes.
 */
HcStatus hc_hess_energy_t(const HcModel *m,
                          double t,
                          const double *x,
                          const double *y,
                          const double *a,
                          size_t len,
                          double *out);

/**
 * Limit of `t·∇²_{A,A}E_t(N,S)` on the unit `S^n`, `|A| = 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
HcStatus hc_sphere_antipodal_hessian(size_t n, double *out);

/**
 * C/P/R label and cut distance of the unit direction `theta` at `x`.
 *
 * # Safety
 * `x`, `theta` must point to `len` doubles; non-NULL outputs must be valid for writes.
 */
HcStatus hc_classify_theta(const HcModel *m,
                           const double *x,
                           const double *theta,
                           size_t len,
                           HcLabel *out_label,
                           double *out_cut_distance);

/**
 * `ρ(θ)` for a direction in P, with `A` given at the cut point.
 *
 * # Safety
 * `x`, `theta`, `a` must point to `len` doubles; `out` must be valid for writes.
 */
HcStatus hc_rho_on_p(const HcModel *m,
                     const double *x,
                     const double *theta,
                     const double *a,
                     size_t len,
                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEATCUT_H */
