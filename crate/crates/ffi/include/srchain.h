#ifndef SRCHAIN_H
#define SRCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SrRegion {
  SR_REGION_U0 = 0,
  SR_REGION_U1 = 1,
  SR_REGION_U2 = 2,
} SrRegion;

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_PARAMETER = 2,
  SR_STATUS_DEGENERATE_CHAIN = 3,
  SR_STATUS_NOT_FOUND = 4,
  SR_STATUS_BRACKET_FAILURE = 5,
  SR_STATUS_AMBIGUOUS = 6,
  SR_STATUS_BLOW_UP = 7,
  SR_STATUS_INTERNAL = 8,
  SR_STATUS_PANIC = 9,
} SrStatus;

/**
 * Opaque chain parameter set.
 */
typedef struct SrParams SrParams;

/**
 * Opaque periodic stationary law.
 */
typedef struct SrStationary SrStationary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *sr_last_error_message(void);

/**
 * Creates a parameter set. `shallow` and `deep` are the well depths `v < V`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum SrStatus sr_params_new(double p,
                            double q,
                            double shallow,
                            double deep,
                            uint64_t half_period,
                            struct SrParams **out);

/**
 * # Safety
 * `params` must be null or a handle from [`sr_params_new`] not yet freed.
 */
void sr_params_free(struct SrParams *params);

/**
 * Converts a noise intensity to `x = exp(-1/eps)`; `eps = INFINITY` gives 1.
 *
 * # Safety
 * `out_x` must be null or valid for writing.
 */
enum SrStatus sr_eps_to_x(double eps, double *out_x);

/**
 * Spectral power amplification from the closed form.
 *
 * # Safety
 * `params` must be a live handle; `out_eta` must be valid for writing.
 */
enum SrStatus sr_spa(const struct SrParams *params, double x, double *out_eta);

/**
 * Spectral power amplification by summation over the stationary law.
 *
 * # Safety
 * As for [`sr_spa`].
 */
enum SrStatus sr_spa_from_distribution(const struct SrParams *params, double x, double *out_eta);

/**
 * Computes the periodic stationary law; free it with [`sr_stationary_free`].
 *
 * # Safety
 * `params` must be a live handle; `out` must be valid for writing.
 */
enum SrStatus sr_stationary_new(const struct SrParams *params, double x, struct SrStationary **out);

/**
 * Number of phases `2m`; 0 for a null handle.
 *
 * # Safety
 * `dist` must be null or a live handle.
 */
size_t sr_stationary_len(const struct SrStationary *dist);

/**
 * Probabilities of `-1` and `+1` at phase `l`.
 *
 * # Safety
 * `dist` must be a live handle; out-pointers must be valid for writing.
 */
enum SrStatus sr_stationary_get(const struct SrStationary *dist,
                                size_t l,
                                double *out_minus,
                                double *out_plus);

/**
 * # Safety
 * `dist` must be null or a handle from [`sr_stationary_new`] not yet freed.
 */
void sr_stationary_free(struct SrStationary *dist);

/**
 * Region of the parameter square the set belongs to.
 *
 * # Safety
 * `params` must be a live handle; `out_region` must be valid for writing.
 */
enum SrStatus sr_classify(const struct SrParams *params, enum SrRegion *out_region);

/**
 * Noise level maximising the SPA. `SR_STATUS_NOT_FOUND` when the SPA is
 * increasing on the whole interval.
 *
 * # Safety
 * `params` must be a live handle; out-pointers must be valid for writing.
 */
enum SrStatus sr_find_resonance(const struct SrParams *params,
                                double *out_x_hat,
                                double *out_eta_max);

/**
 * Interior zero `(q/p)^(1/(V-v))` of the SPA; `SR_STATUS_NOT_FOUND` when absent.
 *
 * # Safety
 * As for [`sr_find_resonance`].
 */
enum SrStatus sr_find_zero(const struct SrParams *params, double *out_x_star);

/**
 * Large-`m` approximation of the resonance point.
 *
 * # Safety
 * As for [`sr_find_resonance`].
 */
enum SrStatus sr_asymptotic_resonance(const struct SrParams *params, double *out_x);

/**
 * Monte Carlo SPA estimate. `out_std_error` receives NaN for one replica.
 *
 * # Safety
 * `params` must be a live handle; out-pointers must be valid for writing.
 */
enum SrStatus sr_estimate_spa(const struct SrParams *params,
                              double x,
                              uint64_t seed,
                              uint64_t periods,
                              uint64_t burn_in,
                              size_t replicas,
                              double *out_eta_hat,
                              double *out_std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SRCHAIN_H */
