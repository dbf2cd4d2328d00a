#ifndef NHSSH_H
#define NHSSH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Phase labels exposed over the ABI; mirrors the library enum.
 */
typedef enum NhsshPhase {
  PtSymmetricAlpha = 0,
  PtSymmetricBeta = 1,
  BrokenPhaseI = 2,
  BrokenPhaseII = 3,
  CriticalBoundary = 4,
} NhsshPhase;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum NhsshStatus {
  Ok = 0,
  NullPointer = 1,
  InvalidArgument = 2,
  NearDefective = 3,
  SelfOrthogonal = 4,
  DimensionMismatch = 5,
  ExceptionalPoint = 6,
  GaugeSingular = 7,
  EchoZero = 8,
  LogSingular = 9,
  DegenerateRatio = 10,
  NotCritical = 11,
  Unwrappable = 12,
  NonFinite = 13,
} NhsshStatus;

/**
 * Opaque quench analyzer.
 */
typedef struct NhsshQuench NhsshQuench;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a quench analyzer. `kpoints`/`tpoints` fix the momentum and time
 * grids; momenta are midpoint samples of [0, pi], times span [0, t_max].
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum NhsshStatus nhssh_quench_new(double q,
                                  double eta,
                                  double qf,
                                  double etaf,
                                  uintptr_t kpoints,
                                  uintptr_t tpoints,
                                  double t_max,
                                  struct NhsshQuench **out);

/**
 * Release a handle created by [`nhssh_quench_new`]. Null is a no-op.
 *
 * # Safety
 * `h` must be null or a pointer returned by `nhssh_quench_new` that has
 * not been freed yet.
 */
void nhssh_quench_free(struct NhsshQuench *h);

/**
 * Number of time samples produced by the series entry points.
 *
 * # Safety
 * `h` must be a live handle.
 */
uintptr_t nhssh_quench_tpoints(const struct NhsshQuench *h);

/**
 * Number of momentum samples produced by the per-mode entry points.
 *
 * # Safety
 * `h` must be a live handle.
 */
uintptr_t nhssh_quench_kpoints(const struct NhsshQuench *h);

/**
 * Rate function series. All arrays must hold `nhssh_quench_tpoints(h)`
 * elements.
 *
 * # Safety
 * `h` must be a live handle; the out arrays must be valid for `len` writes.
 */
enum NhsshStatus nhssh_rate_function(const struct NhsshQuench *h,
                                     double *out_t,
                                     double *out_re,
                                     double *out_im,
                                     uintptr_t len);

/**
 * Dynamical winding number series; `out_valid` is 1 where the sample is
 * well-defined. All arrays must hold `nhssh_quench_tpoints(h)` elements.
 *
 * # Safety
 * `h` must be a live handle; the out arrays must be valid for `len` writes.
 */
enum NhsshStatus nhssh_winding_number(const struct NhsshQuench *h,
                                      double *out_t,
                                      double *out_re_nu,
                                      uint8_t *out_valid,
                                      uintptr_t len);

/**
 * Fisher-zero branch `l` sampled over the momentum grid. All arrays must
 * hold `nhssh_quench_kpoints(h)` elements.
 *
 * # Safety
 * `h` must be a live handle; the out arrays must be valid for `len` writes.
 */
enum NhsshStatus nhssh_fisher_zeros(const struct NhsshQuench *h,
                                    int64_t l,
                                    double *out_k,
                                    double *out_re_z,
                                    double *out_im_z,
                                    uintptr_t len);

/**
 * Critical momenta of the quench. Writes at most `cap` modes and stores
 * the number found in `out_count` (which may exceed `cap`).
 *
 * # Safety
 * `h` must be a live handle; `out_modes` valid for `cap` writes,
 * `out_count` for one.
 */
enum NhsshStatus nhssh_critical_modes(const struct NhsshQuench *h,
                                      double *out_modes,
                                      uintptr_t cap,
                                      uintptr_t *out_count);

/**
 * Critical times `t_{c,0..=l_max}` of the mode at momentum `k`.
 * `out_times` must hold `l_max + 1` elements.
 *
 * # Safety
 * `h` must be a live handle; `out_times` valid for `l_max + 1` writes.
 */
enum NhsshStatus nhssh_critical_times(const struct NhsshQuench *h,
                                      double k,
                                      uintptr_t l_max,
                                      double *out_times);

/**
 * Mode overlap `kappa_k` for an arbitrary quench, without a handle.
 *
 * # Safety
 * `out_re` and `out_im` must each be valid for one write.
 */
enum NhsshStatus nhssh_kappa(double q,
                             double eta,
                             double qf,
                             double etaf,
                             double k,
                             double *out_re,
                             double *out_im);

/**
 * Phase label of a parameter point.
 */
enum NhsshPhase nhssh_classify_phase(double q, double eta);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nhssh_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NHSSH_H */
