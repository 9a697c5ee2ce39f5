#ifndef OAM_SWIPT_H
#define OAM_SWIPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every exported function.
 */
typedef enum {
  OS_STATUS_OK = 0,
  OS_STATUS_NULL_POINTER = 1,
  OS_STATUS_INVALID_INPUT = 2,
  OS_STATUS_DEGENERATE_GEOMETRY = 3,
  OS_STATUS_STRUCTURE_VIOLATION = 4,
  OS_STATUS_ILL_CONDITIONED = 5,
  OS_STATUS_UNSUPPORTED_MODEL = 6,
  OS_STATUS_CONFIG = 7,
  OS_STATUS_IO = 8,
  OS_STATUS_BUFFER_TOO_SMALL = 9,
  OS_STATUS_PANIC = 10,
} OsStatus;

/**
 * Transceiver architecture selector.
 */
typedef enum {
  OS_BASELINE_OAM = 0,
  OS_BASELINE_MIMO_SVD = 1,
  OS_BASELINE_MIMO_ZF = 2,
  OS_BASELINE_SISO = 3,
} OsBaseline;

/**
 * Opaque field-map handle.
 */
typedef struct OsField OsField;

/**
 * Opaque link handle.
 */
typedef struct OsLink OsLink;

/**
 * Opaque rate-energy region handle.
 */
typedef struct OsRegion OsRegion;

/**
 * Link parameters. Powers are per-Hz densities in dBm/Hz.
 */
typedef struct {
  size_t elements;
  double radius_m;
  double distance_m;
  double frequency_hz;
  double tx_power_dbm_per_hz;
  double noise_dbm_per_hz;
  /**
   * σ_cov² / σ².
   */
  double conversion_noise_ratio;
  double conversion_efficiency;
  double bandwidth_hz;
  double lateral_offset_m;
  double tilt_deg;
} OsLinkParams;

/**
 * One rate-energy pair.
 */
typedef struct {
  /**
   * bits/s/Hz
   */
  double rate;
  /**
   * W/Hz
   */
  double harvested;
} OsPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *os_last_error_message(void);

/**
 * Fills `out` with the library defaults (8 elements, 0.1 m, 5 m, 28 GHz, ...).
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
OsStatus os_link_params_default(OsLinkParams *out);

/**
 * Builds a link. On success `*out` owns a handle for [`os_link_free`].
 *
 * # Safety
 * `params` must be NULL or point to a valid struct; `out` must be NULL or valid for writes.
 */
OsStatus os_link_new(const OsLinkParams *params, OsLink **out);

/**
 * Releases a link. NULL is a no-op.
 *
 * # Safety
 * `link` must be NULL or a handle from [`os_link_new`] not yet freed.
 */
void os_link_free(OsLink *link);

/**
 * Number of transmit elements (and OAM modes).
 *
 * # Safety
 * `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_link_mode_count(const OsLink *link, size_t *out);

/**
 * Writes the power gains |G[l,l]|² of the mode channel into `gains[0..N]`.
 *
 * # Safety
 * `gains` must be valid for `len` writes.
 */
OsStatus os_link_mode_gains(const OsLink *link, double *gains, size_t len);

/**
 * Evaluates one split vector. `len` must match the model dimension
 * (N for OAM and MIMO-SVD, 1 for MIMO-ZF and SISO).
 *
 * # Safety
 * `rho` must be valid for `len` reads; `out` must be NULL or valid for writes.
 */
OsStatus os_link_evaluate(const OsLink *link,
                          OsBaseline baseline,
                          const double *rho,
                          size_t len,
                          OsPoint *out);

/**
 * Monte Carlo region trace. Results are identical for `parallel` 0 and 1.
 *
 * # Safety
 * `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_link_trace_monte_carlo(const OsLink *link,
                                   OsBaseline baseline,
                                   size_t samples,
                                   uint64_t seed,
                                   size_t grid_size,
                                   bool parallel,
                                   OsRegion **out);

/**
 * Lagrangian upper-envelope trace; fails with `UnsupportedModel` when the
 * streams interfere.
 *
 * # Safety
 * `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_link_trace_lagrangian(const OsLink *link,
                                  OsBaseline baseline,
                                  size_t grid_size,
                                  OsRegion **out);

/**
 * Number of points on the region's energy grid.
 *
 * # Safety
 * `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_region_len(const OsRegion *region, size_t *out);

/**
 * Grid point `index`: harvested threshold and best rate.
 *
 * # Safety
 * `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_region_point(const OsRegion *region, size_t index, OsPoint *out);

/**
 * Best rate meeting an arbitrary harvested-power threshold (0 past Q_max).
 *
 * # Safety
 * `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_region_rate_at(const OsRegion *region, double threshold, double *out);

/**
 * Largest harvestable power of the region.
 *
 * # Safety
 * `region` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_region_q_max(const OsRegion *region, double *out);

/**
 * Releases a region. NULL is a no-op.
 *
 * # Safety
 * `region` must be NULL or a handle not yet freed.
 */
void os_region_free(OsRegion *region);

/**
 * Intensity map of mode `mode` on the plane at `z`, spanning
 * `[-extent, extent]²` with `resolution²` samples, using the link's array
 * and carrier.
 *
 * # Safety
 * `link` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_field_compute(const OsLink *link,
                          size_t mode,
                          double z,
                          double extent,
                          size_t resolution,
                          OsField **out);

/**
 * Copies the row-major (y outer, x inner) relative intensities into `buf`,
 * which must hold `resolution²` values.
 *
 * # Safety
 * `buf` must be valid for `len` writes.
 */
OsStatus os_field_intensity(const OsField *field, double *buf, size_t len);

/**
 * Radius (m) of the brightest ring.
 *
 * # Safety
 * `field` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_field_ring_radius(const OsField *field, double *out);

/**
 * Relative intensity integrated over a centred disc of `aperture_radius` (m²).
 *
 * # Safety
 * `field` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
OsStatus os_field_captured_power(const OsField *field, double aperture_radius, double *out);

/**
 * Releases a field map. NULL is a no-op.
 *
 * # Safety
 * `field` must be NULL or a handle not yet freed.
 */
void os_field_free(OsField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OAM_SWIPT_H */
