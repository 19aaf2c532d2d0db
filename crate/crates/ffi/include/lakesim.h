#ifndef LAKESIM_H
#define LAKESIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Field selector for `lakesim_copy_field`.
 */
typedef enum {
  LAKE_FIELD_OMEGA = 0,
  LAKE_FIELD_STREAM = 1,
  LAKE_FIELD_FLUX = 2,
} LakeField;

typedef enum {
  LAKE_STATUS_OK = 0,
  LAKE_STATUS_NULL_POINTER = 1,
  LAKE_STATUS_INVALID_ARGUMENT = 2,
  LAKE_STATUS_CONFIG = 3,
  LAKE_STATUS_DOMAIN = 4,
  LAKE_STATUS_SOLVER = 5,
  /**
   * The run stopped early; the states computed so far are kept.
   */
  LAKE_STATUS_INCOMPLETE = 6,
  LAKE_STATUS_NOT_RUN = 7,
  LAKE_STATUS_OUT_OF_RANGE = 8,
  LAKE_STATUS_BUFFER_TOO_SMALL = 9,
  LAKE_STATUS_IO = 10,
  LAKE_STATUS_PANIC = 11,
} LakeStatus;

/**
 * Opaque simulation handle.
 */
typedef struct LakeSim LakeSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *lakesim_last_error(void);

/**
 * Parses a scenario given as TOML text. Relative table paths resolve against
 * the working directory.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
LakeStatus lakesim_from_toml(const char *toml, LakeSim **out);

/**
 * Reads a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
LakeStatus lakesim_from_file(const char *path, LakeSim **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must come from `lakesim_from_toml` or `lakesim_from_file` and not be
 * used afterwards.
 */
void lakesim_free(LakeSim *sim);

/**
 * Number of active cells.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
LakeStatus lakesim_cell_count(const LakeSim *sim, size_t *out);

/**
 * Writes the cell centers as x₀, y₀, x₁, y₁, ... into `xy`, which holds `len`
 * doubles.
 *
 * # Safety
 * `xy` must point to `len` writable doubles.
 */
LakeStatus lakesim_cell_centers(const LakeSim *sim, double *xy, size_t len);

/**
 * Runs the simulation, replacing any earlier trajectory. Returns `Incomplete`
 * when a step failed; the states before the failure remain readable.
 *
 * # Safety
 * `sim` must be a live handle not shared with another thread.
 */
LakeStatus lakesim_run(LakeSim *sim);

/**
 * Number of stored states of the last run.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
LakeStatus lakesim_state_count(const LakeSim *sim, size_t *out);

/**
 * Time of state `index`.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
LakeStatus lakesim_state_time(const LakeSim *sim, size_t index, double *out);

/**
 * Copies one cell field of state `index` into `values`, which holds `len`
 * doubles; at least the cell count is needed.
 *
 * # Safety
 * `values` must point to `len` writable doubles.
 */
LakeStatus lakesim_copy_field(const LakeSim *sim,
                              size_t index,
                              LakeField field,
                              double *values,
                              size_t len);

/**
 * Largest |ω| over all stored states of the last run.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
LakeStatus lakesim_sup_omega(const LakeSim *sim, double *out);

/**
 * The Gronwall bound 2e^{∫D}[y₀ + ∫B e^{−∫D}] at each of `n` sample times.
 *
 * # Safety
 * `times`, `d` and `b` must point to `n` readable doubles, `out` to `n`
 * writable ones.
 */
LakeStatus lakesim_gronwall_bound(double y0,
                                  const double *times,
                                  const double *d,
                                  const double *b,
                                  size_t n,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAKESIM_H */
