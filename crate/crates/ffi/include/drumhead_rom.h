#ifndef DRUMHEAD_ROM_H
#define DRUMHEAD_ROM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DrStatus {
  DR_STATUS_OK = 0,
  DR_STATUS_NULL_POINTER = 1,
  DR_STATUS_INVALID_INPUT = 2,
  DR_STATUS_NUMERICAL = 3,
  DR_STATUS_BUFFER_TOO_SMALL = 4,
  DR_STATUS_PANIC = 5,
} DrStatus;

// Coupled equilibrium and normal modes at one temperature.
typedef struct DrModes DrModes;

// Thickness-disordered chain of cells, calibrated once at construction.
typedef struct DrWaveguide DrWaveguide;

// Passband edges of the periodic reference lattice, rad/s.
typedef struct DrBandEdges {
  double temperature;
  double band1_min;
  double band1_max;
  double band2_min;
  double band2_max;
} DrBandEdges;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *dr_version(void);

// Message of the last failed call on this thread, or null. Free with
// [`dr_string_free`].
char *dr_last_error_message(void);

// # Safety
// `s` must come from this library or be null.
void dr_string_free(char *s);

// Builds an `n`-cell waveguide with thickness disorder `sigma_h` drawn from `seed`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum DrStatus dr_waveguide_new(size_t n, double sigma_h, uint64_t seed, struct DrWaveguide **out);

// # Safety
// `wg` must come from [`dr_waveguide_new`] or be null, and is invalid afterwards.
void dr_waveguide_free(struct DrWaveguide *wg);

// Number of cells, or 0 for a null handle.
//
// # Safety
// `wg` must be a live handle or null.
size_t dr_waveguide_cells(const struct DrWaveguide *wg);

// Relative thickness of each cell into `out[0..n]`.
//
// # Safety
// `wg` must be a live handle; `out` must hold `len` doubles.
enum DrStatus dr_waveguide_thickness(const struct DrWaveguide *wg, double *out, size_t len);

// Solves the coupled equilibrium at `temperature` K and its normal modes.
//
// # Safety
// `wg` must be a live handle; `out` must be writable.
enum DrStatus dr_modes_solve(const struct DrWaveguide *wg,
                             double temperature,
                             struct DrModes **out);

// # Safety
// `m` must come from [`dr_modes_solve`] or be null, and is invalid afterwards.
void dr_modes_free(struct DrModes *m);

// Number of modes (twice the cell count), or 0 for a null handle.
//
// # Safety
// `m` must be a live handle or null.
size_t dr_modes_count(const struct DrModes *m);

// Angular frequencies in ascending order, rad/s.
//
// # Safety
// `m` must be a live handle; `out` must hold `len` doubles.
enum DrStatus dr_modes_frequencies(const struct DrModes *m, double *out, size_t len);

// Participation ratio of each mode, in cells.
//
// # Safety
// `m` must be a live handle; `out` must hold `len` doubles.
enum DrStatus dr_modes_participation(const struct DrModes *m, double *out, size_t len);

// 1 if mode `index` (1-based) is extended, 0 if localized, -1 if out of range.
//
// # Safety
// `m` must be a live handle or null.
int32_t dr_modes_is_extended(const struct DrModes *m, size_t index);

// M-normalized shape of mode `index` (1-based), interleaved as v₁, h₁, v₂, h₂, ...
//
// # Safety
// `m` must be a live handle; `out` must hold `len` doubles.
enum DrStatus dr_modes_shape(const struct DrModes *m, size_t index, double *out, size_t len);

// Equilibrium deflection and rotation of each cell at the solved temperature.
//
// # Safety
// `m` must be a live handle; `u` and `ltheta` must each hold `len` doubles.
enum DrStatus dr_modes_equilibrium(const struct DrModes *m, double *u, double *ltheta, size_t len);

// Critical temperature of the reference cell, K.
//
// # Safety
// `out` must be writable.
enum DrStatus dr_critical_temperature(double *out);

// Passband edges of the periodic reference lattice at `temperature` K.
//
// # Safety
// `out` must be writable.
enum DrStatus dr_band_edges(double temperature, struct DrBandEdges *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRUMHEAD_ROM_H */
