#ifndef EXPDG_H
#define EXPDG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Interface flux for [`expdg_advection_matrix`].
typedef enum ExpdgFlux {
  EXPDG_FLUX_CENTRAL = 0,
  EXPDG_FLUX_UPWIND = 1,
} ExpdgFlux;

// Status codes returned by every function.
typedef enum ExpdgStatus {
  EXPDG_STATUS_OK = 0,
  // A required pointer argument was null.
  EXPDG_STATUS_NULL_POINTER = 1,
  // Invalid configuration, preset name or argument.
  EXPDG_STATUS_CONFIG = 2,
  // The solver hit a numerical safeguard (non-finite state, failed factorisation).
  EXPDG_STATUS_NUMERICAL = 3,
  // A string argument was not valid UTF-8.
  EXPDG_STATUS_UTF8 = 4,
  // The caller's buffer is too small; the required length was written back.
  EXPDG_STATUS_BUFFER = 5,
  // An internal panic was caught.
  EXPDG_STATUS_PANIC = 6,
} ExpdgStatus;

// Opaque simulation handle.
typedef struct ExpdgSimulation ExpdgSimulation;

// Diagnostics of the current state.
typedef struct ExpdgDiagnostics {
  double time;
  size_t steps;
  double electric_energy;
  double magnetic_energy;
  double kinetic_energy;
  double total_energy;
  double mass;
  double poisson_residual;
  double e1_l2;
  double e2_l2;
  double b_l2;
} ExpdgDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a simulation from a built-in preset such as `"landau"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum ExpdgStatus expdg_simulation_from_preset(const char *name, struct ExpdgSimulation **out);

// Creates a simulation from the text of a TOML scenario file.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum ExpdgStatus expdg_simulation_from_toml(const char *toml, struct ExpdgSimulation **out);

// Advances the simulation by `steps` time steps.
//
// # Safety
// `sim` must be a live handle.
enum ExpdgStatus expdg_simulation_step(struct ExpdgSimulation *sim, size_t steps);

// Writes the current simulation time.
//
// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum ExpdgStatus expdg_simulation_time(const struct ExpdgSimulation *sim, double *out);

// Writes the diagnostics of the current state.
//
// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum ExpdgStatus expdg_simulation_diagnostics(const struct ExpdgSimulation *sim,
                                              struct ExpdgDiagnostics *out);

// Releases a handle. Null is ignored.
//
// # Safety
// `sim` must be null or a handle not yet freed.
void expdg_simulation_free(struct ExpdgSimulation *sim);

// Writes the DG advection matrix (approximating `-d/dx`) for `cells` cells of
// degree `degree` on `[0, length)` in row-major order.
//
// `len` is the capacity of `buf` in doubles; `dim` receives the matrix size.
// If `buf` is null or too small, `Buffer` is returned after writing `dim`.
//
// # Safety
// `buf` must be null or valid for `len` writes; `dim` must be a valid pointer.
enum ExpdgStatus expdg_advection_matrix(size_t cells,
                                        size_t degree,
                                        double length,
                                        enum ExpdgFlux flux,
                                        double *buf,
                                        size_t len,
                                        size_t *dim);

// Copies the last error message of this thread into `buf` as a NUL-terminated
// string. `needed` (if non-null) receives the size including the terminator.
// Returns `Buffer` when `buf` is null or shorter than that.
//
// # Safety
// `buf` must be null or valid for `len` writes; `needed` must be null or valid.
enum ExpdgStatus expdg_last_error_message(char *buf, size_t len, size_t *needed);

// Library version as a static NUL-terminated string.
const char *expdg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPDG_H */
