#ifndef LOBFORGE_H
#define LOBFORGE_H

#include <stddef.h>
#include <stdint.h>

// Number of auxiliary coefficients: three volatility terms followed by four
// volume terms.
#define LOBFORGE_AUX_LEN 7

typedef enum LobforgeStatus {
  LOBFORGE_STATUS_OK = 0,
  LOBFORGE_STATUS_NULL_POINTER = 1,
  LOBFORGE_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON or parameters that fail validation.
  LOBFORGE_STATUS_INVALID_ARGUMENT = 3,
  // The computation itself failed (degenerate day, failed fit, I/O).
  LOBFORGE_STATUS_RUNTIME = 4,
  // An output buffer is too small; the required length is reported.
  LOBFORGE_STATUS_BUFFER_TOO_SMALL = 5,
  LOBFORGE_STATUS_PANIC = 6,
} LobforgeStatus;

// A simulated trading day.
typedef struct LobforgeSimulation LobforgeSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *lobforge_version(void);

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next library call on the same thread.
const char *lobforge_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer returned through a `char **` output of this
// library that has not been freed yet.
void lobforge_string_free(char *s);

// Simulates one day. `params_json` holds the full agent-parameter object
// and `config_json` the simulation settings.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum LobforgeStatus lobforge_simulate(const char *params_json,
                                      const char *config_json,
                                      struct LobforgeSimulation **out);

// # Safety
// `h` must be null or a handle from [`lobforge_simulate`] not yet freed.
void lobforge_simulation_free(struct LobforgeSimulation *h);

// Number of snapshots (intervals plus one).
//
// # Safety
// `h` must be a live handle; `len` must be writable.
enum LobforgeStatus lobforge_simulation_len(const struct LobforgeSimulation *h, size_t *len);

// Copies mid-prices in ticks into `buf`; one-sided snapshots give NaN.
// When `cap` is too small nothing is copied, `*written` receives the
// required length and `BufferTooSmall` is returned.
//
// # Safety
// `buf` must hold `cap` doubles; `written` must be writable.
enum LobforgeStatus lobforge_simulation_mid_prices(const struct LobforgeSimulation *h,
                                                   double *buf,
                                                   size_t cap,
                                                   size_t *written);

// Writes the day to `dir` in the CLI's result layout.
//
// # Safety
// `h` must be a live handle; `dir` NUL-terminated.
enum LobforgeStatus lobforge_simulation_save(const struct LobforgeSimulation *h, const char *dir);

// Fits both auxiliary models to the day sampled every `delta_minutes` and
// writes the [`LOBFORGE_AUX_LEN`] coefficients to `out`.
//
// # Safety
// `h` must be a live handle; `out` must hold `LOBFORGE_AUX_LEN` doubles.
enum LobforgeStatus lobforge_simulation_aux_coefficients(const struct LobforgeSimulation *h,
                                                         uint32_t delta_minutes,
                                                         double *out);

// Runs the multi-objective calibration against `target` (length
// [`LOBFORGE_AUX_LEN`]) and returns the full report as JSON in `*report_json`.
// `setup_json` is a bounds file; `search_json` may be null for defaults.
//
// # Safety
// String arguments NUL-terminated; `target` holds `LOBFORGE_AUX_LEN`
// doubles; `report_json` writable.
enum LobforgeStatus lobforge_calibrate(const char *setup_json,
                                       const double *target,
                                       const char *search_json,
                                       char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOBFORGE_H */
