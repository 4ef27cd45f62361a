#ifndef EVOBENCH_H
#define EVOBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum EvobenchStatus {
  EVOBENCH_STATUS_OK = 0,
  EVOBENCH_STATUS_NULL_POINTER = 1,
  EVOBENCH_STATUS_INVALID_UTF8 = 2,
  EVOBENCH_STATUS_SYNTAX = 3,
  EVOBENCH_STATUS_PROFILE = 4,
  EVOBENCH_STATUS_UNKNOWN_OPERATOR = 5,
  EVOBENCH_STATUS_NOT_APPLICABLE = 6,
  EVOBENCH_STATUS_OPERATOR = 7,
  EVOBENCH_STATUS_PANIC = 8,
} EvobenchStatus;

// A reference profile of complexity and readability thresholds.
typedef struct EvobenchProfile EvobenchProfile;

// A parsed program unit.
typedef struct EvobenchUnit EvobenchUnit;

// Relative complexity and relative readability, both in [0, 1].
typedef struct EvobenchFitness {
  double rc;
  double rr;
} EvobenchFitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *evobench_version(void);

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *evobench_last_error(void);

// Parses a single-file unit from Python source.
//
// # Safety
// `id` and `source` must be NUL-terminated strings; `out` must be writable.
enum EvobenchStatus evobench_unit_parse(const char *id,
                                        const char *source,
                                        struct EvobenchUnit **out);

// # Safety
// `unit` must be null or a handle from this library not yet freed.
void evobench_unit_free(struct EvobenchUnit *unit);

// Emits the unit's entry source file.
//
// # Safety
// `unit` must be a live handle; `out` must be writable.
enum EvobenchStatus evobench_unit_source(const struct EvobenchUnit *unit, char **out);

// Loads the profile shipped with the library.
//
// # Safety
// `out` must be writable.
enum EvobenchStatus evobench_profile_shipped(struct EvobenchProfile **out);

// Parses a profile from its JSON form.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum EvobenchStatus evobench_profile_from_json(const char *json, struct EvobenchProfile **out);

// # Safety
// `profile` must be null or a handle from this library not yet freed.
void evobench_profile_free(struct EvobenchProfile *profile);

// Relative complexity and readability of a unit under a profile.
//
// # Safety
// `unit` and `profile` must be live handles; `out` must be writable.
enum EvobenchStatus evobench_measure(const struct EvobenchUnit *unit,
                                     const struct EvobenchProfile *profile,
                                     struct EvobenchFitness *out);

// All metric vectors and fitness of a unit as a JSON object.
//
// # Safety
// `unit` and `profile` must be live handles; `out` must be writable.
enum EvobenchStatus evobench_measure_json(const struct EvobenchUnit *unit,
                                          const struct EvobenchProfile *profile,
                                          char **out);

// Number of locations where the operator named `code` (e.g. `"S5"`)
// applies.
//
// # Safety
// `unit` must be a live handle; `code` a NUL-terminated string; `out`
// writable.
enum EvobenchStatus evobench_operator_locations(const struct EvobenchUnit *unit,
                                                const char *code,
                                                uintptr_t *out);

// Applies operator `code` at location `index` with generator seed `seed`,
// returning a new unit; the input handle is left unchanged.
//
// # Safety
// `unit` must be a live handle; `code` a NUL-terminated string; `out`
// writable.
enum EvobenchStatus evobench_apply_operator(const struct EvobenchUnit *unit,
                                            const char *code,
                                            uintptr_t index,
                                            uint64_t seed,
                                            struct EvobenchUnit **out);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void evobench_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOBENCH_H */
