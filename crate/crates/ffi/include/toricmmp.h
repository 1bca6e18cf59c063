#ifndef TORICMMP_H
#define TORICMMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ToricStatus {
  TORIC_STATUS_OK = 0,
  TORIC_STATUS_NULL_POINTER = 1,
  TORIC_STATUS_PARSE_ERROR = 2,
  TORIC_STATUS_INVALID_INPUT = 3,
  TORIC_STATUS_COMPUTATION_ERROR = 4,
  TORIC_STATUS_PANIC = 5,
} ToricStatus;

// An invariant divisor on a specific fan.
typedef struct ToricDivisor ToricDivisor;

// A validated fan.
typedef struct ToricFan ToricFan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty after a success. Valid until the next call.
const char *toric_last_error(void);

// Engine version as a static string.
const char *toric_version(void);

// # Safety
// `s` must be null or a string returned by this library.
void toric_string_free(char *s);

// Parses a fan document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum ToricStatus toric_fan_from_json(const char *json, struct ToricFan **out);

// # Safety
// `fan` must be null or a handle from `toric_fan_from_json` not yet freed.
void toric_fan_free(struct ToricFan *fan);

// # Safety
// `fan` must be a live handle and `dim`, `rays` valid pointers.
enum ToricStatus toric_fan_shape(const struct ToricFan *fan, size_t *dim, size_t *rays);

// Completeness, simpliciality and projectivity of a fan.
//
// # Safety
// `fan` must be a live handle; the out pointers must be valid.
enum ToricStatus toric_fan_properties(const struct ToricFan *fan,
                                      bool *complete,
                                      bool *simplicial,
                                      bool *projective);

// Picard number rho = dim N^1(X).
//
// # Safety
// `fan` must be a live handle and `rho` a valid pointer.
enum ToricStatus toric_fan_picard_number(const struct ToricFan *fan, size_t *rho);

// Parses a divisor document against a fan.
//
// # Safety
// `fan` must be a live handle, `json` a NUL-terminated string, `out` a valid pointer.
enum ToricStatus toric_divisor_from_json(const struct ToricFan *fan,
                                         const char *json,
                                         struct ToricDivisor **out);

// # Safety
// `d` must be null or a handle from `toric_divisor_from_json` not yet freed.
void toric_divisor_free(struct ToricDivisor *d);

// Singularity verdict of (X, boundary) as a string ("terminal", "canonical", "klt", "lc", ...).
// A null boundary means the zero divisor.
//
// # Safety
// `fan` must be a live handle, `boundary` null or live, `verdict` a valid pointer.
enum ToricStatus toric_classify_pair(const struct ToricFan *fan,
                                     const struct ToricDivisor *boundary,
                                     char **verdict);

// Runs the (K + boundary)-MMP. Writes the number of steps, whether it ended in a Mori fibre space,
// and (when `final_fan` is not null) the last fan as a JSON document.
//
// # Safety
// `fan` must be a live handle, `boundary` null or live; `steps` and `fibre_space` valid pointers;
// `final_fan` null or valid.
enum ToricStatus toric_run_mmp(const struct ToricFan *fan,
                               const struct ToricDivisor *boundary,
                               size_t *steps,
                               bool *fibre_space,
                               char **final_fan);

// h^i(X, O(D)) for a complete fan.
//
// # Safety
// `fan` and `d` must be live handles and `h` a valid pointer.
enum ToricStatus toric_cohomology(const struct ToricFan *fan,
                                  const struct ToricDivisor *d,
                                  size_t degree,
                                  size_t *h);

// Runs the assertions of a built-in example.
//
// # Safety
// `id` must be a NUL-terminated string and `passed` a valid pointer.
enum ToricStatus toric_verify_example(const char *id, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORICMMP_H */
