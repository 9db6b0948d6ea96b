#ifndef TOLEDO_H
#define TOLEDO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ToledoStatus {
  TOLEDO_STATUS_OK = 0,
  TOLEDO_STATUS_NULL_POINTER = 1,
  TOLEDO_STATUS_INVALID_UTF8 = 2,
  // Malformed or mathematically invalid input.
  TOLEDO_STATUS_INVALID_INPUT = 3,
  // A numerical procedure could not certify its answer.
  TOLEDO_STATUS_NUMERIC_FAILURE = 4,
  TOLEDO_STATUS_PANIC = 5,
} ToledoStatus;

// Opaque handle to a validated representation.
typedef struct ToledoRepresentation ToledoRepresentation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *toledo_last_error(void);

// Library version as a static NUL-terminated string.
const char *toledo_version(void);

// Parse a representation from its JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
// The handle written to `out` must be released with
// [`toledo_representation_free`].
enum ToledoStatus toledo_representation_from_json(const char *json,
                                                  struct ToledoRepresentation **out);

// # Safety
// `rep` must be NULL or a handle from [`toledo_representation_from_json`]
// not yet freed.
void toledo_representation_free(struct ToledoRepresentation *rep);

// Rank n of the target group Sp(2n,R), or 0 for NULL.
//
// # Safety
// `rep` must be NULL or a live handle.
size_t toledo_representation_rank(const struct ToledoRepresentation *rep);

// Toledo invariant for the class of weight `kappa_w`.
//
// # Safety
// `rep` must be a live handle and `out` writable.
enum ToledoStatus toledo_invariant(const struct ToledoRepresentation *rep,
                                   int32_t kappa_w,
                                   uint32_t depth,
                                   double *out);

// Rotation number mod 1 of a 2n×2n symplectic matrix given row-major.
//
// # Safety
// `matrix` must point to 4n² doubles and `out` be writable.
enum ToledoStatus toledo_rot(const double *matrix, size_t n, int32_t kappa_w, double *out);

// Kashiwara–Maslov index of three Lagrangians, each a 2n×n row-major
// basis. Writes 2β, which is an integer.
//
// # Safety
// Each basis pointer must reference 2n² doubles and `twice_beta` be writable.
enum ToledoStatus toledo_maslov(const double *l1,
                                const double *l2,
                                const double *l3,
                                size_t n,
                                int64_t *twice_beta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOLEDO_H */
