#ifndef QUADEXT_H
#define QUADEXT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. The first four match the command-line exit codes.
typedef enum QxStatus {
  QX_STATUS_OK = 0,
  QX_STATUS_INVALID_INPUT = 1,
  QX_STATUS_VERIFICATION_FAILED = 2,
  QX_STATUS_DEGENERATE_Z = 3,
  QX_STATUS_NULL_POINTER = 4,
  QX_STATUS_INFEASIBLE = 5,
  QX_STATUS_INTERNAL = 6,
  QX_STATUS_PANIC = 7,
} QxStatus;

// Result of `qx_extend`.
typedef struct QxExtension QxExtension;

// A 2-polynomial on a subspace: basis rows plus the form in that basis.
typedef struct QxQuad QxQuad;

// A two-ellipsoid space `(ℝⁿ, Π₁, Π₂)`.
typedef struct QxSpace QxSpace;

// Norm with its sandwich certificate.
typedef struct QxNorm {
  double value;
  // Upper end of the bisection bracket, where the certificate holds.
  double upper;
  double alpha;
  double beta;
} QxNorm;

typedef struct QxVerification {
  double restriction_residual;
  double original_norm;
  double extended_norm;
  double sampled_lower_bound;
  // 1 if every check passed, 0 otherwise.
  int32_t passed;
} QxVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread (empty after a
// success). Valid until the next call into this library on the same thread.
const char *qx_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qx_version(void);

// Builds a space from two `n×n` positive-definite matrices.
//
// # Safety
// `pi1` and `pi2` must point to `n*n` doubles; `out` must be writable.
enum QxStatus qx_space_new(size_t n, const double *pi1, const double *pi2, struct QxSpace **out);

// # Safety
// `space` must be null or a handle from this library, not yet freed.
void qx_space_free(struct QxSpace *space);

// # Safety
// `space` must be null or a live handle.
size_t qx_space_dim(const struct QxSpace *space);

// Builds a 2-polynomial on the span of the `k` rows of `basis` (`k×n`) with
// the `k×k` matrix `form` in that basis.
//
// # Safety
// `basis` must point to `k*n` doubles, `form` to `k*k`; `out` must be writable.
enum QxStatus qx_quad_new(size_t n,
                          size_t k,
                          const double *basis,
                          const double *form,
                          struct QxQuad **out);

// # Safety
// `quad` must be null or a live handle.
void qx_quad_free(struct QxQuad *quad);

// Parses an instance document (the CLI's JSON format).
//
// # Safety
// `json` must be a NUL-terminated string; `space` and `quad` must be writable.
enum QxStatus qx_instance_from_json(const char *json, struct QxSpace **space, struct QxQuad **quad);

// Norm of `quad` in `space`. If `witness` is non-null it receives a vector
// of length `dim` attaining (nearly) the norm.
//
// # Safety
// Handles must be live; `out` writable; `witness` null or `dim` doubles.
enum QxStatus qx_norm(const struct QxSpace *space,
                      const struct QxQuad *quad,
                      double tol,
                      struct QxNorm *out,
                      double *witness);

// Norm-preserving extension of `quad` to the whole space.
//
// # Safety
// Handles must be live; `out` writable.
enum QxStatus qx_extend(const struct QxSpace *space,
                        const struct QxQuad *quad,
                        double tol,
                        struct QxExtension **out);

// # Safety
// `ext` must be null or a live handle.
void qx_extension_free(struct QxExtension *ext);

// # Safety
// `ext` must be null or a live handle.
size_t qx_extension_dim(const struct QxExtension *ext);

// Number of hyperplane steps taken.
//
// # Safety
// `ext` must be null or a live handle.
size_t qx_extension_steps(const struct QxExtension *ext);

// Copies the extended `dim×dim` matrix (row-major) into `out`, which holds
// `len` doubles.
//
// # Safety
// `ext` must be live; `out` must hold `len` doubles.
enum QxStatus qx_extension_matrix(const struct QxExtension *ext, double *out, size_t len);

// Norms of the original 2-polynomial and of its extension, and the
// restriction residual. Any output pointer may be null.
//
// # Safety
// `ext` must be live; non-null outputs must be writable.
enum QxStatus qx_extension_norms(const struct QxExtension *ext,
                                 double *original,
                                 double *extended,
                                 double *residual);

// Independent check of a candidate extension `btilde` (`dim×dim`,
// row-major). Returns `QX_STATUS_OK` when the check ran; see `out->passed`.
//
// # Safety
// Handles must be live; `btilde` must hold `dim*dim` doubles; `out` writable.
enum QxStatus qx_verify(const struct QxSpace *space,
                        const struct QxQuad *quad,
                        const double *btilde,
                        size_t samples,
                        uint64_t seed,
                        struct QxVerification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUADEXT_H */
