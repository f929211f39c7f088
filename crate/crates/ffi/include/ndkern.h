#ifndef NDKERN_H
#define NDKERN_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NdkStatus {
  NDK_STATUS_OK = 0,
  NDK_STATUS_NULL_POINTER = 1,
  NDK_STATUS_SHAPE = 2,
  NDK_STATUS_BROADCAST = 3,
  NDK_STATUS_INDEX = 4,
  NDK_STATUS_ARGUMENT = 5,
  NDK_STATUS_TYPE = 6,
  NDK_STATUS_READ_ONLY = 7,
  NDK_STATUS_REDUCTION = 8,
  NDK_STATUS_ALLOC = 9,
  NDK_STATUS_NOT_IMPLEMENTED = 10,
  NDK_STATUS_INIT = 11,
  NDK_STATUS_IO = 12,
  NDK_STATUS_FORMAT = 13,
  NDK_STATUS_BUFFER_TOO_SMALL = 14,
  NDK_STATUS_PANIC = 15,
} NdkStatus;

typedef enum NdkUfunc {
  NDK_UFUNC_ADD = 0,
  NDK_UFUNC_SUB = 1,
  NDK_UFUNC_MUL = 2,
  NDK_UFUNC_DIV = 3,
  NDK_UFUNC_ARCTAN2 = 4,
  NDK_UFUNC_MAXIMUM = 5,
  NDK_UFUNC_SIN = 6,
  NDK_UFUNC_LOG = 7,
  NDK_UFUNC_EXP = 8,
  NDK_UFUNC_NEG = 9,
} NdkUfunc;

typedef enum NdkDistribution {
  NDK_DISTRIBUTION_UNIFORM = 0,
  NDK_DISTRIBUTION_NORMAL = 1,
  NDK_DISTRIBUTION_EXPONENTIAL = 2,
  NDK_DISTRIBUTION_INTEGERS = 3,
} NdkDistribution;

typedef enum NdkElemType {
  NDK_ELEM_TYPE_BOOL = 0,
  NDK_ELEM_TYPE_INT64 = 1,
  NDK_ELEM_TYPE_FLOAT64 = 2,
} NdkElemType;

/**
 * Opaque array handle.
 */
typedef struct NdkArray NdkArray;

/**
 * Opaque random generator (PCG64 underneath).
 */
typedef struct NdkGenerator NdkGenerator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread (empty if none).
 */
const char *ndk_last_error(void);

enum NdkStatus ndk_array_from_f64(const double *data,
                                  size_t len,
                                  const size_t *dims,
                                  size_t ndim,
                                  struct NdkArray **out);

enum NdkStatus ndk_array_from_i64(const int64_t *data,
                                  size_t len,
                                  const size_t *dims,
                                  size_t ndim,
                                  struct NdkArray **out);

/**
 * Bool data as one byte per element; any nonzero byte is true.
 */
enum NdkStatus ndk_array_from_bool(const uint8_t *data,
                                   size_t len,
                                   const size_t *dims,
                                   size_t ndim,
                                   struct NdkArray **out);

void ndk_array_free(struct NdkArray *a);

/**
 * Returns -1 if `a` is null.
 */
int32_t ndk_array_elem_type(const struct NdkArray *a);

/**
 * Returns 0 if `a` is null.
 */
size_t ndk_array_ndim(const struct NdkArray *a);

/**
 * Returns 0 if `a` is null.
 */
size_t ndk_array_count(const struct NdkArray *a);

enum NdkStatus ndk_array_dims(const struct NdkArray *a, size_t *out, size_t cap);

/**
 * Byte strides, one per dimension.
 */
enum NdkStatus ndk_array_strides(const struct NdkArray *a, ptrdiff_t *out, size_t cap);

/**
 * Copies every element in C order, converted to double.
 */
enum NdkStatus ndk_array_to_f64(const struct NdkArray *a, double *out, size_t cap);

/**
 * Copies every element in C order, converted to int64.
 */
enum NdkStatus ndk_array_to_i64(const struct NdkArray *a, int64_t *out, size_t cap);

/**
 * Sums over `axes` (all axes when `axes` is null and `naxes` is 0).
 */
enum NdkStatus ndk_sum(const struct NdkArray *a,
                       const size_t *axes,
                       size_t naxes,
                       struct NdkArray **out);

/**
 * Float64 mean over `axes` (all axes when `axes` is null).
 */
enum NdkStatus ndk_mean(const struct NdkArray *a,
                        const size_t *axes,
                        size_t naxes,
                        struct NdkArray **out);

/**
 * Applies a ufunc; `b` must be null for unary ops and non-null for binary ones.
 */
enum NdkStatus ndk_elementwise(enum NdkUfunc op,
                               const struct NdkArray *a,
                               const struct NdkArray *b,
                               struct NdkArray **out);

enum NdkStatus ndk_matmul(const struct NdkArray *a,
                          const struct NdkArray *b,
                          struct NdkArray **out);

/**
 * Reversed axes when `perm` is null.
 */
enum NdkStatus ndk_transpose(const struct NdkArray *a,
                             const size_t *perm,
                             size_t nperm,
                             struct NdkArray **out);

/**
 * A view when the layout allows it, otherwise a copy.
 */
enum NdkStatus ndk_reshape(const struct NdkArray *a,
                           const size_t *dims,
                           size_t ndim,
                           struct NdkArray **out);

enum NdkStatus ndk_save(const struct NdkArray *a, const char *path);

enum NdkStatus ndk_load(const char *path, struct NdkArray **out);

/**
 * PCG64 generator seeded from entropy `[seed]`.
 */
enum NdkStatus ndk_generator_new(uint64_t seed, struct NdkGenerator **out);

void ndk_generator_free(struct NdkGenerator *g);

enum NdkStatus ndk_generator_next_u64(struct NdkGenerator *g, uint64_t *out);

/**
 * Fills a new array of shape `dims`; `low`/`high` only apply to integers.
 */
enum NdkStatus ndk_generator_sample(struct NdkGenerator *g,
                                    enum NdkDistribution dist,
                                    int64_t low,
                                    int64_t high,
                                    const size_t *dims,
                                    size_t ndim,
                                    struct NdkArray **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NDKERN_H */
