/*
 * C boundary for language bindings. Every function reports failure through its
 * return value (NULL or a negative count) and records a message retrievable
 * with bkio_last_error() on the calling thread. Handles are never used after
 * they are freed by the library itself; passing NULL is always a defined error.
 */
#ifndef BKIO_C_API_H
#define BKIO_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct bkio_file bkio_file;
typedef struct bkio_array bkio_array;

/* Mirrors bkio::ErrorCode; 0 means no error. */
enum bkio_status {
    BKIO_OK = 0,
    BKIO_E_UNSUPPORTED_VERSION,
    BKIO_E_BAD_MAGIC,
    BKIO_E_BAD_TRAILER,
    BKIO_E_TRUNCATED,
    BKIO_E_INVALID_INDEX,
    BKIO_E_SIZE_MISMATCH,
    BKIO_E_CORRUPT_FRAME,
    BKIO_E_CODEC_FAILURE,
    BKIO_E_INVALID_CONFIG,
    BKIO_E_TYPE_MISMATCH,
    BKIO_E_OUT_OF_RANGE,
    BKIO_E_UNSUPPORTED_SHAPE,
    BKIO_E_STALE_VIEW,
    BKIO_E_WRITER_CLOSED,
    BKIO_E_POOL_SHUTDOWN,
    BKIO_E_IO_FAILURE,
    BKIO_E_INVALID_ARGUMENT,
    BKIO_E_INTERNAL
};

enum bkio_element { BKIO_F32 = 0, BKIO_F64 = 1, BKIO_I32 = 2, BKIO_I64 = 3, BKIO_U8 = 4 };
enum bkio_shape { BKIO_SCALAR = 0, BKIO_FIXED_ARRAY = 1, BKIO_VAR_ARRAY = 2 };

const char* bkio_last_error(void);
int bkio_last_error_code(void);

/* prefetch != 0 enables parallel basket decompression with `threads` workers (0 = all cores). */
bkio_file* bkio_open(const char* path, int prefetch, unsigned threads);
void bkio_close(bkio_file* file);

int64_t bkio_entry_count(const bkio_file* file);
int32_t bkio_branch_count(const bkio_file* file);
const char* bkio_branch_name(const bkio_file* file, int32_t branch);
int32_t bkio_branch_element(const bkio_file* file, int32_t branch);
int32_t bkio_branch_shape(const bkio_file* file, int32_t branch);
int32_t bkio_branch_fixed_len(const bkio_file* file, int32_t branch);
int32_t bkio_find_branch(const bkio_file* file, const char* name);

/*
 * Index-aligned arrays of `n` branches over [begin, end). out[i] receives a
 * handle per branch that must be released with bkio_array_free. With
 * force_copy == 0, arrays are views into the reader cache where one basket
 * covers the range. Returns 0 or a negative bkio_status.
 */
int bkio_read_range(bkio_file* file, const int32_t* branches, size_t n, uint64_t begin, uint64_t end,
                    int force_copy, bkio_array** out);

/* NULL (with BKIO_E_STALE_VIEW) once a view has been invalidated. */
const void* bkio_array_data(const bkio_array* array);
uint64_t bkio_array_length(const bkio_array* array);
uint64_t bkio_array_entries(const bkio_array* array);
int32_t bkio_array_element(const bkio_array* array);
int bkio_array_is_view(const bkio_array* array);
int bkio_array_is_valid(const bkio_array* array);
void bkio_array_free(bkio_array* array);

/*
 * Per-entry access: writes the values of `n` branches for one entry, widened to
 * double and concatenated in branch order. Returns the number of values written
 * or a negative bkio_status (BKIO_E_SIZE_MISMATCH when `capacity` is too small).
 */
int64_t bkio_get_entry_f64(bkio_file* file, const int32_t* branches, size_t n, uint64_t entry, double* out,
                           size_t capacity);

/* Drops the reader cache; outstanding views become stale. */
int bkio_evict(bkio_file* file);

#ifdef __cplusplus
}
#endif

#endif /* BKIO_C_API_H */
