#ifndef BCS_H
#define BCS_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BcsStatus {
  BCS_STATUS_OK = 0,
  BCS_STATUS_NULL_POINTER = 1,
  BCS_STATUS_DIMENSION = 2,
  BCS_STATUS_INVALID_ARGUMENT = 3,
  BCS_STATUS_NON_FINITE = 4,
  BCS_STATUS_PARSE = 5,
  BCS_STATUS_IO = 6,
  BCS_STATUS_SENTINEL = 7,
  BCS_STATUS_PANIC = 8,
} BcsStatus;

typedef enum BcsFilterKind {
  BCS_FILTER_KIND_DENSE = 0,
  /**
   * Uses the `sigma` argument as the number of nonzero taps.
   */
  BCS_FILTER_KIND_SPARSE = 1,
  BCS_FILTER_KIND_UNIT_PHASE = 2,
} BcsFilterKind;

/**
 * Opaque key handle.
 */
typedef struct BcsKey BcsKey;

typedef struct BcsDecryptInfo {
  double residual;
  size_t iterations;
  bool converged;
} BcsDecryptInfo;

typedef struct BcsCertSummary {
  /**
   * True when provably non-retrievable.
   */
  bool non_retrievable;
  bool all_one_sparse;
  bool below_phase_retrieval_bound;
  size_t e_set_size;
  bool has_certificate;
  bool certificate_valid;
  size_t pair_i;
  size_t pair_j;
} BcsCertSummary;

typedef struct BcsTrialRecord {
  double final_loss;
  double rel_error;
  bool success;
  size_t iterations;
  double wall_s;
} BcsTrialRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null.
 */
const char *bcs_status_message(enum BcsStatus status);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length excluding the NUL;
 * 0 when no error was recorded.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t bcs_last_error(char *buf, size_t cap);

/**
 * Samples an `m x n` Gaussian key.
 *
 * # Safety
 * `out` must be a valid pointer to a `BcsKey*`.
 */
enum BcsStatus bcs_key_generate(size_t m, size_t n, uint64_t seed, struct BcsKey **out);

/**
 * Builds a key from `m * n` interleaved complex entries, row-major.
 *
 * # Safety
 * `data` must point to `2 * m * n` doubles; `out` to a `BcsKey*`.
 */
enum BcsStatus bcs_key_from_data(size_t m, size_t n, const double *data, struct BcsKey **out);

/**
 * # Safety
 * `key` must be null or a live handle.
 */
size_t bcs_key_rows(const struct BcsKey *key);

/**
 * # Safety
 * `key` must be null or a live handle.
 */
size_t bcs_key_cols(const struct BcsKey *key);

/**
 * Copies the key entries (row-major, interleaved) into `out`, which must
 * hold `2 * rows * cols` doubles; `len` is that capacity in doubles.
 *
 * # Safety
 * `key` must be a live handle and `out` point to `len` writable doubles.
 */
enum BcsStatus bcs_key_copy_data(const struct BcsKey *key, double *out, size_t len);

/**
 * Releases a key. Null is ignored.
 *
 * # Safety
 * `key` must be null or a handle not yet freed.
 */
void bcs_key_free(struct BcsKey *key);

/**
 * `y = h * (Q x)` with a filter drawn from `kind`. `x` has `n` complex
 * entries, `y_out` receives `m`.
 *
 * # Safety
 * Pointers must reference arrays of the stated complex lengths.
 */
enum BcsStatus bcs_encrypt(const struct BcsKey *key,
                           const double *x,
                           size_t n,
                           enum BcsFilterKind kind,
                           size_t sigma,
                           uint64_t seed,
                           double *y_out,
                           size_t m);

/**
 * Blind deconvolution of `y` (length `m`). Writes `h_hat` (length `m`)
 * and `x_hat` (length `key cols`). A non-converged run still returns
 * `BCS_STATUS_OK`; check `info->converged`.
 *
 * # Safety
 * Pointers must reference arrays of the stated complex lengths.
 */
enum BcsStatus bcs_decrypt(const struct BcsKey *key,
                           const double *y,
                           size_t m,
                           size_t sigma,
                           size_t s,
                           size_t max_iters,
                           double *h_out,
                           double *x_out,
                           struct BcsDecryptInfo *info);

/**
 * `max(n(n-1)/(s(s-1)), 4n-3-2 log2(n-1))`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BcsStatus bcs_retrieval_bound(size_t n, size_t s, double *out);

/**
 * Certificate report for `count` dense plaintexts of length `n`, stored
 * back to back (`2 * n * count` doubles).
 *
 * # Safety
 * `plaintexts` must hold `2 * n * count` doubles; `out` must be valid.
 */
enum BcsStatus bcs_certify(const double *plaintexts,
                           size_t count,
                           size_t n,
                           size_t s,
                           struct BcsCertSummary *out);

/**
 * One Monte-Carlo key-recovery trial, fully determined by `seed`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BcsStatus bcs_run_trial(size_t n,
                             size_t m,
                             size_t count,
                             size_t s,
                             uint64_t seed,
                             size_t restarts,
                             struct BcsTrialRecord *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCS_H */
