#ifndef RLCE_H
#define RLCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RlceStatus {
  RLCE_STATUS_OK = 0,
  RLCE_STATUS_NULL_POINTER = 1,
  RLCE_STATUS_INVALID_ARGUMENT = 2,
  RLCE_STATUS_NOT_DISTINGUISHABLE = 3,
  RLCE_STATUS_ATTACK_FAILED = 4,
  RLCE_STATUS_DECRYPT_FAILURE = 5,
  RLCE_STATUS_FORMAT = 6,
  RLCE_STATUS_BUFFER_TOO_SMALL = 7,
  RLCE_STATUS_PANIC = 8,
} RlceStatus;

typedef struct RlcePublicKey RlcePublicKey;

typedef struct RlceSecretKey RlceSecretKey;

/**
 * Scheme parameters. `t` is the error weight, `m` the field degree.
 */
typedef struct RlceParams {
  size_t n;
  size_t k;
  size_t w;
  size_t t;
  uint32_t m;
} RlceParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *rlce_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rlce_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void rlce_string_free(char *s);

/**
 * Looks up a named preset ("id0" .. "id5").
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum RlceStatus rlce_preset(const char *name, struct RlceParams *out);

/**
 * Writes the shortening-size interval on which the public code is
 * distinguishable. Returns `RLCE_STATUS_NOT_DISTINGUISHABLE` when it is empty.
 *
 * # Safety
 * `params` must be readable; `ell_min` and `ell_max` writable.
 */
enum RlceStatus rlce_interval(const struct RlceParams *params, size_t *ell_min, size_t *ell_max);

/**
 * Generates a key pair, deterministic in the seed bytes.
 *
 * # Safety
 * `seed` must point to `seed_len` bytes; `pk_out` and `sk_out` writable.
 */
enum RlceStatus rlce_keygen(const struct RlceParams *params,
                            const uint8_t *seed,
                            size_t seed_len,
                            bool allow_degenerate,
                            struct RlcePublicKey **pk_out,
                            struct RlceSecretKey **sk_out);

/**
 * # Safety
 * `pk` must be null or a handle from this library not yet freed.
 */
void rlce_public_key_free(struct RlcePublicKey *pk);

/**
 * # Safety
 * `sk` must be null or a handle from this library not yet freed.
 */
void rlce_secret_key_free(struct RlceSecretKey *sk);

/**
 * # Safety
 * `pk` must be a live handle; `out` writable.
 */
enum RlceStatus rlce_public_key_params(const struct RlcePublicKey *pk, struct RlceParams *out);

/**
 * # Safety
 * `pk` must be a live handle; `out` writable. Free the result with
 * `rlce_string_free`.
 */
enum RlceStatus rlce_public_key_to_json(const struct RlcePublicKey *pk, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` writable.
 */
enum RlceStatus rlce_public_key_from_json(const char *json, struct RlcePublicKey **out);

/**
 * # Safety
 * `sk` must be a live handle; `out` writable. Free the result with
 * `rlce_string_free`.
 */
enum RlceStatus rlce_secret_key_to_json(const struct RlceSecretKey *sk, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` writable.
 */
enum RlceStatus rlce_secret_key_from_json(const char *json, struct RlceSecretKey **out);

/**
 * Encrypts `k` field elements into `n + w` elements.
 *
 * # Safety
 * `message` must hold `message_len` elements, `seed` `seed_len` bytes and
 * `out` room for `out_len` elements.
 */
enum RlceStatus rlce_encrypt(const struct RlcePublicKey *pk,
                             const uint16_t *message,
                             size_t message_len,
                             const uint8_t *seed,
                             size_t seed_len,
                             uint16_t *out,
                             size_t out_len);

/**
 * Decrypts `n + w` elements into the `k`-element message.
 *
 * # Safety
 * `ciphertext` must hold `ciphertext_len` elements and `out` room for
 * `out_len` elements.
 */
enum RlceStatus rlce_decrypt(const struct RlceSecretKey *sk,
                             const uint16_t *ciphertext,
                             size_t ciphertext_len,
                             uint16_t *out,
                             size_t out_len);

/**
 * Recovers an equivalent secret key from a public key alone.
 * `max_shortenings` of 0 keeps the default budget.
 *
 * # Safety
 * `pk` must be a live handle, `seed` `seed_len` bytes, `sk_out` writable.
 */
enum RlceStatus rlce_attack(const struct RlcePublicKey *pk,
                            const uint8_t *seed,
                            size_t seed_len,
                            size_t max_shortenings,
                            struct RlceSecretKey **sk_out);

/**
 * Checks that `sk` regenerates `pk` and decrypts `trials` fresh
 * ciphertexts. `passed` is set either way; the count of successful
 * decryptions goes to `decrypted` when it is non-null.
 *
 * # Safety
 * Handles must be live, `seed` `seed_len` bytes, `passed` writable.
 */
enum RlceStatus rlce_verify(const struct RlcePublicKey *pk,
                            const struct RlceSecretKey *sk,
                            size_t trials,
                            const uint8_t *seed,
                            size_t seed_len,
                            bool *passed,
                            size_t *decrypted);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RLCE_H */
