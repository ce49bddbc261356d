#include <stdio.h>
#include <string.h>
#include "rlce.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    RlceStatus s_ = (call);                                                \
    if (s_ != RLCE_STATUS_OK) {                                            \
      fprintf(stderr, "%s: %d %s\n", #call, (int)s_, rlce_last_error());   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  RlceParams p = {60, 30, 12, 15, 10};
  size_t lo, hi;
  CHECK(rlce_interval(&p, &lo, &hi));
  printf("interval %zu %zu\n", lo, hi);

  const uint8_t seed[] = {0x0a};
  RlcePublicKey *pk = NULL;
  RlceSecretKey *sk = NULL;
  CHECK(rlce_keygen(&p, seed, sizeof seed, false, &pk, &sk));

  uint16_t msg[30], ct[72], back[30];
  for (int i = 0; i < 30; i++) msg[i] = (uint16_t)(i * 37 % 1024);
  CHECK(rlce_encrypt(pk, msg, 30, seed, sizeof seed, ct, 72));
  CHECK(rlce_decrypt(sk, ct, 72, back, 30));
  if (memcmp(msg, back, sizeof msg) != 0) return 2;

  RlceSecretKey *rec = NULL;
  CHECK(rlce_attack(pk, seed, sizeof seed, 0, &rec));
  bool ok = false;
  size_t dec = 0;
  CHECK(rlce_verify(pk, rec, 10, seed, sizeof seed, &ok, &dec));
  printf("attack %s %zu/10\n", ok ? "verified" : "failed", dec);

  RlceParams id0;
  CHECK(rlce_preset("id0", &id0));
  if (rlce_interval(&id0, &lo, &hi) != RLCE_STATUS_NOT_DISTINGUISHABLE) return 3;

  rlce_secret_key_free(rec);
  rlce_secret_key_free(sk);
  rlce_public_key_free(pk);
  return ok ? 0 : 4;
}
