#include <stdio.h>
#include <string.h>
#include "bcs.h"

#define CHECK(cond)                                          \
    do {                                                     \
        if (!(cond)) {                                       \
            fprintf(stderr, "check failed: %s\n", #cond);    \
            return 1;                                        \
        }                                                    \
    } while (0)

int main(void) {
    BcsKey *key = NULL;
    CHECK(bcs_key_generate(64, 40, 7, &key) == BCS_STATUS_OK);
    CHECK(bcs_key_rows(key) == 64 && bcs_key_cols(key) == 40);

    double x[80] = {0};
    x[2 * 3] = 1.0;
    x[2 * 17 + 1] = -2.0;
    double y[128];
    CHECK(bcs_encrypt(key, x, 40, BCS_FILTER_KIND_SPARSE, 2, 1, y, 64) == BCS_STATUS_OK);

    double h_hat[128], x_hat[80];
    BcsDecryptInfo info;
    CHECK(bcs_decrypt(key, y, 64, 2, 2, 200, h_hat, x_hat, &info) == BCS_STATUS_OK);
    CHECK(info.converged);

    CHECK(bcs_encrypt(key, x, 41, BCS_FILTER_KIND_DENSE, 0, 1, y, 64) == BCS_STATUS_DIMENSION);
    char msg[256];
    CHECK(bcs_last_error(msg, sizeof msg) > 0);
    CHECK(strstr(msg, "40") != NULL);

    double bound = 0.0;
    CHECK(bcs_retrieval_bound(100, 2, &bound) == BCS_STATUS_OK && bound == 4950.0);
    CHECK(bcs_retrieval_bound(100, 1, &bound) == BCS_STATUS_INVALID_ARGUMENT);
    CHECK(bcs_key_generate(2, 2, 0, NULL) == BCS_STATUS_NULL_POINTER);

    bcs_key_free(key);
    bcs_key_free(NULL);
    printf("ok\n");
    return 0;
}
