#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "qha.h"

#define CHECK(expr)                                                          \
    do {                                                                     \
        if (!(expr)) {                                                       \
            char msg[256];                                                   \
            qha_last_error(msg, sizeof msg);                                 \
            fprintf(stderr, "%s:%d: %s failed (%s)\n", __FILE__, __LINE__, #expr, msg); \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    QhaSignal *phi = NULL;
    QhaOperator *op = NULL;
    QhaPsf *w = NULL;
    CHECK(qha_signal_gaussian(64, 8.0, &phi) == QHA_STATUS_OK);
    CHECK(qha_operator_rank_one(phi, phi, &op) == QHA_STATUS_OK);
    CHECK(qha_tau_wigner(op, 0.5, &w) == QHA_STATUS_OK);

    size_t n = qha_psf_n(w);
    double *re = malloc(n * n * sizeof *re);
    double *im = malloc(n * n * sizeof *im);
    CHECK(qha_psf_values(w, re, im, n * n) == QHA_STATUS_OK);
    CHECK(fabs(re[(n / 2) * n + n / 2] - 2.0) < 1e-8);

    QhaPsf *bad = NULL;
    CHECK(qha_tau_wigner(op, 2.0, &bad) == QHA_STATUS_INVALID_ARGUMENT);
    CHECK(bad == NULL);
    CHECK(qha_last_error(NULL, 0) > 0);

    free(re);
    free(im);
    qha_psf_free(w);
    qha_operator_free(op);
    qha_signal_free(phi);
    printf("ok %s\n", qha_version());
    return 0;
}
