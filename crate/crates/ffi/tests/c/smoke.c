#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "oddflow.h"

#define CHECK(call)                                                   \
    do {                                                              \
        int code_ = (call);                                           \
        if (code_ != ODDFLOW_OK) {                                    \
            char msg_[256];                                           \
            oddflow_last_error(msg_, sizeof msg_);                    \
            fprintf(stderr, "%s -> %d: %s\n", #call, code_, msg_);    \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    const size_t n = 16;
    const double nu = 0.05, pi = 3.14159265358979323846;
    double *rho = malloc(n * n * sizeof *rho);
    double *u1 = malloc(n * n * sizeof *u1);
    double *u2 = malloc(n * n * sizeof *u2);
    for (size_t i = 0; i < n; i++) {
        for (size_t j = 0; j < n; j++) {
            double x = 2 * pi * i / n, y = 2 * pi * j / n;
            rho[i * n + j] = 1.0;
            u1[i * n + j] = sin(x) * cos(y);
            u2[i * n + j] = -cos(x) * sin(y);
        }
    }

    OddflowLaw *law = NULL;
    CHECK(oddflow_law_new("const:0.05", "prop:0.2", 0.5, 2.0, &law));
    OddflowSimulation *sim = NULL;
    CHECK(oddflow_simulation_new(law, n, 2 * pi, 1e-2, rho, u1, u2, &sim));
    double t, e0, e1;
    CHECK(oddflow_simulation_status(sim, NULL, &e0));
    CHECK(oddflow_simulation_step(sim, 20));
    CHECK(oddflow_simulation_status(sim, &t, &e1));
    double exact = e0 * exp(-4 * nu * t);
    printf("t %.3f kinetic %.12e exact %.12e\n", t, e1, exact);
    if (fabs(e1 - exact) > 1e-6 * exact) {
        return 2;
    }

    /* error path */
    OddflowLaw *bad = NULL;
    if (oddflow_law_new("const:-1", "const:0", 0.5, 2.0, &bad) != ODDFLOW_INVALID_INPUT || bad) {
        return 3;
    }
    char msg[8];
    size_t need = oddflow_last_error(msg, sizeof msg);
    if (need <= 1 || msg[sizeof msg - 1] != '\0') {
        return 4;
    }
    if (oddflow_simulation_step(NULL, 1) != ODDFLOW_NULL_POINTER) {
        return 5;
    }

    oddflow_simulation_free(sim);
    oddflow_law_free(law);
    free(rho);
    free(u1);
    free(u2);
    printf("oddflow %s ok\n", oddflow_version());
    return 0;
}
