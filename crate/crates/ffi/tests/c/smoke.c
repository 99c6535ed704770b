#include <stdio.h>
#include <string.h>

#include "igdyn.h"

int main(void) {
    IgdynModel *model = NULL;
    if (igdyn_model_gaussian_product(2, &model) != IGDYN_STATUS_OK) {
        return 1;
    }
    size_t dim = 0;
    igdyn_model_dimension(model, &dim);
    double x[12];
    for (size_t i = 0; i < dim; i++) {
        x[i] = (i % 2) ? 1.5 : 0.25;
    }
    double r = 0.0;
    if (igdyn_ricci_scalar(model, x, dim, true, &r) != IGDYN_STATUS_OK) {
        return 2;
    }
    double measured = r;
    x[1] = -1.0;
    if (igdyn_ricci_scalar(model, x, dim, false, &r) != IGDYN_STATUS_DOMAIN) {
        return 3;
    }
    const char *msg = igdyn_last_error_message();
    igdyn_model_free(model);
    printf("dim=%zu R=%.9f version=%s error=%s\n", dim, measured, igdyn_version(), msg ? "set" : "unset");
    if (measured > -6.0 + 1e-6 || measured < -6.0 - 1e-6) {
        return 5;
    }
    return (msg && strlen(msg) > 0) ? 0 : 4;
}
