#include <stdio.h>

#include "algebroid_poisson.h"

int main(void) {
    ApModel *model = NULL;
    ApFunction *f = NULL, *g = NULL;
    if (ap_model_from_preset("so3", &model) != AP_STATUS_OK ||
        ap_function_from_json("{\"op\": \"phi\", \"args\": [0]}", &f) != AP_STATUS_OK ||
        ap_function_from_json("{\"op\": \"phi\", \"args\": [1]}", &g) != AP_STATUS_OK) {
        fprintf(stderr, "%s\n", ap_last_error());
        return 1;
    }
    double m[1] = {0.0}, phi[3] = {0.2, -0.7, 1.5}, out = 0.0;
    ApStatus s = ap_poisson_bracket(model, f, g, m, phi, &out);
    printf("status=%d bracket=%g\n", (int)s, out);

    ApModel *bad = NULL;
    s = ap_model_from_preset("nonsense", &bad);
    printf("status=%d error=%s\n", (int)s, ap_last_error());

    ap_function_free(f);
    ap_function_free(g);
    ap_model_free(model);
    return 0;
}
