#include <math.h>
#include <stdio.h>
#include "qdcascade.h"

int main(void) {
    QdcDot dot = {0.001, 0.002, 2.0, 0.0};
    QdcDephasing deph = {0.0, 0.0, 0};
    double sigma = 8.0;
    QdcPulse pulse = {18.18 / (sigma * sqrt(M_PI / M_LN2)), sigma, 5.0 * sigma};
    QdcEmission e;
    if (qdc_emission_after_pulse(&dot, &pulse, &deph, 1e-9, &e) != QDC_STATUS_OK) return 1;
    if (e.p_b < 0.95) return 2;

    QdcState *state = NULL;
    if (qdc_state_model(0.0, 0.06, 0.92085, 4.0, &state) != QDC_STATUS_OK) return 3;
    QdcMetrics m;
    if (qdc_state_metrics(state, &m) != QDC_STATUS_OK) return 4;
    if (fabs(m.fidelity - 0.88) > 1e-4) return 5;
    qdc_state_free(state);

    dot.gamma_b = -1.0;
    if (qdc_emission_after_pulse(&dot, &pulse, &deph, 1e-9, &e) != QDC_STATUS_INVALID_ARGUMENT) return 6;
    char msg[256];
    if (qdc_last_error_message(msg, sizeof msg) != QDC_STATUS_OK) return 7;
    printf("P_b %.4f, F %.4f, C %.4f; error: %s\n", e.p_b, m.fidelity, m.concurrence, msg);
    return 0;
}
