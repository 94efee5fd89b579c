#include <stdio.h>
#include "quantrl.h"

int main(void) {
    double closes[60];
    double p = 100.0;
    for (int i = 0; i < 60; i++) {
        closes[i] = p;
        p *= (i % 4 < 2) ? 1.01 : 0.995;
    }
    QrlSeries *series = NULL;
    if (qrl_series_from_closes(closes, 60, &series) != QRL_STATUS_OK) return 1;

    QrlEnv *env = NULL;
    const char *cfg = "{\"features\": {\"specs\": [{\"kind\": \"SMA\", \"period\": 1}]}, \"env\": {\"window_size\": 3}}";
    if (qrl_env_new(series, cfg, &env) != QRL_STATUS_OK) {
        fprintf(stderr, "%s\n", qrl_last_error_message());
        return 2;
    }
    size_t len = 0, written = 0;
    qrl_env_observation_len(env, &len);
    double obs[16];
    qrl_env_reset(env, 0, obs, 16, &written);
    bool done = false;
    double reward = 0.0, total = 0.0;
    while (!done) {
        if (qrl_env_step(env, 1, obs, 16, &reward, &done) != QRL_STATUS_OK) return 3;
        total += reward;
    }
    double equity = 0.0;
    qrl_env_equity(env, &equity);
    printf("obs_len=%zu total_log_return=%.12f equity=%.6f\n", len, total, equity);

    if (qrl_env_step(env, 1, obs, 16, &reward, &done) == QRL_STATUS_OK) return 4;
    qrl_env_free(env);
    qrl_series_free(series);
    return 0;
}
