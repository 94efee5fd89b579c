#ifndef QUANTRL_H
#define QUANTRL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum QrlStatus {
  QRL_STATUS_OK = 0,
  QRL_STATUS_NULL_POINTER = 1,
  QRL_STATUS_INVALID_ARGUMENT = 2,
  QRL_STATUS_IO = 3,
  QRL_STATUS_DATA = 4,
  QRL_STATUS_CONFIG = 5,
  QRL_STATUS_RUNTIME = 6,
  QRL_STATUS_BUFFER_TOO_SMALL = 7,
  QRL_STATUS_PANIC = 8,
} QrlStatus;

/**
 * Trading environment handle; keeps the latest observation.
 */
typedef struct QrlEnv QrlEnv;

/**
 * Trained network handle.
 */
typedef struct QrlPolicy QrlPolicy;

/**
 * Price series handle.
 */
typedef struct QrlSeries QrlSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next failing
 * call on the same thread.
 */
const char *qrl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qrl_version(void);

/**
 * Loads an OHLCV CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QrlStatus qrl_series_load_csv(const char *path, struct QrlSeries **out);

/**
 * Builds a flat-bar daily series from closing prices (consecutive calendar days from
 * 2000-01-01, constant volume).
 *
 * # Safety
 * `closes` must point to `n` values and `out` must be valid.
 */
enum QrlStatus qrl_series_from_closes(const double *closes, size_t n, struct QrlSeries **out);

/**
 * # Safety
 * `series` must come from this library and `out_len` must be valid.
 */
enum QrlStatus qrl_series_len(const struct QrlSeries *series, size_t *out_len);

/**
 * Copies closing prices into `buf` (capacity `cap`); `written` receives the series length.
 *
 * # Safety
 * `buf` must hold `cap` values.
 */
enum QrlStatus qrl_series_closes(const struct QrlSeries *series,
                                 double *buf,
                                 size_t cap,
                                 size_t *written);

/**
 * # Safety
 * `series` must come from this library or be null; it must not be used afterwards.
 */
void qrl_series_free(struct QrlSeries *series);

/**
 * Creates an environment over `series`. `config_json` is an experiment config document
 * (its `features`, `normalization` and `env` sections are used); null means defaults.
 *
 * # Safety
 * `series` must be a live handle; `config_json` null or NUL-terminated; `out` valid.
 */
enum QrlStatus qrl_env_new(const struct QrlSeries *series,
                           const char *config_json,
                           struct QrlEnv **out);

/**
 * Number of values in a flattened observation.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum QrlStatus qrl_env_observation_len(const struct QrlEnv *env, size_t *out_len);

/**
 * Number of steps in one episode.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum QrlStatus qrl_env_episode_len(const struct QrlEnv *env, size_t *out_len);

/**
 * Starts an episode and writes the first observation.
 *
 * # Safety
 * `obs` must hold `cap` values.
 */
enum QrlStatus qrl_env_reset(struct QrlEnv *env,
                             uint64_t seed,
                             double *obs,
                             size_t cap,
                             size_t *written);

/**
 * Applies `action` (0 = sell/short, 1 = buy/long) and writes the next observation,
 * the reward and whether the episode ended.
 *
 * # Safety
 * `obs` must hold `cap` values; `reward` and `done` must be valid.
 */
enum QrlStatus qrl_env_step(struct QrlEnv *env,
                            uint32_t action,
                            double *obs,
                            size_t cap,
                            double *reward,
                            bool *done);

/**
 * Current equity of the running episode.
 *
 * # Safety
 * `env` must be a live handle.
 */
enum QrlStatus qrl_env_equity(const struct QrlEnv *env, double *out);

/**
 * # Safety
 * `env` must come from this library or be null; it must not be used afterwards.
 */
void qrl_env_free(struct QrlEnv *env);

/**
 * Loads a policy file written by `quantrl train`.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` valid.
 */
enum QrlStatus qrl_policy_load(const char *path, struct QrlPolicy **out);

/**
 * Saves a policy in the same format.
 *
 * # Safety
 * `policy` must be live and `path` NUL-terminated.
 */
enum QrlStatus qrl_policy_save(const struct QrlPolicy *policy, const char *path);

/**
 * Input and output widths of the network.
 *
 * # Safety
 * All pointers must be valid.
 */
enum QrlStatus qrl_policy_dims(const struct QrlPolicy *policy, size_t *input, size_t *output);

/**
 * Network outputs for one observation.
 *
 * # Safety
 * `obs` must hold `n` values and `out` `cap` values.
 */
enum QrlStatus qrl_policy_forward(const struct QrlPolicy *policy,
                                  const double *obs,
                                  size_t n,
                                  double *out,
                                  size_t cap);

/**
 * Greedy action (ties go to 0) for one observation.
 *
 * # Safety
 * `obs` must hold `n` values.
 */
enum QrlStatus qrl_policy_act(const struct QrlPolicy *policy,
                              const double *obs,
                              size_t n,
                              uint32_t *action);

/**
 * # Safety
 * `policy` must come from this library or be null; it must not be used afterwards.
 */
void qrl_policy_free(struct QrlPolicy *policy);

/**
 * Annualized Sharpe ratio of per-period returns (population σ; 0 when σ is 0).
 *
 * # Safety
 * `returns` must hold `n` values.
 */
enum QrlStatus qrl_sharpe(const double *returns,
                          size_t n,
                          double rf,
                          double periods_per_year,
                          double *out);

/**
 * Annualized Sortino ratio of per-period returns.
 *
 * # Safety
 * `returns` must hold `n` values.
 */
enum QrlStatus qrl_sortino(const double *returns,
                           size_t n,
                           double rf,
                           double periods_per_year,
                           double *out);

/**
 * Maximum drawdown of an equity curve, as a fraction.
 *
 * # Safety
 * `curve` must hold `n` values.
 */
enum QrlStatus qrl_max_drawdown(const double *curve, size_t n, double *out);

/**
 * Geometric annualized return in percent.
 *
 * # Safety
 * `out` must be valid.
 */
enum QrlStatus qrl_annualize(double total_return,
                             size_t n_periods,
                             double periods_per_year,
                             double *out);

/**
 * Writes the full report for an equity curve as a JSON object into `buf` (NUL-terminated,
 * capacity `cap` bytes). `needed` receives the required size including the NUL. Trades
 * are not available from a bare curve, so `n_trades` is 0.
 *
 * # Safety
 * `curve` must hold `n` values and `buf` `cap` bytes.
 */
enum QrlStatus qrl_report_json(const double *curve,
                               size_t n,
                               double rf,
                               double periods_per_year,
                               char *buf,
                               size_t cap,
                               size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUANTRL_H */
