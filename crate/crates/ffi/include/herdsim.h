#ifndef HERDSIM_H
#define HERDSIM_H

#include <stddef.h>
#include <stdint.h>

typedef enum HsNoiseKind {
  HS_NOISE_KIND_GAUSSIAN = 0,
  HS_NOISE_KIND_Q_GAUSSIAN = 1,
} HsNoiseKind;

typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_PARAM = 2,
  HS_STATUS_DOMAIN = 3,
  HS_STATUS_INTEGRATION = 4,
  HS_STATUS_INSUFFICIENT_DATA = 5,
  HS_STATUS_ZERO_VARIANCE = 6,
  HS_STATUS_BUFFER_TOO_SMALL = 7,
  HS_STATUS_PANIC = 8,
  HS_STATUS_OTHER = 9,
} HsStatus;

/**
 * Simulated minute-grid path.
 */
typedef struct HsPricePath HsPricePath;

/**
 * Return series for one window.
 */
typedef struct HsReturnSeries HsReturnSeries;

/**
 * Model parameters, field for field the same as the TOML `[model]` table.
 */
typedef struct HsParams {
  double eps_cf;
  double eps_fc;
  double eps_cc;
  double herd_ratio;
  double herding_rate;
  double feedback_weight;
  double noise_scale;
  double feedback_exponent;
  double tail_exponent;
  double precision;
  double boundary_margin;
} HsParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *hs_last_error_message(void);

const char *hs_version(void);

/**
 * # Safety
 * `out` must be null or point to writable memory for one `HsParams`.
 */
enum HsStatus hs_params_default(struct HsParams *out_params);

/**
 * # Safety
 * `params` must be null or point to a valid `HsParams`.
 */
enum HsStatus hs_params_validate(const struct HsParams *params);

/**
 * Width scale of the q-Gaussian noise for a window of `window` minutes.
 *
 * # Safety
 * `out_value` must be null or writable.
 */
enum HsStatus hs_sigma_q(double window, double lambda, double *out_value);

/**
 * # Safety
 * `out_value` must be null or writable.
 */
enum HsStatus hs_log_price(double n_f, double xi, double *out_value);

/**
 * Inverse time scale `(1 + a|p|)^alpha`.
 *
 * # Safety
 * `out_value` must be null or writable.
 */
enum HsStatus hs_transaction_rate(double n_f, double xi, double a, double alpha, double *out_value);

/**
 * # Safety
 * `values` must point to `len` readable doubles; `out_value` must be writable.
 */
enum HsStatus hs_hill_tail_exponent(const double *values,
                                    size_t len,
                                    double top_fraction,
                                    double *out_value);

/**
 * Simulates `duration` minutes after discarding `burn_in` minutes.
 *
 * # Safety
 * `params` must point to a valid `HsParams`; `out_path` must be writable.
 */
enum HsStatus hs_simulate_path(const struct HsParams *params,
                               uint64_t duration,
                               uint64_t burn_in,
                               uint64_t seed,
                               struct HsPricePath **out_path);

/**
 * # Safety
 * `path` must be null or a handle from `hs_simulate_path`.
 */
enum HsStatus hs_price_path_len(const struct HsPricePath *path, size_t *out_len);

/**
 * Copies the log-price of every minute into `buf`.
 *
 * # Safety
 * `path` must be a live handle; `buf` must hold `cap` doubles.
 */
enum HsStatus hs_price_path_log_prices(const struct HsPricePath *path, double *buf, size_t cap);

/**
 * # Safety
 * `path` must be null or a live handle; it is invalid afterwards.
 */
void hs_price_path_free(struct HsPricePath *path);

/**
 * One-minute returns of `path` with constant noise scale, normalized to
 * unit variance.
 *
 * # Safety
 * `path` must be a live handle; `out_series` must be writable.
 */
enum HsStatus hs_returns_from_path(const struct HsPricePath *path,
                                   enum HsNoiseKind kind,
                                   uint64_t seed,
                                   struct HsReturnSeries **out_series);

/**
 * Non-overlapping sums of `m` consecutive returns within each session.
 *
 * # Safety
 * `series` must be a live handle; `out_series` must be writable.
 */
enum HsStatus hs_return_series_aggregate(const struct HsReturnSeries *series,
                                         size_t m,
                                         struct HsReturnSeries **out_series);

/**
 * # Safety
 * `series` must be a live handle.
 */
enum HsStatus hs_return_series_len(const struct HsReturnSeries *series, size_t *out_len);

/**
 * # Safety
 * `series` must be a live handle.
 */
enum HsStatus hs_return_series_window(const struct HsReturnSeries *series, uint32_t *out_window);

/**
 * # Safety
 * `series` must be a live handle; `buf` must hold `cap` doubles.
 */
enum HsStatus hs_return_series_values(const struct HsReturnSeries *series, double *buf, size_t cap);

/**
 * # Safety
 * `series` must be null or a live handle; it is invalid afterwards.
 */
void hs_return_series_free(struct HsReturnSeries *series);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERDSIM_H */
