#pragma once

// Probabilistic forecast scoring: pinball loss, CRPS as a uniform average of
// pinball losses over the quantile grid, its scaled form, and MASE.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sarsim {

/// H horizons by Q quantile levels, row-major by horizon.
struct QuantileForecast {
    std::vector<double> levels;
    std::size_t horizons = 0;
    std::vector<double> values;

    double at(std::size_t h, std::size_t q) const { return values[h * levels.size() + q]; }
    std::span<const double> row(std::size_t h) const { return {values.data() + h * levels.size(), levels.size()}; }

    /// Throws ParameterError on bad levels or a shape mismatch.
    void check() const;
    /// True when quantile values are non-decreasing across levels at every horizon.
    bool monotone() const;
};

/// Deciles 0.1 .. 0.9.
std::vector<double> default_quantile_levels();

enum class MaseScaling {
    in_window,  ///< naive value for y_{T+h} is the last pre-horizon season
    in_sample,  ///< mean |y_t - y_{t-s}| over the history
};

enum class AggregateMode { weighted_mean, geometric_mean_ratio };

namespace metrics {

double quantile_loss(double y, double yhat, double tau);

double mhmq_loss(std::span<const double> actuals, const QuantileForecast& forecast);

/// (2/Q) sum_tau rho_tau(y, yhat_tau).
double crps(double y, std::span<const double> quantiles, std::span<const double> levels);

/// Sum of per-point CRPS over every (series, horizon) divided by sum |y|.
/// `actuals[i]` pairs with `forecasts[i]`.
double scrps(std::span<const std::vector<double>> actuals, std::span<const QuantileForecast> forecasts);
double scrps(std::span<const double> actuals, const QuantileForecast& forecast);

/// Seasonal-naive forecast for the H points following `history`.
std::vector<double> seasonal_naive(std::span<const double> history, int seasonality, std::size_t horizons);

double mase(std::span<const double> actuals, std::span<const double> forecast, std::span<const double> history,
            int seasonality, MaseScaling scaling = MaseScaling::in_window);

/// Weighted arithmetic mean of `scores`, or the weighted geometric mean of
/// scores[i] / baseline[i] (baseline defaults to all ones).
double aggregate(std::span<const double> scores, std::span<const double> weights, AggregateMode mode,
                 std::optional<std::span<const double>> baseline = {});

}  // namespace metrics
}  // namespace sarsim
