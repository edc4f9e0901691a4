#include "sarsim/metrics.hpp"

#include <cmath>
#include <string>

#include "sarsim/errors.hpp"

namespace sarsim {

void QuantileForecast::check() const {
    if (levels.empty()) throw ParameterError("QuantileForecast: no quantile levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw ParameterError("QuantileForecast: levels must lie in (0, 1)");
        if (i > 0 && !(levels[i] > levels[i - 1])) {
            throw ParameterError("QuantileForecast: levels must be strictly increasing");
        }
    }
    if (values.size() != horizons * levels.size()) {
        throw ParameterError("QuantileForecast: values must hold horizons x levels entries");
    }
}

bool QuantileForecast::monotone() const {
    const std::size_t q = levels.size();
    for (std::size_t h = 0; h < horizons; ++h) {
        for (std::size_t j = 1; j < q; ++j) {
            if (at(h, j) < at(h, j - 1)) return false;
        }
    }
    return true;
}

std::vector<double> default_quantile_levels() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

namespace metrics {

namespace {

void check_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("quantile level must lie in (0, 1)");
}

double pinball(double y, double yhat, double tau) {
    const double diff = y - yhat;
    return diff >= 0.0 ? tau * diff : (1.0 - tau) * -diff;
}

double crps_unchecked(double y, std::span<const double> quantiles, std::span<const double> levels) {
    double sum = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) sum += pinball(y, quantiles[i], levels[i]);
    return 2.0 * sum / static_cast<double>(levels.size());
}

void check_levels(std::span<const double> levels) {
    QuantileForecast probe{{levels.begin(), levels.end()}, 0, {}};
    probe.check();
}

}  // namespace

double quantile_loss(double y, double yhat, double tau) {
    check_tau(tau);
    return pinball(y, yhat, tau);
}

double mhmq_loss(std::span<const double> actuals, const QuantileForecast& forecast) {
    forecast.check();
    if (actuals.size() != forecast.horizons) throw ParameterError("mhmq_loss: actuals and forecast horizons differ");
    if (actuals.empty()) throw ParameterError("mhmq_loss: empty horizon");
    const std::size_t q = forecast.levels.size();
    double sum = 0.0;
    for (std::size_t h = 0; h < actuals.size(); ++h) {
        for (std::size_t j = 0; j < q; ++j) sum += pinball(actuals[h], forecast.at(h, j), forecast.levels[j]);
    }
    return sum / static_cast<double>(actuals.size() * q);
}

double crps(double y, std::span<const double> quantiles, std::span<const double> levels) {
    check_levels(levels);
    if (quantiles.size() != levels.size()) throw ParameterError("crps: quantile and level counts differ");
    return crps_unchecked(y, quantiles, levels);
}

double scrps(std::span<const std::vector<double>> actuals, std::span<const QuantileForecast> forecasts) {
    if (actuals.size() != forecasts.size()) throw ParameterError("scrps: actuals and forecasts differ in count");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const auto& f = forecasts[i];
        f.check();
        if (actuals[i].size() != f.horizons) throw ParameterError("scrps: actuals and forecast horizons differ");
        for (std::size_t h = 0; h < f.horizons; ++h) {
            num += crps_unchecked(actuals[i][h], f.row(h), f.levels);
            den += std::abs(actuals[i][h]);
        }
    }
    if (!(den > 0.0)) throw ParameterError("scrps: sum of absolute actuals is zero");
    return num / den;
}

double scrps(std::span<const double> actuals, const QuantileForecast& forecast) {
    const std::vector<double> one(actuals.begin(), actuals.end());
    return scrps(std::span<const std::vector<double>>(&one, 1), std::span<const QuantileForecast>(&forecast, 1));
}

std::vector<double> seasonal_naive(std::span<const double> history, int seasonality, std::size_t horizons) {
    if (seasonality < 1) throw ParameterError("seasonal_naive: seasonality must be >= 1");
    const auto s = static_cast<std::size_t>(seasonality);
    if (history.size() < s) throw ParameterError("seasonal_naive: history shorter than one season");
    std::vector<double> out(horizons);
    const std::size_t base = history.size() - s;
    for (std::size_t h = 0; h < horizons; ++h) out[h] = history[base + h % s];
    return out;
}

double mase(std::span<const double> actuals, std::span<const double> forecast, std::span<const double> history,
            int seasonality, MaseScaling scaling) {
    if (actuals.size() != forecast.size()) throw ParameterError("mase: actuals and forecast lengths differ");
    if (actuals.empty()) throw ParameterError("mase: empty horizon");
    if (seasonality < 1) throw ParameterError("mase: seasonality must be >= 1");
    const auto s = static_cast<std::size_t>(seasonality);
    if (history.size() < s) throw ParameterError("mase: history shorter than one season");

    double num = 0.0;
    for (std::size_t h = 0; h < actuals.size(); ++h) num += std::abs(actuals[h] - forecast[h]);

    if (scaling == MaseScaling::in_window) {
        const auto naive = seasonal_naive(history, seasonality, actuals.size());
        double den = 0.0;
        for (std::size_t h = 0; h < actuals.size(); ++h) den += std::abs(actuals[h] - naive[h]);
        if (!(den > 0.0)) throw ParameterError("mase: seasonal-naive error is zero");
        return num / den;
    }

    if (history.size() <= s) throw ParameterError("mase: in-sample scaling needs more than one season of history");
    double den = 0.0;
    for (std::size_t t = s; t < history.size(); ++t) den += std::abs(history[t] - history[t - s]);
    den /= static_cast<double>(history.size() - s);
    if (!(den > 0.0)) throw ParameterError("mase: seasonal-naive error is zero");
    return num / static_cast<double>(actuals.size()) / den;
}

double aggregate(std::span<const double> scores, std::span<const double> weights, AggregateMode mode,
                 std::optional<std::span<const double>> baseline) {
    if (scores.empty()) throw ParameterError("aggregate: no scores");
    if (weights.size() != scores.size()) throw ParameterError("aggregate: weights and scores differ in count");
    if (baseline && baseline->size() != scores.size()) {
        throw ParameterError("aggregate: baseline and scores differ in count");
    }
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("aggregate: weights must be finite and >= 0");
        wsum += w;
    }
    if (!(wsum > 0.0)) throw ParameterError("aggregate: weights sum to zero");

    if (mode == AggregateMode::weighted_mean) {
        double acc = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) acc += weights[i] * scores[i];
        return acc / wsum;
    }

    double log_acc = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double ref = baseline ? (*baseline)[i] : 1.0;
        if (!(scores[i] > 0.0) || !(ref > 0.0)) {
            throw ParameterError("aggregate: geometric mode needs positive scores and baselines");
        }
        log_acc += weights[i] * std::log(scores[i] / ref);
    }
    return std::exp(log_acc / wsum);
}

}  // namespace metrics
}  // namespace sarsim
