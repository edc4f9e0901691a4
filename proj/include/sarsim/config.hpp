#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

namespace sarsim {

/// Closed interval [lo, hi] used for sampled hyperparameters.
struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
    friend bool operator==(const Range&, const Range&) = default;
};

enum class NoiserFamily { poisson, gen_gamma, lognormal, passthrough };
enum class EnvelopeUpsampling { hold, linear };

const char* to_string(NoiserFamily family) noexcept;
NoiserFamily noiser_family_from_string(const std::string& name);

struct OrderLimits {
    int p_max = 10;
    int q_max = 3;
    int P_max = 2;
    int Q_max = 2;
    int s_max = 52;
};

struct PoleLimits {
    double ar_radius_max = 0.9;
    double ma_radius_max = 0.9;
    double seasonal_ar_radius_max = 0.1;
    double seasonal_ma_radius_max = 0.1;
};

struct IntegrationConfig {
    Range fractional_order{0.0, 1.0};
    int seasonal_order = 1;
    int fir_taps = 512;
};

struct Sarima2Config {
    double probability = 0.5;
    std::vector<std::array<int, 2>> seasonality_pairs{{24, 7}, {7, 52}, {0, 7}, {0, 3}, {0, 24}, {0, 52}};
    double additive_probability = 0.5;
    Range modulation_depth{0.0, 1.0};
    EnvelopeUpsampling upsampling = EnvelopeUpsampling::hold;
};

struct NoiserConfig {
    std::vector<NoiserFamily> families{NoiserFamily::poisson, NoiserFamily::gen_gamma,
                                       NoiserFamily::lognormal, NoiserFamily::passthrough};
    Range poisson_rate{0.1, 100.0};
    Range gamma_rate{0.1, 100.0};
    Range gamma_shape{1.0, 50.0};
    Range gamma_power{0.5, 1.5};
    Range lognormal_rate{0.1, 5.0};
    Range lognormal_shape{1.0, 3.0};
};

struct WindowGeometry {
    int context = 4096;
    int horizon = 512;
    int max_pad = 4088;

    int span() const noexcept { return context + horizon; }
};

/// Full generation distribution. Defaults reproduce the published settings.
struct SimulatorConfig {
    int sequence_length = 6000;
    int batch_size = 256;
    OrderLimits orders;
    PoleLimits poles;
    IntegrationConfig integration;
    Sarima2Config sarima2;
    NoiserConfig noisers;
    WindowGeometry window;
    int retry_cap = 32;
    double divergence_limit = 1e12;

    /// Human-readable schema violations; empty when the config is valid.
    std::vector<std::string> validate() const;
    /// Throws ParameterError listing every violation.
    void check() const;
};

nlohmann::json to_json(const SimulatorConfig& config);
/// Parses and validates. Unknown keys and wrong types are errors; missing
/// keys keep their defaults.
SimulatorConfig config_from_json(const nlohmann::json& doc);
SimulatorConfig load_config(const std::string& path);

}  // namespace sarsim
