#include "sarsim/sarima2.hpp"

#include <algorithm>

#include "sarsim/errors.hpp"

namespace sarsim {

const char* to_string(Mixing mixing) noexcept {
    return mixing == Mixing::additive ? "additive" : "multiplicative";
}

Mixing mixing_from_string(const std::string& name) {
    if (name == "additive") return Mixing::additive;
    if (name == "multiplicative") return Mixing::multiplicative;
    throw ParameterError("unknown mixing mode: " + name);
}

void Sarima2Spec::check() const {
    base.check();
    envelope.check();
    if (!(omega >= 0.0 && omega <= 1.0)) throw ParameterError("Sarima2Spec: omega must lie in [0, 1]");
    if (upsample_factor < 1) throw ParameterError("Sarima2Spec: upsample factor must be >= 1");
}

namespace sarima2 {

Sarima2Spec sample_spec(Stream& s, const SimulatorConfig& config) {
    const auto& cfg = config.sarima2;
    if (cfg.seasonality_pairs.empty()) throw ParameterError("sample_spec: no seasonality pairs configured");
    const auto pick = rng::uniform_int(s, 0, static_cast<std::int64_t>(cfg.seasonality_pairs.size()) - 1);
    const auto [s_base, s_env] = cfg.seasonality_pairs[static_cast<std::size_t>(pick)];

    Sarima2Spec spec;
    spec.base = sarima::sample_spec(s, config, s_base);
    spec.envelope = sarima::sample_spec(s, config, s_env);
    spec.mixing = rng::bernoulli(s, cfg.additive_probability) ? Mixing::additive : Mixing::multiplicative;
    spec.omega = rng::uniform(s, cfg.modulation_depth.lo, cfg.modulation_depth.hi);
    spec.upsample_factor = std::max(s_base, 1);
    spec.upsampling = cfg.upsampling;
    return spec;
}

std::size_t envelope_length(int factor, std::size_t target_len) {
    if (factor < 1) throw ParameterError("envelope_length: factor must be >= 1");
    const auto f = static_cast<std::size_t>(factor);
    return (target_len + f - 1) / f;
}

std::vector<double> normalize_envelope(std::span<const double> env) {
    if (env.empty()) throw ParameterError("normalize_envelope: empty envelope");
    const auto [lo_it, hi_it] = std::minmax_element(env.begin(), env.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> out(env.size(), 0.0);
    if (hi == lo) return out;
    const double range = hi - lo;
    for (std::size_t i = 0; i < env.size(); ++i) {
        // Endpoints are pinned so the extremes map to exactly -1 and +1.
        if (env[i] == lo) {
            out[i] = -1.0;
        } else if (env[i] == hi) {
            out[i] = 1.0;
        } else {
            out[i] = std::clamp(2.0 * (env[i] - lo) / range - 1.0, -1.0, 1.0);
        }
    }
    return out;
}

namespace {

void check_cover(std::size_t env_len, int factor, std::size_t target_len, const char* who) {
    if (factor < 1) throw ParameterError(std::string(who) + ": factor must be >= 1");
    if (env_len * static_cast<std::size_t>(factor) < target_len) {
        throw ParameterError(std::string(who) + ": envelope too short for the target length");
    }
}

}  // namespace

std::vector<double> upsample_hold(std::span<const double> env, int factor, std::size_t target_len) {
    check_cover(env.size(), factor, target_len, "upsample_hold");
    const auto f = static_cast<std::size_t>(factor);
    std::vector<double> out(target_len);
    for (std::size_t t = 0; t < target_len; ++t) out[t] = env[t / f];
    return out;
}

std::vector<double> upsample_linear(std::span<const double> env, int factor, std::size_t target_len) {
    check_cover(env.size(), factor, target_len, "upsample_linear");
    const auto f = static_cast<std::size_t>(factor);
    std::vector<double> out(target_len);
    for (std::size_t t = 0; t < target_len; ++t) {
        const std::size_t i = t / f;
        const double frac = static_cast<double>(t % f) / static_cast<double>(f);
        const double next = i + 1 < env.size() ? env[i + 1] : env[i];
        out[t] = env[i] + frac * (next - env[i]);
    }
    return out;
}

SeriesBatch compose(SeriesBatch base, const SeriesBatch& envelope, const Sarima2Spec& spec) {
    if (base.rows != envelope.rows) throw ParameterError("compose: base and envelope row counts differ");
    if (!(spec.omega >= 0.0 && spec.omega <= 1.0)) throw ParameterError("compose: omega must lie in [0, 1]");
    check_cover(envelope.length, spec.upsample_factor, base.length, "compose");

    SeriesBatch out = std::move(base);
    for (std::size_t b = 0; b < out.rows; ++b) {
        const auto env_row = envelope.row(b);
        std::vector<double> shaped;
        if (spec.mixing == Mixing::multiplicative) {
            shaped = normalize_envelope(env_row);
        } else {
            shaped.assign(env_row.begin(), env_row.end());
        }
        const auto up = spec.upsampling == EnvelopeUpsampling::hold
                            ? upsample_hold(shaped, spec.upsample_factor, out.length)
                            : upsample_linear(shaped, spec.upsample_factor, out.length);
        auto dst = out.row(b);
        if (spec.mixing == Mixing::additive) {
            for (std::size_t t = 0; t < out.length; ++t) dst[t] += up[t];
        } else {
            for (std::size_t t = 0; t < out.length; ++t) dst[t] *= 1.0 + spec.omega * up[t];
        }
    }
    return out;
}

}  // namespace sarima2
}  // namespace sarsim
