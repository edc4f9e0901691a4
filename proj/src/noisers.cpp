#include "sarsim/noisers.hpp"

#include <algorithm>
#include <cmath>

#include "sarsim/errors.hpp"

namespace sarsim {

void NoiserSpec::check() const {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw ParameterError("NoiserSpec: lambda0 must be positive");
    const bool shaped = family == NoiserFamily::gen_gamma || family == NoiserFamily::lognormal;
    if (shaped && (!(kappa > 0.0) || !std::isfinite(kappa))) throw ParameterError("NoiserSpec: kappa must be positive");
    if (family == NoiserFamily::gen_gamma && (!(zeta > 0.0) || !std::isfinite(zeta))) {
        throw ParameterError("NoiserSpec: zeta must be positive");
    }
}

namespace noise {

NoiserSpec sample_spec(Stream& s, const NoiserConfig& config) {
    if (config.families.empty()) throw ParameterError("sample_spec: no noiser families configured");
    const auto pick = rng::uniform_int(s, 0, static_cast<std::int64_t>(config.families.size()) - 1);
    NoiserSpec spec;
    spec.family = config.families[static_cast<std::size_t>(pick)];
    switch (spec.family) {
        case NoiserFamily::poisson:
            spec.lambda0 = rng::log_uniform(s, config.poisson_rate.lo, config.poisson_rate.hi);
            break;
        case NoiserFamily::gen_gamma:
            spec.lambda0 = rng::log_uniform(s, config.gamma_rate.lo, config.gamma_rate.hi);
            spec.kappa = rng::log_uniform(s, config.gamma_shape.lo, config.gamma_shape.hi);
            spec.zeta = rng::uniform(s, config.gamma_power.lo, config.gamma_power.hi);
            break;
        case NoiserFamily::lognormal:
            spec.lambda0 = rng::log_uniform(s, config.lognormal_rate.lo, config.lognormal_rate.hi);
            spec.kappa = rng::log_uniform(s, config.lognormal_shape.lo, config.lognormal_shape.hi);
            break;
        case NoiserFamily::passthrough:
            break;
    }
    return spec;
}

namespace {

void rate_track_into(std::span<const double> y, double lambda0, std::span<double> out) {
    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5 * lambda0);
        return;
    }
    const double scale = lambda0 / (hi - lo);
    for (std::size_t t = 0; t < y.size(); ++t) {
        out[t] = y[t] == hi ? lambda0 : scale * (y[t] - lo);
    }
}

void poisson_in_place(std::span<double> y, const NoiserSpec& spec, Stream& s) {
    rate_track_into(y, spec.lambda0, y);
    for (double& v : y) v = static_cast<double>(rng::poisson(s, v));
}

void gen_gamma_in_place(std::span<double> y, const NoiserSpec& spec, Stream& s) {
    rate_track_into(y, spec.lambda0, y);
    const double inv_shape = 1.0 / spec.kappa;
    const rng::GammaSampler draw(spec.kappa);
    for (double& v : y) {
        if (v == 0.0) continue;
        const double g = draw(s, v * inv_shape);
        v = spec.zeta == 1.0 ? g : std::exp(spec.zeta * std::log(g));
    }
}

void lognormal_in_place(std::span<double> y, const NoiserSpec& spec, Stream& s) {
    rate_track_into(y, spec.lambda0, y);
    for (double& v : y) v = rng::lognormal(s, v, spec.kappa);
}

}  // namespace

std::vector<double> rate_track(std::span<const double> y, double lambda0) {
    if (y.empty()) throw ParameterError("rate_track: empty series");
    if (!(lambda0 > 0.0)) throw ParameterError("rate_track: lambda0 must be positive");
    std::vector<double> out(y.size());
    rate_track_into(y, lambda0, out);
    return out;
}

void apply_in_place(std::span<double> y, const NoiserSpec& spec, Stream& s) {
    if (y.empty()) throw ParameterError("noise: empty series");
    spec.check();
    switch (spec.family) {
        case NoiserFamily::poisson: poisson_in_place(y, spec, s); break;
        case NoiserFamily::gen_gamma: gen_gamma_in_place(y, spec, s); break;
        case NoiserFamily::lognormal: lognormal_in_place(y, spec, s); break;
        case NoiserFamily::passthrough: break;
    }
}

namespace {

std::vector<double> run(std::span<const double> y, const NoiserSpec& spec, Stream& s, NoiserFamily expected,
                        const char* who) {
    if (spec.family != expected) throw ParameterError(std::string(who) + ": spec family mismatch");
    std::vector<double> out(y.begin(), y.end());
    apply_in_place(out, spec, s);
    return out;
}

}  // namespace

std::vector<double> apply_poisson(std::span<const double> y, const NoiserSpec& spec, Stream& s) {
    return run(y, spec, s, NoiserFamily::poisson, "apply_poisson");
}

std::vector<double> apply_gen_gamma(std::span<const double> y, const NoiserSpec& spec, Stream& s) {
    return run(y, spec, s, NoiserFamily::gen_gamma, "apply_gen_gamma");
}

std::vector<double> apply_lognormal(std::span<const double> y, const NoiserSpec& spec, Stream& s) {
    return run(y, spec, s, NoiserFamily::lognormal, "apply_lognormal");
}

std::vector<double> apply(std::span<const double> y, const NoiserSpec& spec, Stream& s) {
    std::vector<double> out(y.begin(), y.end());
    apply_in_place(out, spec, s);
    return out;
}

}  // namespace noise
}  // namespace sarsim
