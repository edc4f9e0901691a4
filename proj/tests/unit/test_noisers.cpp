#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "sarsim/errors.hpp"
#include "sarsim/noisers.hpp"
#include "stats.hpp"

using namespace sarsim;
namespace ts = testing_support;

namespace {

NoiserSpec make(NoiserFamily family, double lambda0, double kappa = 1.0, double zeta = 1.0) {
    NoiserSpec spec;
    spec.family = family;
    spec.lambda0 = lambda0;
    spec.kappa = kappa;
    spec.zeta = zeta;
    return spec;
}

std::vector<double> seasonal_series(std::size_t n, double period) {
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = std::sin(2 * std::numbers::pi * static_cast<double>(t) / period);
    return y;
}

// Spearman rank correlation without ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
        return r;
    };
    return ts::correlation(ranks(a), ranks(b));
}

}  // namespace

TEST_CASE("rate_track") {
    CHECK(noise::rate_track(std::vector<double>{0, 5, 10}, 4.0) == std::vector<double>{0, 2, 4});
    CHECK(noise::rate_track(std::vector<double>{3, 3}, 4.0) == std::vector<double>{2, 2});
    CHECK_THROWS_AS(noise::rate_track(std::vector<double>{}, 1.0), ParameterError);
    Stream s(StreamKey{1, {}});
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> y(100);
        rng::fill_normal(s, y, 50.0);
        const auto lam = noise::rate_track(y, 7.3);
        CHECK(*std::min_element(lam.begin(), lam.end()) == 0.0);
        CHECK(*std::max_element(lam.begin(), lam.end()) == 7.3);
    }
}

TEST_CASE("poisson noiser") {
    Stream s(StreamKey{2, {}});
    const std::vector<double> flat(100'000, 1.0);

    const auto sparse = noise::apply_poisson(flat, make(NoiserFamily::poisson, 0.1), s);
    const double zeros = static_cast<double>(std::count(sparse.begin(), sparse.end(), 0.0)) / 1e5;
    CHECK(std::abs(zeros / std::exp(-0.05) - 1.0) < 0.01);

    const auto counts = noise::apply_poisson(flat, make(NoiserFamily::poisson, 8.0), s);
    CHECK(std::abs(ts::mean(counts) - 4.0) < 3.0 * std::sqrt(4.0 / 1e5));

    const auto y = seasonal_series(10'000, 24.0);
    const auto lam = noise::rate_track(y, 50.0);
    const auto eta = noise::apply_poisson(y, make(NoiserFamily::poisson, 50.0), s);
    CHECK(ts::correlation(eta, lam) > 0.5);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (lam[t] == 0.0) CHECK(eta[t] == 0.0);
        CHECK(eta[t] >= 0.0);
        CHECK(eta[t] == std::floor(eta[t]));
    }
    CHECK_THROWS_AS(noise::apply_poisson(y, make(NoiserFamily::lognormal, 1.0), s), ParameterError);
}

TEST_CASE("poisson variability tracks the rate") {
    Stream s(StreamKey{3, {}});
    const std::size_t n = 200'000;
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = rng::uniform(s, 0.0, 1.0);
    const auto lam = noise::rate_track(y, 100.0);
    const auto eta = noise::apply_poisson(y, make(NoiserFamily::poisson, 100.0), s);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lam[a] < lam[b]; });
    std::vector<double> bin_rate, bin_var;
    for (int d = 0; d < 10; ++d) {
        std::vector<double> vals, rates;
        for (std::size_t k = d * n / 10; k < (d + 1) * n / 10; ++k) {
            vals.push_back(eta[order[k]]);
            rates.push_back(lam[order[k]]);
        }
        bin_rate.push_back(ts::mean(rates));
        bin_var.push_back(ts::variance(vals));
    }
    CHECK(spearman(bin_rate, bin_var) > 0.9);
}

TEST_CASE("generalized gamma noiser") {
    Stream s(StreamKey{4, {}});
    const std::vector<double> flat(1'000'000, 2.0);
    for (double kappa : {1.0, 4.0, 25.0}) {
        CAPTURE(kappa);
        const auto eta = noise::apply_gen_gamma(flat, make(NoiserFamily::gen_gamma, 6.0, kappa), s);
        const double cv = std::sqrt(ts::variance(eta)) / ts::mean(eta);
        CHECK(std::abs(cv * std::sqrt(kappa) - 1.0) < 0.05);
        CHECK(std::abs(ts::mean(eta) / 3.0 - 1.0) < 0.01);  // mean lambda_t = lambda0 / 2
    }
    const std::vector<double> mid(200'000, 1.0);
    const auto wide = noise::apply_gen_gamma(mid, make(NoiserFamily::gen_gamma, 6.0, 1.0), s);
    const auto narrow = noise::apply_gen_gamma(mid, make(NoiserFamily::gen_gamma, 6.0, 50.0), s);
    CHECK(ts::skewness(narrow) < 0.35);  // 2 / sqrt(50)
    CHECK(ts::skewness(narrow) < ts::skewness(wide) / 4.0);

    // Same stream position, power 1/2 versus power 1.
    const auto y = seasonal_series(5000, 24.0);
    Stream a(StreamKey{5, {}}), b(StreamKey{5, {}});
    const auto plain = noise::apply_gen_gamma(y, make(NoiserFamily::gen_gamma, 10.0, 3.0, 1.0), a);
    const auto root = noise::apply_gen_gamma(y, make(NoiserFamily::gen_gamma, 10.0, 3.0, 0.5), b);
    const auto lam = noise::rate_track(y, 10.0);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (lam[t] == 0.0) {
            CHECK(root[t] == 0.0);
            continue;
        }
        CHECK(root[t] > 0.0);
        CHECK(root[t] == doctest::Approx(std::sqrt(plain[t])).epsilon(1e-12));
    }
}

TEST_CASE("lognormal noiser") {
    Stream s(StreamKey{6, {}});
    const std::vector<double> flat(100'000, 1.0);
    const auto tight = noise::apply_lognormal(flat, make(NoiserFamily::lognormal, 2.0, 0.01), s);
    CHECK(std::abs(ts::median(tight) / std::exp(1.0) - 1.0) < 0.02);

    // One spike sets the range; every other position has rate 0.
    std::vector<double> y(1'000'001, 0.0);
    y[0] = 1.0;
    auto eta = noise::apply_lognormal(y, make(NoiserFamily::lognormal, 3.0, 1.0), s);
    eta.erase(eta.begin());
    CHECK(std::abs(ts::mean(eta) / std::exp(0.5) - 1.0) < 0.02);
    CHECK(*std::min_element(eta.begin(), eta.end()) > 0.0);
}

TEST_CASE("dispatch and passthrough") {
    Stream s(StreamKey{7, {}});
    const auto y = seasonal_series(1000, 7.0);
    CHECK(noise::apply(y, make(NoiserFamily::passthrough, 1.0), s) == y);
    for (auto family : {NoiserFamily::poisson, NoiserFamily::gen_gamma, NoiserFamily::lognormal}) {
        const auto out = noise::apply(y, make(family, 5.0, 2.0, 1.2), s);
        for (double v : out) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
    CHECK_THROWS_AS(noise::apply(y, make(NoiserFamily::poisson, 0.0), s), ParameterError);
    CHECK_THROWS_AS(noise::apply(y, make(NoiserFamily::gen_gamma, 1.0, -1.0), s), ParameterError);
}

TEST_CASE("sample_spec schedule") {
    const NoiserConfig config;
    Stream s(StreamKey{8, {}});
    std::map<NoiserFamily, int> counts;
    for (int i = 0; i < 10'000; ++i) {
        const auto spec = noise::sample_spec(s, config);
        ++counts[spec.family];
        switch (spec.family) {
            case NoiserFamily::poisson: CHECK(config.poisson_rate.contains(spec.lambda0)); break;
            case NoiserFamily::gen_gamma:
                CHECK(config.gamma_rate.contains(spec.lambda0));
                CHECK(config.gamma_shape.contains(spec.kappa));
                CHECK(config.gamma_power.contains(spec.zeta));
                break;
            case NoiserFamily::lognormal:
                CHECK(config.lognormal_rate.contains(spec.lambda0));
                CHECK(config.lognormal_shape.contains(spec.kappa));
                break;
            case NoiserFamily::passthrough: break;
        }
    }
    REQUIRE(counts.size() == 4);
    for (const auto& [family, count] : counts) CHECK(std::abs(count / 1e4 - 0.25) < 0.015);
}
