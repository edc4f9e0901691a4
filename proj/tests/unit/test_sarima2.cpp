#include <doctest.h>

#include <cmath>
#include <map>

#include "sarsim/errors.hpp"
#include "sarsim/sarima2.hpp"
#include "stats.hpp"

using namespace sarsim;

namespace {

SimulatorConfig with_pairs(std::vector<std::array<int, 2>> pairs) {
    SimulatorConfig config;
    config.sarima2.seasonality_pairs = std::move(pairs);
    return config;
}

SeriesBatch make_batch(std::size_t rows, std::size_t length, std::vector<double> data) {
    SeriesBatch b;
    b.rows = rows;
    b.length = length;
    b.data = std::move(data);
    return b;
}

Sarima2Spec spec_with(Mixing mixing, double omega, int factor) {
    Sarima2Spec spec;
    spec.mixing = mixing;
    spec.omega = omega;
    spec.upsample_factor = factor;
    return spec;
}

}  // namespace

TEST_CASE("sample_spec pairs and factors") {
    Stream s(StreamKey{1, {}});
    const auto daily = sarima2::sample_spec(s, with_pairs({{24, 7}}));
    CHECK(daily.base.s == 24);
    CHECK(daily.envelope.s == 7);
    CHECK(daily.upsample_factor == 24);

    const auto flat = sarima2::sample_spec(s, with_pairs({{0, 7}}));
    CHECK(flat.base.s == 0);
    CHECK(flat.envelope.s == 7);
    CHECK(flat.upsample_factor == 1);

    const SimulatorConfig config;
    std::map<int, int> pairs;
    int additive = 0;
    for (int i = 0; i < 10'000; ++i) {
        const auto spec = sarima2::sample_spec(s, config);
        REQUIRE_NOTHROW(spec.check());
        additive += spec.mixing == Mixing::additive;
        CHECK(spec.omega >= 0.0);
        CHECK(spec.omega <= 1.0);
        CHECK(spec.upsample_factor == std::max(spec.base.s, 1));
        ++pairs[spec.base.s * 100 + spec.envelope.s];
    }
    CHECK(std::abs(additive / 1e4 - 0.5) < 0.015);
    CHECK(pairs.size() == 6);
    for (const auto& [key, count] : pairs) CHECK(std::abs(count / 1e4 - 1.0 / 6.0) < 0.015);
}

TEST_CASE("envelope_length") {
    CHECK(sarima2::envelope_length(24, 6000) == 250);
    CHECK(sarima2::envelope_length(24, 6001) == 251);
    CHECK(sarima2::envelope_length(1, 6000) == 6000);
    CHECK_THROWS_AS(sarima2::envelope_length(0, 10), ParameterError);
}

TEST_CASE("normalize_envelope") {
    CHECK(sarima2::normalize_envelope(std::vector<double>{0, 5, 10}) == std::vector<double>{-1, 0, 1});
    CHECK(sarima2::normalize_envelope(std::vector<double>{3, 3, 3}) == std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(sarima2::normalize_envelope(std::vector<double>{}), ParameterError);

    Stream s(StreamKey{2, {}});
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> env(50);
        rng::fill_normal(s, env, 1e3);
        const auto out = sarima2::normalize_envelope(env);
        CHECK(*std::min_element(out.begin(), out.end()) == -1.0);
        CHECK(*std::max_element(out.begin(), out.end()) == 1.0);
    }
}

TEST_CASE("upsampling") {
    CHECK(sarima2::upsample_hold(std::vector<double>{1, 2}, 3, 6) == std::vector<double>{1, 1, 1, 2, 2, 2});
    CHECK(sarima2::upsample_hold(std::vector<double>{1, 2, 3}, 1, 2) == std::vector<double>{1, 2});
    CHECK(sarima2::upsample_hold(std::vector<double>{1, 2}, 3, 5).size() == 5);
    CHECK_THROWS_AS(sarima2::upsample_hold(std::vector<double>{1, 2}, 3, 7), ParameterError);
    CHECK_THROWS_AS(sarima2::upsample_hold(std::vector<double>{1, 2}, 0, 2), ParameterError);

    const auto lin = sarima2::upsample_linear(std::vector<double>{0, 4}, 4, 8);
    CHECK(lin == std::vector<double>{0, 1, 2, 3, 4, 4, 4, 4});
    CHECK_THROWS_AS(sarima2::upsample_linear(std::vector<double>{0}, 4, 5), ParameterError);
}

TEST_CASE("compose") {
    Stream s(StreamKey{3, {}});
    const std::size_t rows = 3, length = 48, factor = 12;
    std::vector<double> base_data(rows * length), env_data(rows * 4);
    rng::fill_normal(s, base_data);
    rng::fill_normal(s, env_data, 5.0);
    const auto base = make_batch(rows, length, base_data);
    const auto env = make_batch(rows, 4, env_data);

    SUBCASE("multiplicative with omega 0 is the base") {
        const auto out = sarima2::compose(base, env, spec_with(Mixing::multiplicative, 0.0, factor));
        CHECK(out.data == base.data);
    }
    SUBCASE("additive with a zero envelope is the base") {
        const auto zero = make_batch(rows, 4, std::vector<double>(rows * 4, 0.0));
        const auto out = sarima2::compose(base, zero, spec_with(Mixing::additive, 0.3, factor));
        CHECK(out.data == base.data);
    }
    SUBCASE("additive adds the upsampled envelope") {
        const auto out = sarima2::compose(base, env, spec_with(Mixing::additive, 0.3, factor));
        for (std::size_t b = 0; b < rows; ++b) {
            const auto up = sarima2::upsample_hold(env.row(b), static_cast<int>(factor), length);
            for (std::size_t t = 0; t < length; ++t) {
                const double got = out.row(b)[t];
                CHECK(got == base.row(b)[t] + up[t]);
                // The difference recovers the envelope up to one rounding of the sum.
                CHECK(std::abs((got - base.row(b)[t]) - up[t]) <= std::abs(std::nextafter(got, 1e300) - got));
            }
        }
    }
    SUBCASE("multiplicative gain stays inside [1 - omega, 1 + omega]") {
        const double omega = 0.7;
        const auto out = sarima2::compose(base, env, spec_with(Mixing::multiplicative, omega, factor));
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            const double gain = out.data[i] / base.data[i];
            CHECK(gain >= 1.0 - omega - 1e-12);
            CHECK(gain <= 1.0 + omega + 1e-12);
            CHECK(std::signbit(out.data[i]) == std::signbit(base.data[i]));
        }
    }
    SUBCASE("multiplicative omega 1 at the envelope minimum zeroes the output") {
        // One envelope step covers the whole row; its value is the minimum.
        const auto short_env = make_batch(1, 2, {-3.0, 8.0});
        const auto one = make_batch(1, 12, std::vector<double>(base_data.begin(), base_data.begin() + 12));
        const auto out = sarima2::compose(one, short_env, spec_with(Mixing::multiplicative, 1.0, 12));
        for (double v : out.data) CHECK(v == 0.0);
    }
    SUBCASE("shape errors") {
        const auto wrong_rows = make_batch(2, 4, std::vector<double>(8, 1.0));
        CHECK_THROWS_AS(sarima2::compose(base, wrong_rows, spec_with(Mixing::additive, 0.0, factor)), ParameterError);
        CHECK_THROWS_AS(sarima2::compose(base, env, spec_with(Mixing::additive, 0.0, 6)), ParameterError);
        CHECK_THROWS_AS(sarima2::compose(base, env, spec_with(Mixing::multiplicative, 1.5, factor)), ParameterError);
    }
}

TEST_CASE("mixing names") {
    CHECK(mixing_from_string(to_string(Mixing::additive)) == Mixing::additive);
    CHECK(mixing_from_string(to_string(Mixing::multiplicative)) == Mixing::multiplicative);
    CHECK_THROWS_AS(mixing_from_string("both"), ParameterError);
}
