#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "sarsim/rng.hpp"
#include "sarsim/spectral.hpp"

using namespace sarsim;

namespace {

// O(n^2) DFT of the demeaned series.
std::vector<double> naive_periodogram(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> out(n / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += (x[t] - mean) * std::polar(1.0, angle);
        }
        out[k] = std::norm(acc) / static_cast<double>(n);
    }
    return out;
}

}  // namespace

TEST_CASE("periodogram matches a direct DFT") {
    Stream s(StreamKey{1, {}});
    for (std::size_t n : {2u, 7u, 64u, 255u, 1000u}) {
        std::vector<double> x(n);
        rng::fill_normal(s, x, 3.0);
        for (auto& v : x) v += 2.0;
        const auto got = spectral::periodogram(x);
        const auto want = naive_periodogram(x);
        REQUIRE(got.size() == want.size());
        double scale = 1e-300;
        for (double v : want) scale = std::max(scale, v);
        for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-10 * scale);
    }
    CHECK_THROWS(spectral::periodogram(std::vector<double>{1.0}));
}

TEST_CASE("pure tone") {
    const std::size_t n = 480;
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = 5.0 + std::cos(2 * std::numbers::pi * 20.0 * static_cast<double>(t) / n);
    const auto p = spectral::periodogram(x);
    CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(p[20] == doctest::Approx(n / 4.0).epsilon(1e-9));
    CHECK(spectral::argmax_in_band(p, 1, p.size()) == 20);
    CHECK(spectral::top_peaks(p, 3).front() == 20);
    CHECK(spectral::has_peak_near(p, 21, 1, 3.0));
}

TEST_CASE("helpers") {
    const std::vector<double> p{9, 1, 5, 2, 2, 7, 3};
    CHECK(spectral::argmax_in_band(p, 1, 4) == 2);
    CHECK(spectral::argmax_in_band(p, 4, 100) == 5);
    CHECK(spectral::top_peaks(p, 5) == std::vector<std::size_t>{5, 2});
    CHECK(spectral::top_peaks(p, 1) == std::vector<std::size_t>{5});
    CHECK(spectral::median(std::vector<double>{3, 1, 2}) == 2);
    CHECK(spectral::median(std::vector<double>{4, 1, 2, 3}) == 2.5);
    // Bin 5 is a local max at 7 / median 3 = 2.33.
    CHECK(spectral::has_peak_near(p, 5, 0, 2.0));
    CHECK_FALSE(spectral::has_peak_near(p, 5, 0, 2.5));
    // Bin 3 sits below bin 2.
    CHECK_FALSE(spectral::has_peak_near(p, 3, 0, 0.1));
}
