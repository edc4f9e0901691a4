#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sarsim/baselines.hpp"
#include "sarsim/errors.hpp"
#include "sarsim/spectral.hpp"
#include "stats.hpp"

using namespace sarsim;
namespace ts = testing_support;

namespace {

ForecastPfnSpec flat_spec() {
    ForecastPfnSpec spec;
    spec.m_lin = 0.0;
    spec.c_lin = 0.0;
    spec.m_exp = 1.0;
    spec.c_exp = 1.0;
    spec.m_noise = 0.0;
    return spec;
}

KernelExpr single(KernelAtom atom) { return KernelExpr{{atom}, {}}; }

// exp(-2 sin^2(pi x / p) / l^2) = e^{-a} (I_0(a) + 2 sum_k I_k(a) cos(2 pi k x / p))
// with a = 1 / l^2, so harmonic k of a path carries an Exp(I_k(a)) periodogram
// ordinate. Returns P(harmonic 1 beats harmonics 2..K).
double fundamental_wins(double length_scale, int harmonics) {
    const double a = 1.0 / (length_scale * length_scale);
    std::vector<double> mu;
    for (int k = 1; k <= harmonics; ++k) mu.push_back(std::cyl_bessel_i(static_cast<double>(k), a));
    const double upper = 60.0 * mu[0];
    const int steps = 200'000;
    const double h = upper / steps;
    double total = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double x = i * h;
        double f = std::exp(-x / mu[0]) / mu[0];
        for (std::size_t k = 1; k < mu.size(); ++k) f *= -std::expm1(-x / mu[k]);
        total += (i == 0 || i == steps ? 0.5 : 1.0) * f;
    }
    return total * h;
}

// Fraction of paths whose periodogram peaks within one bin of 16.
double periodic_hit_rate(double length_scale, int paths, std::uint64_t seed) {
    const std::size_t n = 1024;
    KernelAtom atom{.kind = KernelKind::periodic, .length_scale = length_scale, .period = 64.0 / n};
    const auto chol = baselines::cholesky_with_jitter(baselines::covariance(single(atom), n));
    Stream s(StreamKey{seed, {}});
    int hits = 0;
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (int p = 0; p < paths; ++p) {
        for (auto& v : z) v = rng::normal(s, 0.0, 1.0);
        const Eigen::VectorXd x = chol * z;
        const auto pg = spectral::periodogram(std::span<const double>(x.data(), n));
        const auto peak = spectral::argmax_in_band(pg, 1, pg.size());
        hits += peak >= 15 && peak <= 17;
    }
    return static_cast<double>(hits) / paths;
}

double loglog_slope(const std::vector<double>& n, const std::vector<double>& t) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n.size(); ++i) {
        x.push_back(std::log(n[i]));
        y.push_back(std::log(t[i]));
    }
    const double mx = ts::mean(x), my = ts::mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// Best of several timings of one generator.
double per_series(const std::string& generator, std::size_t len, std::size_t count, int repeats = 3) {
    const std::vector<std::string> names{generator};
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
        best = std::min(best, baselines::bench_compare(names, len, count, static_cast<std::uint64_t>(r))[0].per_series_seconds);
    }
    return best;
}

}  // namespace

TEST_CASE("forecastpfn collapses to its factors") {
    Stream s(StreamKey{1, {}});
    const auto ones = baselines::forecastpfn_generate(s, flat_spec(), 500);
    for (double v : ones) CHECK(v == 1.0);

    auto spec = baselines::sample_forecastpfn_spec(s);
    spec.m_noise = 0.0;
    const auto clean = baselines::forecastpfn_generate(s, spec, 400);
    for (std::size_t t = 0; t < clean.size(); ++t) {
        const double td = static_cast<double>(t);
        CHECK(clean[t] == baselines::forecastpfn_trend(spec, td) * baselines::forecastpfn_seasonal(spec, td));
    }

    auto no_season = baselines::sample_forecastpfn_spec(s);
    for (auto& c : no_season.seasonal) c.amplitude = 0.0;
    for (double t : {0.0, 3.5, 100.0}) CHECK(baselines::forecastpfn_seasonal(no_season, t) == 1.0);
    Stream a(StreamKey{2, {}}), b(StreamKey{2, {}});
    auto noisy = no_season;
    noisy.m_noise = 0.1;
    const auto y = baselines::forecastpfn_generate(a, noisy, 300);
    const double z_median = std::pow(std::numbers::ln2, 1.0 / noisy.weibull_shape);
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double z = rng::weibull(b, 1.0, noisy.weibull_shape);
        CHECK(y[t] == doctest::Approx(baselines::forecastpfn_trend(noisy, static_cast<double>(t)) *
                                      (1.0 + 0.1 * (z - z_median))).epsilon(1e-14));
    }
    CHECK_THROWS_AS(baselines::forecastpfn_generate(s, spec, 0), ParameterError);
}

TEST_CASE("forecastpfn trend and seasonal formulas") {
    ForecastPfnSpec spec = flat_spec();
    spec.m_lin = 0.01;
    spec.c_lin = 0.2;
    spec.m_exp = 1.5;
    spec.c_exp = 1.001;
    CHECK(baselines::forecastpfn_trend(spec, 10.0) == doctest::Approx((1.3) * 1.5 * std::pow(1.001, 10.0)));

    spec.seasonal[0].amplitude = 0.5;
    spec.seasonal[0].c = {0.6, 0.0, 0.0};
    spec.seasonal[0].d = {0.0, 0.8, 0.0};
    const double t = 2.0;
    const double expect = 1.0 + 0.5 * (0.6 * std::sin(2 * std::numbers::pi * t / 7) + 0.8 * std::cos(4 * std::numbers::pi * t / 7));
    CHECK(baselines::forecastpfn_seasonal(spec, t) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("forecastpfn priors") {
    Stream s(StreamKey{3, {}});
    const ForecastPfnPriors priors;
    for (int i = 0; i < 500; ++i) {
        const auto spec = baselines::sample_forecastpfn_spec(s, priors);
        CHECK(priors.noise_scale.contains(spec.m_noise));
        CHECK(priors.weibull_shape.contains(spec.weibull_shape));
        for (const auto& comp : spec.seasonal) {
            CHECK(priors.seasonal_amplitude.contains(comp.amplitude));
            REQUIRE(comp.c.size() == static_cast<std::size_t>(std::floor(comp.period / 2)));
            double energy = 0.0;
            for (std::size_t f = 0; f < comp.c.size(); ++f) energy += comp.c[f] * comp.c[f] + comp.d[f] * comp.d[f];
            CHECK(std::abs(energy - 1.0) < 1e-12);
        }
    }
    SeasonalComponent zero{7.0, 0.3, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    CHECK_NOTHROW(baselines::normalize_fourier(zero));
}

TEST_CASE("kernel bank") {
    const auto bank = baselines::default_kernel_bank(1024);
    int periodic = 0;
    for (const auto& atom : bank) {
        if (atom.kind != KernelKind::periodic) continue;
        ++periodic;
        const double samples = atom.period * 1024;
        CHECK(std::abs(samples - std::round(samples)) < 1e-9);
    }
    CHECK(periodic == 12);
    CHECK(baselines::unit_grid(5) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});

    Stream s(StreamKey{4, {}});
    for (int i = 0; i < 200; ++i) {
        const auto expr = baselines::sample_kernel(s, bank, 5);
        CHECK(expr.atoms.size() >= 1);
        CHECK(expr.atoms.size() <= 5);
        CHECK(expr.ops.size() + 1 == expr.atoms.size());
        CHECK_NOTHROW(expr.check());
    }
    CHECK_THROWS_AS(baselines::sample_kernel(s, bank, 0), ParameterError);
}

TEST_CASE("kernel algebra folds left") {
    const KernelAtom c2{.kind = KernelKind::constant, .variance = 2.0};
    const KernelAtom c3{.kind = KernelKind::constant, .variance = 3.0};
    const KernelAtom c5{.kind = KernelKind::constant, .variance = 5.0};
    const KernelExpr expr{{c2, c3, c5}, {KernelOp::add, KernelOp::mul}};
    CHECK(expr(0, 1, 0.0, 0.5) == 25.0);
    const KernelAtom lin{.kind = KernelKind::linear, .sigma0 = 2.0};
    CHECK(lin(0, 1, 0.5, 0.25) == doctest::Approx(4.125));
    const KernelAtom white{.kind = KernelKind::white, .variance = 0.5};
    CHECK(white(3, 3, 0.1, 0.1) == 0.5);
    CHECK(white(3, 4, 0.1, 0.1) == 0.0);
}

TEST_CASE("covariances are symmetric and PSD") {
    const std::size_t n = 256;
    const auto bank = baselines::default_kernel_bank(n);
    Stream s(StreamKey{5, {}});
    for (int i = 0; i < 100; ++i) {
        const auto expr = baselines::sample_kernel(s, bank, 5);
        const auto k = baselines::covariance(expr, n);
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * k.trace());
    }
}

TEST_CASE("cholesky jitter ladder") {
    double jitter = -1.0;
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(50, 50);
    const auto l = baselines::cholesky_with_jitter(ones, &jitter);
    CHECK(jitter > 0.0);
    CHECK(jitter <= 1e-4);
    CHECK((l * l.transpose() - ones).cwiseAbs().maxCoeff() <= 2 * jitter);

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(10, 10);
    baselines::cholesky_with_jitter(identity, &jitter);
    CHECK(jitter == doctest::Approx(1e-10));  // first rung

    const Eigen::MatrixXd negative = -Eigen::MatrixXd::Identity(10, 10);
    CHECK_THROWS_AS(baselines::cholesky_with_jitter(negative), GenerationError);
}

TEST_CASE("kernelsynth special kernels") {
    Stream s(StreamKey{6, {}});
    const std::size_t n = 1024;

    // Pooled over 100 paths; a single path has lag-1 standard error 1/32.
    double r = 0.0;
    for (int p = 0; p < 100; ++p) {
        const auto x = baselines::kernelsynth_sample(s, single({.kind = KernelKind::white, .variance = 1.0}), n);
        r += ts::autocorrelation(x, 1) / 100.0;
    }
    CHECK(std::abs(r) < 0.02);

    for (int p = 0; p < 5; ++p) {
        const auto x = baselines::kernelsynth_sample(s, single({.kind = KernelKind::constant, .variance = 4.0}), n);
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        CHECK(*hi - *lo < 1e-3);
    }
}

TEST_CASE("periodic kernel spectral peak") {
    // Harmonics below Nyquist: 16 k <= 512.
    const double oracle_unit = fundamental_wins(1.0, 32);
    const double oracle_wide = fundamental_wins(2.0, 32);
    CHECK(oracle_unit == doctest::Approx(0.79).epsilon(0.02));
    CHECK(oracle_wide > 0.9);

    const int paths = 1000;
    for (auto [ell, oracle] : {std::pair{1.0, oracle_unit}, std::pair{2.0, oracle_wide}}) {
        CAPTURE(ell);
        const double rate = periodic_hit_rate(ell, paths, 7);
        const double sigma = std::sqrt(oracle * (1 - oracle) / paths);
        CHECK(std::abs(rate - oracle) < 4 * sigma + 0.01);
        if (ell == 2.0) CHECK(rate >= 0.9);
    }
}

TEST_CASE("bench_compare contract") {
    const std::vector<std::string> both{"sarsim", "kernelsynth"};
    const auto rows = baselines::bench_compare(both, 256, 8);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].generator == "sarsim");
    CHECK(rows[0].count == 256);
    CHECK(rows[0].ratio_vs_sarsim == 1.0);
    CHECK(rows[1].count == 8);
    CHECK(rows[1].ratio_vs_sarsim > 1.0);
    CHECK(rows[1].per_series_seconds == doctest::Approx(rows[1].seconds / 8));

    const std::vector<std::string> none;
    const std::vector<std::string> bogus{"gpt"};
    CHECK_THROWS_AS(baselines::bench_compare(none, 256, 1), ParameterError);
    CHECK_THROWS_AS(baselines::bench_compare(bogus, 256, 1), ParameterError);
    const std::vector<std::string> pfn{"forecastpfn"};
    CHECK(std::isnan(baselines::bench_compare(pfn, 64, 4)[0].ratio_vs_sarsim));

    const auto cfg = baselines::bench_config(1024);
    CHECK(cfg.window.context == 512);
    CHECK(cfg.window.horizon == 64);
    CHECK(cfg.window.max_pad == 504);
}

TEST_CASE("bench timings are stable and scale as expected") {
    // Self-comparison and amortization. Batch cost depends on its recipe, so
    // enough batches are needed to average that out.
    const double a = per_series("sarsim", 1024, 4096);
    const double b = per_series("sarsim", 1024, 4096);
    CHECK(std::max(a, b) / std::min(a, b) < 1.2);
    const double doubled = per_series("sarsim", 1024, 8192);
    CHECK(std::max(a, doubled) / std::min(a, doubled) < 1.2);

    const std::vector<double> lengths{256, 512, 1024};
    std::vector<double> kernel, sarsim;
    for (double n : lengths) {
        const auto len = static_cast<std::size_t>(n);
        kernel.push_back(per_series("kernelsynth", len, 8));
        sarsim.push_back(per_series("sarsim", len, 512));
    }
    const double kernel_slope = loglog_slope(lengths, kernel);
    const double sarsim_slope = loglog_slope(lengths, sarsim);
    MESSAGE("kernelsynth exponent " << kernel_slope << ", sarsim exponent " << sarsim_slope);
    CHECK(kernel_slope >= 2.3);
    CHECK(kernel_slope <= 3.3);
    CHECK(sarsim_slope >= 0.7);
    CHECK(sarsim_slope <= 1.4);
}
