#include "sarsim/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "sarsim/errors.hpp"
#include "sarsim/pipeline.hpp"

namespace sarsim {

double KernelAtom::operator()(std::size_t i, std::size_t j, double t, double u) const {
    const double delta = t - u;
    switch (kind) {
        case KernelKind::constant: return variance;
        case KernelKind::white: return i == j ? variance : 0.0;
        case KernelKind::linear: return sigma0 * sigma0 + t * u;
        case KernelKind::rbf: return std::exp(-delta * delta / (2.0 * length_scale * length_scale));
        case KernelKind::rational_quadratic:
            return std::pow(1.0 + delta * delta / (2.0 * alpha * length_scale * length_scale), -alpha);
        case KernelKind::periodic: {
            const double s = std::sin(std::numbers::pi * std::abs(delta) / period);
            return std::exp(-2.0 * s * s / (length_scale * length_scale));
        }
    }
    return 0.0;
}

double KernelExpr::operator()(std::size_t i, std::size_t j, double t, double u) const {
    double acc = atoms.front()(i, j, t, u);
    for (std::size_t a = 1; a < atoms.size(); ++a) {
        const double v = atoms[a](i, j, t, u);
        acc = ops[a - 1] == KernelOp::add ? acc + v : acc * v;
    }
    return acc;
}

void KernelExpr::check() const {
    if (atoms.empty()) throw ParameterError("KernelExpr: no atoms");
    if (ops.size() + 1 != atoms.size()) throw ParameterError("KernelExpr: need one operator between each atom pair");
    for (const auto& a : atoms) {
        if (a.kind == KernelKind::periodic && !(a.period > 0.0)) throw ParameterError("KernelExpr: period must be > 0");
        if (a.kind == KernelKind::rational_quadratic && !(a.alpha > 0.0)) {
            throw ParameterError("KernelExpr: alpha must be > 0");
        }
        const bool scaled = a.kind == KernelKind::rbf || a.kind == KernelKind::rational_quadratic ||
                            a.kind == KernelKind::periodic;
        if (scaled && !(a.length_scale > 0.0)) throw ParameterError("KernelExpr: length scale must be > 0");
    }
}

namespace baselines {

void normalize_fourier(SeasonalComponent& component) {
    double energy = 0.0;
    for (std::size_t f = 0; f < component.c.size(); ++f) {
        energy += component.c[f] * component.c[f] + component.d[f] * component.d[f];
    }
    if (!(energy > 0.0)) return;
    const double scale = 1.0 / std::sqrt(energy);
    for (std::size_t f = 0; f < component.c.size(); ++f) {
        component.c[f] *= scale;
        component.d[f] *= scale;
    }
}

ForecastPfnSpec sample_forecastpfn_spec(Stream& s, const ForecastPfnPriors& priors) {
    ForecastPfnSpec spec;
    spec.m_lin = rng::normal(s, 0.0, priors.m_lin_sigma);
    spec.c_lin = rng::normal(s, 0.0, priors.c_lin_sigma);
    spec.m_exp = rng::normal(s, 1.0, priors.m_exp_sigma);
    spec.c_exp = rng::normal(s, 1.0, priors.c_exp_sigma);
    for (auto& comp : spec.seasonal) {
        comp.amplitude = rng::uniform(s, priors.seasonal_amplitude.lo, priors.seasonal_amplitude.hi);
        const auto harmonics = static_cast<std::size_t>(std::floor(comp.period / 2.0));
        comp.c.resize(harmonics);
        comp.d.resize(harmonics);
        for (std::size_t f = 1; f <= harmonics; ++f) {
            // Variance 1/f.
            const double sd = 1.0 / std::sqrt(static_cast<double>(f));
            comp.c[f - 1] = rng::normal(s, 0.0, sd);
            comp.d[f - 1] = rng::normal(s, 0.0, sd);
        }
        normalize_fourier(comp);
    }
    spec.m_noise = rng::uniform(s, priors.noise_scale.lo, priors.noise_scale.hi);
    spec.weibull_shape = rng::uniform(s, priors.weibull_shape.lo, priors.weibull_shape.hi);
    return spec;
}

double forecastpfn_trend(const ForecastPfnSpec& spec, double t) {
    return (1.0 + spec.m_lin * t + spec.c_lin) * (spec.m_exp * std::pow(spec.c_exp, t));
}

double forecastpfn_seasonal(const ForecastPfnSpec& spec, double t) {
    double out = 1.0;
    for (const auto& comp : spec.seasonal) {
        if (comp.amplitude == 0.0) continue;
        double sum = 0.0;
        for (std::size_t f = 1; f <= comp.c.size(); ++f) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(f) * t / comp.period;
            sum += comp.c[f - 1] * std::sin(angle) + comp.d[f - 1] * std::cos(angle);
        }
        out *= 1.0 + comp.amplitude * sum;
    }
    return out;
}

std::vector<double> forecastpfn_generate(Stream& s, const ForecastPfnSpec& spec, std::size_t length) {
    if (length < 1) throw ParameterError("forecastpfn_generate: length must be >= 1");
    if (!(spec.weibull_shape > 0.0)) throw ParameterError("forecastpfn_generate: Weibull shape must be > 0");
    for (const auto& comp : spec.seasonal) {
        if (comp.c.size() != comp.d.size()) throw ParameterError("forecastpfn_generate: c and d lengths differ");
    }
    const double z_median = std::pow(std::numbers::ln2, 1.0 / spec.weibull_shape);
    std::vector<double> y(length);
    for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i);
        const double z = rng::weibull(s, 1.0, spec.weibull_shape);
        const double noise = 1.0 + spec.m_noise * (z - z_median);
        y[i] = forecastpfn_trend(spec, t) * forecastpfn_seasonal(spec, t) * noise;
    }
    return y;
}

KernelBank default_kernel_bank(std::size_t length) {
    if (length < 1) throw ParameterError("default_kernel_bank: length must be >= 1");
    KernelBank bank;
    bank.push_back({.kind = KernelKind::constant, .variance = 1.0});
    for (double v : {0.1, 1.0}) bank.push_back({.kind = KernelKind::white, .variance = v});
    for (double s0 : {0.0, 1.0, 10.0}) bank.push_back({.kind = KernelKind::linear, .sigma0 = s0});
    for (double l : {0.1, 1.0, 10.0}) bank.push_back({.kind = KernelKind::rbf, .length_scale = l});
    for (double a : {0.1, 1.0, 10.0}) bank.push_back({.kind = KernelKind::rational_quadratic, .alpha = a});
    for (double p : {4, 6, 12, 24, 26, 30, 48, 52, 60, 96, 365, 730}) {
        bank.push_back({.kind = KernelKind::periodic, .period = p / static_cast<double>(length)});
    }
    return bank;
}

KernelExpr sample_kernel(Stream& s, const KernelBank& bank, int max_atoms) {
    if (bank.empty()) throw ParameterError("sample_kernel: empty kernel bank");
    if (max_atoms < 1) throw ParameterError("sample_kernel: max_atoms must be >= 1");
    const auto j = rng::uniform_int(s, 1, max_atoms);
    KernelExpr expr;
    for (std::int64_t a = 0; a < j; ++a) {
        const auto pick = rng::uniform_int(s, 0, static_cast<std::int64_t>(bank.size()) - 1);
        expr.atoms.push_back(bank[static_cast<std::size_t>(pick)]);
        if (a > 0) expr.ops.push_back(rng::bernoulli(s, 0.5) ? KernelOp::add : KernelOp::mul);
    }
    return expr;
}

std::vector<double> unit_grid(std::size_t n) {
    std::vector<double> t(n, 0.0);
    if (n < 2) return t;
    const double step = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * step;
    return t;
}

Eigen::MatrixXd covariance(const KernelExpr& expr, std::size_t n) {
    expr.check();
    if (n < 1) throw ParameterError("covariance: n must be >= 1");
    const auto grid = unit_grid(n);
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd k(N, N);

    // Stationary atoms depend on i - j only, so they are tabulated per lag.
    std::vector<double> lag(n);
    for (std::size_t a = 0; a < expr.atoms.size(); ++a) {
        const auto& atom = expr.atoms[a];
        const bool first = a == 0;
        const bool add = !first && expr.ops[a - 1] == KernelOp::add;
        if (atom.stationary()) {
            for (std::size_t l = 0; l < n; ++l) lag[l] = atom(l, 0, grid[l], 0.0);
        }
        for (std::size_t j = 0; j < n; ++j) {
            double* col = k.data() + j * n;
            for (std::size_t i = j; i < n; ++i) {
                const double v = atom.stationary() ? lag[i - j] : atom(i, j, grid[i], grid[j]);
                col[i] = first ? v : (add ? col[i] + v : col[i] * v);
            }
        }
    }
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = j + 1; i < N; ++i) k(j, i) = k(i, j);
    }
    return k;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& k, double* jitter_used) {
    if (k.rows() != k.cols() || k.rows() == 0) throw ParameterError("cholesky_with_jitter: need a square matrix");
    const double n = static_cast<double>(k.rows());
    const double trace = k.trace();
    if (!(trace > 0.0) || !std::isfinite(trace)) {
        throw GenerationError("cholesky_with_jitter: covariance trace is not positive and finite");
    }
    const double floor = 1e-10 * trace / n;
    const double ceiling = 1e-4 * trace / n;
    Eigen::MatrixXd work(k.rows(), k.cols());
    for (double jitter = floor; jitter <= ceiling; jitter *= 2.0) {
        work = k;
        work.diagonal().array() += jitter;
        Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work);
        if (llt.info() == Eigen::Success) {
            if (jitter_used) *jitter_used = jitter;
            work.triangularView<Eigen::StrictlyUpper>().setZero();
            return work;
        }
    }
    throw GenerationError("cholesky_with_jitter: factorization failed at the maximum jitter");
}

std::vector<double> kernelsynth_sample(Stream& s, const KernelExpr& expr, std::size_t n) {
    const auto l = cholesky_with_jitter(covariance(expr, n));
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    rng::fill_normal(s, {z.data(), n});
    const Eigen::VectorXd x = l.triangularView<Eigen::Lower>() * z;
    return {x.data(), x.data() + n};
}

std::vector<double> kernelsynth_generate(Stream& s, const KernelBank& bank, int max_atoms, std::size_t n) {
    if (n < 1) throw ParameterError("kernelsynth_generate: n must be >= 1");
    return kernelsynth_sample(s, sample_kernel(s, bank, max_atoms), n);
}

SimulatorConfig bench_config(std::size_t length) {
    if (length < 2) throw ParameterError("bench_config: length must be >= 2");
    SimulatorConfig config;
    config.sequence_length = static_cast<int>(length);
    const int len = config.sequence_length;
    config.window.horizon = std::max(1, len / 16);
    config.window.context = std::max(1, len / 2);
    config.window.max_pad = std::max(0, config.window.context - 8);
    config.check();
    return config;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Keeps generated values observable so the work cannot be optimized away.
volatile double g_sink = 0.0;

BenchRow run_sarsim(std::size_t len, std::size_t count, std::uint64_t seed) {
    const auto config = bench_config(len);
    const auto rows = static_cast<std::size_t>(config.batch_size);
    const std::size_t batches = (count + rows - 1) / rows;
    const auto start = Clock::now();
    for (std::size_t b = 0; b < batches; ++b) {
        const auto batch = pipeline::generate_batch(seed, b, config);
        g_sink = g_sink + batch.series.data.back();
    }
    return {"sarsim", len, batches * rows, seconds_since(start)};
}

BenchRow run_forecastpfn(std::size_t len, std::size_t count, std::uint64_t seed) {
    const ForecastPfnPriors priors;
    const auto start = Clock::now();
    for (std::size_t i = 0; i < count; ++i) {
        Stream s(StreamKey{seed, {0xf0, i}});
        const auto spec = sample_forecastpfn_spec(s, priors);
        g_sink = g_sink + forecastpfn_generate(s, spec, len).back();
    }
    return {"forecastpfn", len, count, seconds_since(start)};
}

BenchRow run_kernelsynth(std::size_t len, std::size_t count, std::uint64_t seed) {
    const auto bank = default_kernel_bank(len);
    const auto start = Clock::now();
    for (std::size_t i = 0; i < count; ++i) {
        Stream s(StreamKey{seed, {0xf1, i}});
        g_sink = g_sink + kernelsynth_generate(s, bank, 5, len).back();
    }
    return {"kernelsynth", len, count, seconds_since(start)};
}

}  // namespace

std::vector<BenchRow> bench_compare(std::span<const std::string> generators, std::size_t series_len,
                                    std::size_t count, std::uint64_t seed) {
    if (generators.empty()) throw ParameterError("bench_compare: no generators given");
    if (count < 1) throw ParameterError("bench_compare: count must be >= 1");
    std::vector<BenchRow> rows;
    for (const auto& name : generators) {
        BenchRow row;
        if (name == "sarsim") {
            row = run_sarsim(series_len, count, seed);
        } else if (name == "forecastpfn") {
            row = run_forecastpfn(series_len, count, seed);
        } else if (name == "kernelsynth") {
            row = run_kernelsynth(series_len, count, seed);
        } else {
            throw ParameterError("bench_compare: unknown generator " + name);
        }
        row.per_series_seconds = row.seconds / static_cast<double>(row.count);
        row.series_per_second = row.seconds > 0.0 ? static_cast<double>(row.count) / row.seconds
                                                  : std::numeric_limits<double>::infinity();
        rows.push_back(row);
    }
    double sarsim_per_series = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        if (r.generator == "sarsim") sarsim_per_series = r.per_series_seconds;
    }
    for (auto& r : rows) r.ratio_vs_sarsim = r.per_series_seconds / sarsim_per_series;
    return rows;
}

}  // namespace baselines
}  // namespace sarsim
