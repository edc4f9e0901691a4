#pragma once

// The two competing generators used in the speed comparison: ForecastPFN's
// multiplicative trend x seasonality x Weibull-noise model, and KernelSynth's
// Gaussian-process draws from randomly composed kernels.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sarsim/config.hpp"
#include "sarsim/rng.hpp"

namespace sarsim {

struct SeasonalComponent {
    double period = 7.0;
    double amplitude = 0.0;  ///< m_nu
    std::vector<double> c;   ///< sine coefficients for f = 1 .. floor(period/2)
    std::vector<double> d;   ///< cosine coefficients, same length
};

struct ForecastPfnSpec {
    double m_lin = 0.0;
    double c_lin = 0.0;
    double m_exp = 1.0;
    double c_exp = 1.0;
    std::array<SeasonalComponent, 3> seasonal{
        SeasonalComponent{7.0, 0.0, {}, {}}, SeasonalComponent{30.5, 0.0, {}, {}}, SeasonalComponent{365.25, 0.0, {}, {}}};
    double m_noise = 0.0;
    double weibull_shape = 1.0;  ///< k
};

/// Prior widths for the parameters that are not pinned by the model itself.
struct ForecastPfnPriors {
    double m_lin_sigma = 1e-3;     ///< m_lin ~ N(0, sigma^2), per time step
    double c_lin_sigma = 0.1;      ///< c_lin ~ N(0, sigma^2)
    double m_exp_sigma = 0.1;      ///< m_exp ~ N(1, sigma^2)
    double c_exp_sigma = 5e-4;     ///< c_exp ~ N(1, sigma^2)
    Range seasonal_amplitude{0.0, 0.5};
    Range noise_scale{0.0, 0.2};
    Range weibull_shape{1.0, 5.0};
};

enum class KernelKind { constant, white, linear, rbf, rational_quadratic, periodic };

struct KernelAtom {
    KernelKind kind = KernelKind::constant;
    double variance = 1.0;      ///< constant sigma_c^2, white sigma_n^2
    double length_scale = 1.0;  ///< rbf, rational_quadratic, periodic
    double alpha = 1.0;         ///< rational_quadratic
    double period = 1.0;        ///< periodic, in grid units of [0, 1]
    double sigma0 = 0.0;        ///< linear offset: k = sigma0^2 + t t'

    /// Value for grid points i, j at coordinates t, u.
    double operator()(std::size_t i, std::size_t j, double t, double u) const;
    bool stationary() const noexcept { return kind != KernelKind::linear; }
};

enum class KernelOp { add, mul };

/// Left fold atoms[0] op[0] atoms[1] op[1] ... : a random binary tree with
/// one leaf per atom.
struct KernelExpr {
    std::vector<KernelAtom> atoms;
    std::vector<KernelOp> ops;  ///< atoms.size() - 1 entries

    double operator()(std::size_t i, std::size_t j, double t, double u) const;
    void check() const;
};

using KernelBank = std::vector<KernelAtom>;

/// Benchmark result for one generator.
struct BenchRow {
    std::string generator;
    std::size_t series_len = 0;
    std::size_t count = 0;  ///< series actually generated
    double seconds = 0.0;
    double per_series_seconds = 0.0;
    double series_per_second = 0.0;
    /// This generator's per-series time over SarSim's; NaN without a sarsim row.
    double ratio_vs_sarsim = 0.0;
};

namespace baselines {

ForecastPfnSpec sample_forecastpfn_spec(Stream& s, const ForecastPfnPriors& priors = {});

/// Scales c, d of each component so that sum_f (c^2 + d^2) = 1.
void normalize_fourier(SeasonalComponent& component);

double forecastpfn_trend(const ForecastPfnSpec& spec, double t);
double forecastpfn_seasonal(const ForecastPfnSpec& spec, double t);

/// y_t = trend(t) seasonal(t) z_t for t = 0 .. T-1 with
/// z_t = 1 + m_noise (z - (ln 2)^(1/k)), z ~ Weibull(1, k).
std::vector<double> forecastpfn_generate(Stream& s, const ForecastPfnSpec& spec, std::size_t length);

/// Constant, white, linear, RBF, rational-quadratic and periodic atoms with
/// periods {4, 6, 12, 24, 26, 30, 48, 52, 60, 96, 365, 730} / length.
KernelBank default_kernel_bank(std::size_t length = 1024);

/// j ~ U{1..max_atoms} atoms with replacement, ops by fair coin.
KernelExpr sample_kernel(Stream& s, const KernelBank& bank, int max_atoms);

/// Grid coordinates i / (n - 1) on [0, 1].
std::vector<double> unit_grid(std::size_t n);

/// n x n covariance on the unit grid, exactly symmetric.
Eigen::MatrixXd covariance(const KernelExpr& expr, std::size_t n);

/// Lower Cholesky factor of K + jitter I, with the jitter doubling from
/// 1e-10 trace/n up to 1e-4 trace/n. Throws GenerationError when none works.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& k, double* jitter_used = nullptr);

/// One draw x ~ N(0, K(expr)) on an n-point grid.
std::vector<double> kernelsynth_sample(Stream& s, const KernelExpr& expr, std::size_t n);

/// Samples a kernel from the bank, then one path.
std::vector<double> kernelsynth_generate(Stream& s, const KernelBank& bank, int max_atoms, std::size_t n);

/// Default config resized to `length`, with a window that fits.
SimulatorConfig bench_config(std::size_t length);

/// Times each generator ("sarsim", "forecastpfn", "kernelsynth") on one
/// thread. SarSim runs whole batches, so its count rounds up to a batch multiple.
std::vector<BenchRow> bench_compare(std::span<const std::string> generators, std::size_t series_len,
                                    std::size_t count, std::uint64_t seed = 0);

}  // namespace baselines
}  // namespace sarsim
