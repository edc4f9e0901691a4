#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sarsim/config.hpp"
#include "sarsim/polyroots.hpp"
#include "sarsim/rng.hpp"

namespace sarsim {

/// Fully resolved SARIMA parameterization.
struct SarimaSpec {
    int p = 0;
    int q = 0;
    int P = 0;
    int Q = 0;
    int s = 0;          ///< seasonal period; s <= 1 means non-seasonal
    double d_frac = 0;  ///< fractional integration order in [0, 1]
    int D = 0;          ///< seasonal integration order, 0 or 1
    LagPolynomial ar{{}, LagConvention::ar};
    LagPolynomial ma{{}, LagConvention::ma};
    LagPolynomial sar{{}, LagConvention::ar};   ///< polynomial in L^s
    LagPolynomial sma{{}, LagConvention::ma};   ///< polynomial in L^s
    double innovation_sigma = 1.0;

    /// Throws ParameterError when the structural invariants do not hold.
    void check() const;
};

/// B trajectories of equal length, row-major.
struct SeriesBatch {
    std::size_t rows = 0;
    std::size_t length = 0;
    std::vector<double> data;
    SarimaSpec spec;
    StreamKey stream_key;

    std::span<double> row(std::size_t b) { return {data.data() + b * length, length}; }
    std::span<const double> row(std::size_t b) const { return {data.data() + b * length, length}; }
};

struct IntegrationMode {
    bool seasonal_pass = false;
    int lag = 1;

    static IntegrationMode nonseasonal() { return {false, 1}; }
    static IntegrationMode seasonal(int period) { return {true, period}; }
};

struct UnrollOptions {
    int fir_taps = 512;
    double divergence_limit = 1e12;
    /// Leading samples dropped from the returned batch (0 keeps the warmup in-band).
    std::size_t discard = 0;
};

namespace sarima {

/// Draws a spec from the configured distribution. `forced_period` pins s
/// (used for SARIMA-2 components).
SarimaSpec sample_spec(Stream& s, const SimulatorConfig& config, std::optional<int> forced_period = {});

/// w = max(p, q, P*s, Q*s, 1 + D*s).
int warmup_length(const SarimaSpec& spec);

/// Unrolls `rows` trajectories of `length` samples, row b drawing from lane
/// key.child(b): warmup y_{1:w}, then innovations e_{1:length}. The recursion
/// runs for t > w, followed by the seasonal and fractional integration passes.
/// Throws DivergenceError on a non-finite value or |y| > divergence_limit.
SeriesBatch unroll(const SarimaSpec& spec, const StreamKey& key, std::size_t rows, std::size_t length,
                   const UnrollOptions& options = {});

/// In-order pass y_t <- y_t + y_{t-lag}. Seasonal lag must be >= 2.
void integrate(std::span<double> series, IntegrationMode mode);
SeriesBatch integrate(SeriesBatch batch, IntegrationMode mode);

/// Binomial FIR coefficients of (1 - L)^d, truncated to `taps` terms.
std::vector<double> frac_diff_filter(double d, int taps);

/// Realizes integration order d' in [0, 1]: cumulative sum followed by the
/// (1 - L)^(1 - d') filter. d' = 0 returns the input unchanged.
void apply_fractional_integration(std::span<double> series, double d_prime, int taps);
SeriesBatch apply_fractional_integration(SeriesBatch batch, double d_prime, int taps);

}  // namespace sarima
}  // namespace sarsim
