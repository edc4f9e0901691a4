#pragma once

// Rate-conditioned observation noise. The structured series only sets the
// rate track lambda_t; the emitted series is the noise draw itself.

#include <span>
#include <vector>

#include "sarsim/config.hpp"
#include "sarsim/rng.hpp"

namespace sarsim {

struct NoiserSpec {
    NoiserFamily family = NoiserFamily::passthrough;
    double lambda0 = 1.0;
    double kappa = 1.0;  ///< Gamma shape or lognormal sigma
    double zeta = 1.0;   ///< power transform, gen_gamma only

    void check() const;
};

namespace noise {

/// Family uniform over the configured list, then its parameters
/// (lambda0 and kappa log-uniform, zeta uniform).
NoiserSpec sample_spec(Stream& s, const NoiserConfig& config);

/// lambda_t = lambda0 (y_t - min y) / (max y - min y); lambda0 / 2 when y is constant.
std::vector<double> rate_track(std::span<const double> y, double lambda0);

/// eta_t ~ Poisson(lambda_t).
std::vector<double> apply_poisson(std::span<const double> y, const NoiserSpec& spec, Stream& s);
/// eta_t = G^zeta with G ~ Gamma(shape kappa, mean lambda_t); 0 where lambda_t = 0.
std::vector<double> apply_gen_gamma(std::span<const double> y, const NoiserSpec& spec, Stream& s);
/// eta_t ~ LogNormal(mu = lambda_t, sigma = kappa).
std::vector<double> apply_lognormal(std::span<const double> y, const NoiserSpec& spec, Stream& s);

/// Dispatch on the family; passthrough returns y unchanged.
std::vector<double> apply(std::span<const double> y, const NoiserSpec& spec, Stream& s);

/// In-place variant used by the pipeline.
void apply_in_place(std::span<double> y, const NoiserSpec& spec, Stream& s);

}  // namespace noise
}  // namespace sarsim
