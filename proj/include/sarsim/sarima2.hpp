#pragma once

// Two-component superposition: a high-frequency base series modulated by a
// low-frequency envelope running at 1/upsample_factor of the base rate.

#include <cstddef>
#include <span>
#include <vector>

#include "sarsim/config.hpp"
#include "sarsim/rng.hpp"
#include "sarsim/sarima.hpp"

namespace sarsim {

enum class Mixing { additive, multiplicative };

const char* to_string(Mixing mixing) noexcept;
Mixing mixing_from_string(const std::string& name);

struct Sarima2Spec {
    SarimaSpec base;
    SarimaSpec envelope;
    Mixing mixing = Mixing::additive;
    double omega = 0.0;  ///< modulation depth, multiplicative only
    int upsample_factor = 1;
    EnvelopeUpsampling upsampling = EnvelopeUpsampling::hold;

    void check() const;
};

namespace sarima2 {

/// Draw order: pair index, base spec, envelope spec, mixing coin, omega.
Sarima2Spec sample_spec(Stream& s, const SimulatorConfig& config);

/// Envelope samples needed to cover `target_len` base samples.
std::size_t envelope_length(int factor, std::size_t target_len);

/// Affine map of (min, max) onto (-1, +1); a constant input maps to zeros.
std::vector<double> normalize_envelope(std::span<const double> env);

/// Zero-order hold: each value repeated `factor` times, cut to `target_len`.
std::vector<double> upsample_hold(std::span<const double> env, int factor, std::size_t target_len);

/// Piecewise-linear interpolation between consecutive envelope values,
/// holding the last value. Same length contract as upsample_hold.
std::vector<double> upsample_linear(std::span<const double> env, int factor, std::size_t target_len);

/// Row-wise composition. `envelope` rows are at the envelope rate and are
/// upsampled to base.length; multiplicative mode normalizes them first.
SeriesBatch compose(SeriesBatch base, const SeriesBatch& envelope, const Sarima2Spec& spec);

}  // namespace sarima2
}  // namespace sarsim
