#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sarsim::spectral {

/// |X_k|^2 / n of the demeaned series for k = 0 .. n/2.
std::vector<double> periodogram(std::span<const double> series);

/// Bin of the largest value in [lo, hi] (clamped to the periodogram).
std::size_t argmax_in_band(std::span<const double> pgram, std::size_t lo, std::size_t hi);

double median(std::span<const double> values);

/// Up to k strict local maxima (bin 0 excluded), strongest first.
std::vector<std::size_t> top_peaks(std::span<const double> pgram, std::size_t k);

/// True when the strongest bin within `tol` of `bin` is a local maximum of
/// the periodogram standing at least `ratio` times above its median.
bool has_peak_near(std::span<const double> pgram, std::size_t bin, std::size_t tol, double ratio);

}  // namespace sarsim::spectral
