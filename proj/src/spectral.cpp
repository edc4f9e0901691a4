#include "sarsim/spectral.hpp"

#include <algorithm>
#include <complex>
#include <mutex>
#include <numeric>

#include <fftw3.h>

#include "sarsim/errors.hpp"

namespace sarsim::spectral {

namespace {

// FFTW's planner is not thread-safe; execution with new-array plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool is_local_max(std::span<const double> p, std::size_t k) {
    const bool left = k == 0 || p[k] > p[k - 1];
    const bool right = k + 1 == p.size() || p[k] >= p[k + 1];
    return left && right;
}

}  // namespace

std::vector<double> periodogram(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 2) throw ParameterError("periodogram: need at least two samples");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);

    const std::size_t bins = n / 2 + 1;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(bins);
    for (std::size_t i = 0; i < n; ++i) in[i] = series[i] - mean;

    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);

    std::vector<double> p(bins);
    for (std::size_t k = 0; k < bins; ++k) p[k] = (out[k][0] * out[k][0] + out[k][1] * out[k][1]) / static_cast<double>(n);

    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return p;
}

std::size_t argmax_in_band(std::span<const double> pgram, std::size_t lo, std::size_t hi) {
    if (pgram.empty()) throw ParameterError("argmax_in_band: empty periodogram");
    hi = std::min(hi, pgram.size() - 1);
    if (lo > hi) throw ParameterError("argmax_in_band: empty band");
    std::size_t best = lo;
    for (std::size_t k = lo + 1; k <= hi; ++k) {
        if (pgram[k] > pgram[best]) best = k;
    }
    return best;
}

double median(std::span<const double> values) {
    if (values.empty()) throw ParameterError("median: empty input");
    std::vector<double> v(values.begin(), values.end());
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

std::vector<std::size_t> top_peaks(std::span<const double> pgram, std::size_t k) {
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i < pgram.size(); ++i) {
        if (is_local_max(pgram, i) && pgram[i] > 0.0) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return pgram[a] > pgram[b]; });
    if (peaks.size() > k) peaks.resize(k);
    return peaks;
}

bool has_peak_near(std::span<const double> pgram, std::size_t bin, std::size_t tol, double ratio) {
    if (bin >= pgram.size()) return false;
    const std::size_t lo = bin > tol ? bin - tol : 0;
    const std::size_t best = argmax_in_band(pgram, lo, bin + tol);
    return is_local_max(pgram, best) && pgram[best] >= ratio * median(pgram);
}

}  // namespace sarsim::spectral
