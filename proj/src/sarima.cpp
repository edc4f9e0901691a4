#include "sarsim/sarima.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "sarsim/errors.hpp"

namespace sarsim {

void SarimaSpec::check() const {
    if (p < 0 || q < 0 || P < 0 || Q < 0 || s < 0) throw ParameterError("SarimaSpec: orders must be non-negative");
    if (s <= 1 && (P != 0 || Q != 0 || D != 0)) {
        throw ParameterError("SarimaSpec: seasonal terms require s >= 2");
    }
    if (D != 0 && D != 1) throw ParameterError("SarimaSpec: D must be 0 or 1");
    if (!(d_frac >= 0.0 && d_frac <= 1.0)) throw ParameterError("SarimaSpec: d_frac must lie in [0, 1]");
    if (ar.order() != static_cast<std::size_t>(p) || ma.order() != static_cast<std::size_t>(q) ||
        sar.order() != static_cast<std::size_t>(P) || sma.order() != static_cast<std::size_t>(Q)) {
        throw ParameterError("SarimaSpec: coefficient vector lengths must match the orders");
    }
    if (!(innovation_sigma > 0.0)) throw ParameterError("SarimaSpec: innovation_sigma must be positive");
}

namespace sarima {

namespace {

// Time-major buffer: sample t of row b lives at t * rows + b.
struct TimeMajor {
    std::size_t rows;
    std::size_t length;
    std::vector<double> data;

    double* at(std::size_t t) { return data.data() + t * rows; }
};

// Scratch buffers reused across calls on the same thread. Fresh multi-MB
// allocations per batch cost more in page faults than the arithmetic.
struct Workspace {
    std::vector<double> y;
    std::vector<double> e;
    std::vector<double> draws;
    std::vector<double> packed;
    std::vector<double> fir_out;
};

Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

// dst[b] += c * src[b], the single accumulation step every pass is built from.
inline void axpy(double* __restrict dst, const double* __restrict src, double c, std::size_t n) {
    for (std::size_t b = 0; b < n; ++b) dst[b] += c * src[b];
}

void check_finite(const TimeMajor& y, double limit) {
    for (const double v : y.data) {
        if (!(std::fabs(v) <= limit)) throw DivergenceError("unroll: trajectory diverged");
    }
}

void integrate_time_major(TimeMajor& y, std::size_t lag) {
    for (std::size_t t = lag; t < y.length; ++t) {
        double* dst = y.at(t);
        const double* src = y.at(t - lag);
        for (std::size_t b = 0; b < y.rows; ++b) dst[b] += src[b];
    }
}

// out_t = sum_{k=0}^{min(t, K-1)} h_k x_{t-k}. Each output accumulates with
// fma in ascending source time starting from +0.0. The kernels pad h with
// zeros so tiles need no edge cases; fma(0, x, acc) == acc for finite x, so
// every path produces the same bits as fir_scalar_lane.
void fir_scalar_lane(const double* x, double* out, std::size_t stride, std::size_t length,
                     const std::vector<double>& h) {
    const std::size_t taps = h.size();
    for (std::size_t t = 0; t < length; ++t) {
        const std::size_t m0 = t + 1 > taps ? t + 1 - taps : 0;
        double acc = 0.0;
        for (std::size_t m = m0; m <= t; ++m) acc = std::fma(h[t - m], x[m * stride], acc);
        out[t * stride] = acc;
    }
}

constexpr std::size_t kTile = 6;

#if defined(__AVX512F__)
constexpr std::size_t kVec = 8;
using VecD = __m512d;
inline VecD vload(const double* p) { return _mm512_loadu_pd(p); }
inline void vstore(double* p, VecD v) { _mm512_storeu_pd(p, v); }
inline VecD vset1(double v) { return _mm512_set1_pd(v); }
inline VecD vzero() { return _mm512_setzero_pd(); }
inline VecD vfma(VecD a, VecD b, VecD c) { return _mm512_fmadd_pd(a, b, c); }
#elif defined(__AVX2__) && defined(__FMA__)
constexpr std::size_t kVec = 4;
using VecD = __m256d;
inline VecD vload(const double* p) { return _mm256_loadu_pd(p); }
inline void vstore(double* p, VecD v) { _mm256_storeu_pd(p, v); }
inline VecD vset1(double v) { return _mm256_set1_pd(v); }
inline VecD vzero() { return _mm256_setzero_pd(); }
inline VecD vfma(VecD a, VecD b, VecD c) { return _mm256_fmadd_pd(a, b, c); }
#else
constexpr std::size_t kVec = 1;
using VecD = double;
inline VecD vload(const double* p) { return *p; }
inline void vstore(double* p, VecD v) { *p = v; }
inline VecD vset1(double v) { return v; }
inline VecD vzero() { return 0.0; }
inline VecD vfma(VecD a, VecD b, VecD c) { return std::fma(a, b, c); }
#endif

// Rows handled per register block.
constexpr std::size_t kWidth = 4;
constexpr std::size_t kLanes = kVec * kWidth;
static_assert(kTile == 6 && kWidth == 4, "fir_time_major unrolls a 6x4 register block");

void fir_time_major(TimeMajor& y, const std::vector<double>& h) {
    const std::size_t n = y.rows;
    const std::size_t length = y.length;
    const std::size_t taps = h.size();
    const double* x = y.data.data();
    Workspace& ws = workspace();
    std::vector<double> out = std::move(ws.fir_out);
    out.resize(y.data.size());

    // hz[k + kTile] = h_k for 0 <= k < taps, zero elsewhere.
    std::vector<double> hz(taps + 2 * kTile, 0.0);
    std::copy(h.begin(), h.end(), hz.begin() + kTile);

    // Each block of kLanes rows is packed contiguously so the kernel streams it.
    std::vector<double>& packed = ws.packed;
    packed.resize(length * kLanes);
    std::size_t b0 = 0;
    for (; b0 + kLanes <= n; b0 += kLanes) {
        for (std::size_t t = 0; t < length; ++t) {
            std::copy_n(x + t * n + b0, kLanes, packed.data() + t * kLanes);
        }
        for (std::size_t t0 = 0; t0 < length; t0 += kTile) {
            const std::size_t tile = std::min(kTile, length - t0);
            const std::size_t t_last = t0 + tile - 1;
            const std::size_t m_begin = t0 + 1 > taps ? t0 + 1 - taps : 0;
            // Named accumulators keep the 6x4 block in registers.
            VecD a00 = vzero(), a01 = vzero(), a02 = vzero(), a03 = vzero();
            VecD a10 = vzero(), a11 = vzero(), a12 = vzero(), a13 = vzero();
            VecD a20 = vzero(), a21 = vzero(), a22 = vzero(), a23 = vzero();
            VecD a30 = vzero(), a31 = vzero(), a32 = vzero(), a33 = vzero();
            VecD a40 = vzero(), a41 = vzero(), a42 = vzero(), a43 = vzero();
            VecD a50 = vzero(), a51 = vzero(), a52 = vzero(), a53 = vzero();
            for (std::size_t m = m_begin; m <= t_last; ++m) {
                const double* xm = packed.data() + m * kLanes;
                const VecD x0 = vload(xm);
                const VecD x1 = vload(xm + kVec);
                const VecD x2 = vload(xm + 2 * kVec);
                const VecD x3 = vload(xm + 3 * kVec);
                const double* hm = hz.data() + kTile + t0 - m;
                VecD hk = vset1(hm[0]);
                a00 = vfma(hk, x0, a00); a01 = vfma(hk, x1, a01); a02 = vfma(hk, x2, a02); a03 = vfma(hk, x3, a03);
                hk = vset1(hm[1]);
                a10 = vfma(hk, x0, a10); a11 = vfma(hk, x1, a11); a12 = vfma(hk, x2, a12); a13 = vfma(hk, x3, a13);
                hk = vset1(hm[2]);
                a20 = vfma(hk, x0, a20); a21 = vfma(hk, x1, a21); a22 = vfma(hk, x2, a22); a23 = vfma(hk, x3, a23);
                hk = vset1(hm[3]);
                a30 = vfma(hk, x0, a30); a31 = vfma(hk, x1, a31); a32 = vfma(hk, x2, a32); a33 = vfma(hk, x3, a33);
                hk = vset1(hm[4]);
                a40 = vfma(hk, x0, a40); a41 = vfma(hk, x1, a41); a42 = vfma(hk, x2, a42); a43 = vfma(hk, x3, a43);
                hk = vset1(hm[5]);
                a50 = vfma(hk, x0, a50); a51 = vfma(hk, x1, a51); a52 = vfma(hk, x2, a52); a53 = vfma(hk, x3, a53);
            }
            const VecD acc[kTile][kWidth] = {{a00, a01, a02, a03}, {a10, a11, a12, a13}, {a20, a21, a22, a23},
                                             {a30, a31, a32, a33}, {a40, a41, a42, a43}, {a50, a51, a52, a53}};
            for (std::size_t j = 0; j < tile; ++j) {
                double* dst = out.data() + (t0 + j) * n + b0;
                for (std::size_t w = 0; w < kWidth; ++w) vstore(dst + w * kVec, acc[j][w]);
            }
        }
    }
    for (; b0 < n; ++b0) fir_scalar_lane(x + b0, out.data() + b0, n, length, h);
    y.data.swap(out);
    ws.fir_out = std::move(out);
}

void fractional_time_major(TimeMajor& y, double d_prime, int taps) {
    if (d_prime == 0.0) return;
    integrate_time_major(y, 1);
    if (d_prime == 1.0) return;
    const int used = static_cast<int>(std::min<std::size_t>(y.length, static_cast<std::size_t>(taps)));
    fir_time_major(y, frac_diff_filter(1.0 - d_prime, used));
}

}  // namespace

SarimaSpec sample_spec(Stream& s, const SimulatorConfig& config, std::optional<int> forced_period) {
    const auto& lim = config.orders;
    SarimaSpec spec;
    spec.p = static_cast<int>(rng::uniform_int(s, 0, lim.p_max));
    spec.q = static_cast<int>(rng::uniform_int(s, 0, lim.q_max));
    spec.P = static_cast<int>(rng::uniform_int(s, 0, lim.P_max));
    spec.Q = static_cast<int>(rng::uniform_int(s, 0, lim.Q_max));
    spec.s = static_cast<int>(rng::uniform_int(s, 0, lim.s_max));
    if (forced_period) spec.s = *forced_period;
    // The joint lacunary AR polynomial is hard to stabilize; keep one side only.
    if (rng::bernoulli(s, 0.5)) {
        spec.P = 0;
    } else {
        spec.p = 0;
    }
    if (spec.s <= 1) {
        spec.P = 0;
        spec.Q = 0;
        spec.D = 0;
    } else {
        spec.D = config.integration.seasonal_order;
    }
    spec.d_frac = rng::uniform(s, config.integration.fractional_order.lo, config.integration.fractional_order.hi);

    const auto& poles = config.poles;
    spec.ar = poly::expand(poly::sample_pole_set(s, spec.p, poles.ar_radius_max), LagConvention::ar);
    spec.ma = poly::expand(poly::sample_pole_set(s, spec.q, poles.ma_radius_max), LagConvention::ma);
    spec.sar = poly::expand(poly::sample_pole_set(s, spec.P, poles.seasonal_ar_radius_max), LagConvention::ar);
    spec.sma = poly::expand(poly::sample_pole_set(s, spec.Q, poles.seasonal_ma_radius_max), LagConvention::ma);
    return spec;
}

int warmup_length(const SarimaSpec& spec) {
    return std::max({spec.p, spec.q, spec.P * spec.s, spec.Q * spec.s, 1 + spec.D * spec.s});
}

SeriesBatch unroll(const SarimaSpec& spec, const StreamKey& key, std::size_t rows, std::size_t length,
                   const UnrollOptions& options) {
    spec.check();
    const auto w = static_cast<std::size_t>(warmup_length(spec));
    if (rows == 0) throw ParameterError("unroll: batch size must be positive");
    if (length <= w) throw ParameterError("unroll: length must exceed the warmup length");

    if (options.discard >= length) throw ParameterError("unroll: discard must be shorter than the length");

    Workspace& ws = workspace();
    TimeMajor y{rows, length, std::move(ws.y)};
    TimeMajor e{rows, length, std::move(ws.e)};
    y.data.assign(rows * length, 0.0);
    e.data.resize(rows * length);
    const double sigma = spec.innovation_sigma;
    // Rows are drawn in groups of kGroup and interleaved a time step at a
    // time, so each step writes contiguous memory.
    constexpr std::size_t kGroup = 8;
    std::vector<double>& draws = ws.draws;
    draws.resize(kGroup * (w + length));
    for (std::size_t b0 = 0; b0 < rows; b0 += kGroup) {
        const std::size_t g = std::min(kGroup, rows - b0);
        for (std::size_t j = 0; j < g; ++j) {
            Stream stream(key.child(b0 + j));
            rng::fill_normal(stream, std::span(draws).subspan(j * (w + length), w + length), sigma);
        }
        for (std::size_t t = 0; t < w; ++t) {
            double* dst = y.at(t) + b0;
            for (std::size_t j = 0; j < g; ++j) dst[j] = draws[j * (w + length) + t];
        }
        for (std::size_t t = 0; t < length; ++t) {
            double* dst = e.at(t) + b0;
            for (std::size_t j = 0; j < g; ++j) dst[j] = draws[j * (w + length) + w + t];
        }
    }

    const auto seasonal = static_cast<std::size_t>(spec.s);
    for (std::size_t t = w; t < length; ++t) {
        double* dst = y.at(t);
        for (int i = 1; i <= spec.p; ++i) axpy(dst, y.at(t - i), spec.ar.coefficients[i - 1], rows);
        for (int j = 1; j <= spec.P; ++j) axpy(dst, y.at(t - j * seasonal), spec.sar.coefficients[j - 1], rows);
        for (int i = 1; i <= spec.q; ++i) axpy(dst, e.at(t - i), spec.ma.coefficients[i - 1], rows);
        for (int j = 1; j <= spec.Q; ++j) axpy(dst, e.at(t - j * seasonal), spec.sma.coefficients[j - 1], rows);
        axpy(dst, e.at(t), 1.0, rows);
    }
    check_finite(y, options.divergence_limit);

    if (spec.D == 1) {
        integrate_time_major(y, seasonal);
        check_finite(y, options.divergence_limit);
    }
    fractional_time_major(y, spec.d_frac, options.fir_taps);
    check_finite(y, options.divergence_limit);

    const std::size_t kept = length - options.discard;
    SeriesBatch out;
    out.rows = rows;
    out.length = kept;
    out.spec = spec;
    out.stream_key = key;
    out.data.resize(rows * kept);
    for (std::size_t b0 = 0; b0 < rows; b0 += kGroup) {
        const std::size_t g = std::min(kGroup, rows - b0);
        for (std::size_t t = options.discard; t < length; ++t) {
            const double* src = y.at(t) + b0;
            for (std::size_t j = 0; j < g; ++j) out.data[(b0 + j) * kept + (t - options.discard)] = src[j];
        }
    }
    ws.y = std::move(y.data);
    ws.e = std::move(e.data);
    return out;
}

void integrate(std::span<double> series, IntegrationMode mode) {
    if (mode.seasonal_pass && mode.lag < 2) throw ParameterError("integrate: seasonal period must be >= 2");
    if (mode.lag < 1) throw ParameterError("integrate: lag must be positive");
    const auto lag = static_cast<std::size_t>(mode.lag);
    for (std::size_t t = lag; t < series.size(); ++t) series[t] += series[t - lag];
}

SeriesBatch integrate(SeriesBatch batch, IntegrationMode mode) {
    for (std::size_t b = 0; b < batch.rows; ++b) integrate(batch.row(b), mode);
    return batch;
}

std::vector<double> frac_diff_filter(double d, int taps) {
    if (taps < 1) throw ParameterError("frac_diff_filter: taps must be positive");
    if (!(d >= 0.0 && d <= 1.0)) throw ParameterError("frac_diff_filter: d must lie in [0, 1]");
    std::vector<double> h(static_cast<std::size_t>(taps));
    h[0] = 1.0;
    for (std::size_t i = 1; i < h.size(); ++i) {
        h[i] = h[i - 1] * (static_cast<double>(i) - 1.0 - d) / static_cast<double>(i);
    }
    return h;
}

void apply_fractional_integration(std::span<double> series, double d_prime, int taps) {
    if (!(d_prime >= 0.0 && d_prime <= 1.0)) {
        throw ParameterError("apply_fractional_integration: d' must lie in [0, 1]");
    }
    if (taps < 1) throw ParameterError("apply_fractional_integration: taps must be positive");
    TimeMajor y{1, series.size(), {series.begin(), series.end()}};
    fractional_time_major(y, d_prime, taps);
    std::copy(y.data.begin(), y.data.end(), series.begin());
}

SeriesBatch apply_fractional_integration(SeriesBatch batch, double d_prime, int taps) {
    for (std::size_t b = 0; b < batch.rows; ++b) apply_fractional_integration(batch.row(b), d_prime, taps);
    return batch;
}

}  // namespace sarima
}  // namespace sarsim
