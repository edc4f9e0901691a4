#include "sarsim/rng.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

#include <cmath>
#include <numbers>

#include "sarsim/errors.hpp"

namespace sarsim {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

StreamKey StreamKey::child(std::uint64_t index) const {
    StreamKey out{master_seed, lane};
    out.lane.push_back(index);
    return out;
}

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

Stream::Stream(const StreamKey& key) {
    // Hash the lane path into the 64-bit Philox key. Each step is a bijective
    // mix, with the path length folded in so [a] and [a, 0] differ.
    std::uint64_t h = mix64(key.master_seed ^ 0x5851f42d4c957f2dULL);
    for (const std::uint64_t index : key.lane) {
        h = mix64(h + 0x9e3779b97f4a7c15ULL + mix64(index ^ 0xd6e8feb86659fd93ULL));
    }
    h = mix64(h ^ (static_cast<std::uint64_t>(key.lane.size()) * 0x2545f4914f6cdd1dULL));
    key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

#if defined(__AVX2__)
void Stream::refill() noexcept {
    // kBlocks consecutive counters in structure-of-arrays form, two vectors
    // of four 64-bit lanes per word (upper halves zero). Same bits as block().
    static_assert(kBlocks == 8);
    const __m256i low = _mm256_set1_epi64x(0xffffffffLL);
    const __m256i mul_a = _mm256_set1_epi64x(kMulA);
    const __m256i mul_b = _mm256_set1_epi64x(kMulB);
    __m256i c0[2], c1[2], c2[2], c3[2];
    for (int h = 0; h < 2; ++h) {
        const auto base = static_cast<long long>(counter_ + 4 * h);
        const __m256i ctr = _mm256_add_epi64(_mm256_set1_epi64x(base), _mm256_set_epi64x(3, 2, 1, 0));
        c0[h] = _mm256_and_si256(ctr, low);
        c1[h] = _mm256_srli_epi64(ctr, 32);
        c2[h] = _mm256_setzero_si256();
        c3[h] = _mm256_setzero_si256();
    }
    counter_ += kBlocks;
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        const __m256i kv0 = _mm256_set1_epi64x(k0);
        const __m256i kv1 = _mm256_set1_epi64x(k1);
        for (int h = 0; h < 2; ++h) {
            const __m256i p0 = _mm256_mul_epu32(c0[h], mul_a);
            const __m256i p1 = _mm256_mul_epu32(c2[h], mul_b);
            const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), c1[h]), kv0);
            const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), c3[h]), kv1);
            c1[h] = _mm256_and_si256(p1, low);
            c3[h] = _mm256_and_si256(p0, low);
            c0[h] = n0;
            c2[h] = n2;
        }
        k0 += kWeylA;
        k1 += kWeylB;
    }
    for (int h = 0; h < 2; ++h) {
        alignas(32) std::uint64_t lo[4], hi[4];
        _mm256_store_si256(reinterpret_cast<__m256i*>(lo),
                           _mm256_or_si256(_mm256_slli_epi64(c1[h], 32), c0[h]));
        _mm256_store_si256(reinterpret_cast<__m256i*>(hi),
                           _mm256_or_si256(_mm256_slli_epi64(c3[h], 32), c2[h]));
        for (int i = 0; i < 4; ++i) {
            buffer_[2 * (4 * h + i)] = lo[i];
            buffer_[2 * (4 * h + i) + 1] = hi[i];
        }
    }
    next_ = 0;
}
#else
void Stream::refill() noexcept {
    for (std::size_t i = 0; i < kBlocks; ++i) {
        const std::uint64_t ctr = counter_ + i;
        const auto out = Philox4x32::block(
            {static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32), 0, 0}, key_);
        buffer_[2 * i] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[2 * i + 1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    }
    counter_ += kBlocks;
    next_ = 0;
}
#endif

namespace {

// Ziggurat tables after Marsaglia and Tsang, in Doornik's formulation with
// 128 layers, a separate uniform for the abscissa, and layer bits taken
// from outside the mantissa bits.
constexpr int kLayers = 128;
constexpr double kTailStart = 3.442619855899;
constexpr double kLayerArea = 9.91256303526217e-3;

struct ZigguratTables {
    std::array<double, kLayers + 1> x{};
    std::array<double, kLayers> ratio{};

    ZigguratTables() {
        double f = std::exp(-0.5 * kTailStart * kTailStart);
        x[0] = kLayerArea / f;
        x[1] = kTailStart;
        x[kLayers] = 0.0;
        for (int i = 2; i < kLayers; ++i) {
            x[i] = std::sqrt(-2.0 * std::log(kLayerArea / x[i - 1] + f));
            f = std::exp(-0.5 * x[i] * x[i]);
        }
        for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
    }
};

const ZigguratTables& zig() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace

double Stream::next_normal() noexcept {
    const auto& t = zig();
    const std::uint64_t bits = (*this)();
    const double u = 2.0 * (static_cast<double>(bits >> 11) * 0x1.0p-53) - 1.0;
    const auto layer = static_cast<std::size_t>(bits & 0x7f);
    if (std::fabs(u) < t.ratio[layer]) return u * t.x[layer];
    return normal_slow_path(bits);
}

double Stream::normal_slow_path(std::uint64_t bits) noexcept {
    const auto& t = zig();
    for (;;) {
        const double u = 2.0 * (static_cast<double>(bits >> 11) * 0x1.0p-53) - 1.0;
        const auto layer = static_cast<std::size_t>(bits & 0x7f);
        if (std::fabs(u) < t.ratio[layer]) return u * t.x[layer];
        if (layer == 0) {
            // Tail beyond kTailStart.
            double x, y;
            do {
                x = std::log(next_open_unit()) / kTailStart;
                y = std::log(next_open_unit());
            } while (-2.0 * y < x * x);
            return u < 0.0 ? x - kTailStart : kTailStart - x;
        }
        const double x = u * t.x[layer];
        const double f0 = std::exp(-0.5 * (t.x[layer] * t.x[layer] - x * x));
        const double f1 = std::exp(-0.5 * (t.x[layer + 1] * t.x[layer + 1] - x * x));
        if (f1 + next_unit() * (f0 - f1) < 1.0) return x;
        bits = (*this)();
    }
}

namespace rng {

double uniform(Stream& s, double lo, double hi) {
    if (!(lo <= hi)) throw ParameterError("uniform: requires lo <= hi");
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * s.next_unit();
    return v > hi ? hi : v;
}

double log_uniform(Stream& s, double lo, double hi) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw ParameterError("log_uniform: bounds must be positive");
    if (!(lo <= hi)) throw ParameterError("log_uniform: requires lo <= hi");
    if (lo == hi) return lo;
    const double v = std::exp(uniform(s, std::log(lo), std::log(hi)));
    if (v < lo) return lo;
    return v > hi ? hi : v;
}

std::int64_t uniform_int(Stream& s, std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ParameterError("uniform_int: requires lo <= hi");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(s());
    // Lemire's multiply-shift with rejection of the biased low zone.
    unsigned __int128 m = static_cast<unsigned __int128>(s()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(s()) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return lo + static_cast<std::int64_t>(m >> 64);
}

bool bernoulli(Stream& s, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("bernoulli: p must lie in [0, 1]");
    return s.next_unit() < p;
}

double normal(Stream& s, double mu, double sigma) {
    if (!(sigma >= 0.0)) throw ParameterError("normal: sigma must be non-negative");
    const double z = s.next_normal();
    return sigma == 0.0 ? mu : mu + sigma * z;
}

void fill_normal(Stream& s, std::span<double> out, double sigma) {
    if (sigma == 1.0) {
        for (double& v : out) v = s.next_normal();
    } else {
        for (double& v : out) v = sigma * s.next_normal();
    }
}

double log_factorial(std::uint64_t k) noexcept {
    static const auto table = [] {
        std::array<double, 128> t{};
        double acc = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            acc += std::log(static_cast<double>(i));
            t[i] = acc;
        }
        return t;
    }();
    if (k < table.size()) return table[k];
    // Stirling series for ln Gamma(n), n = k + 1 >= 129.
    const double n = static_cast<double>(k) + 1.0;
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    const double series =
        inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    return (n - 0.5) * std::log(n) - n + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

std::uint64_t poisson(Stream& s, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("poisson: lambda must be finite and non-negative");
    }
    if (lambda == 0.0) return 0;
    if (lambda < 10.0) {
        // Sequential-search inversion with a single uniform.
        static const auto reciprocal = [] {
            std::array<double, 64> r{};
            for (std::size_t k = 1; k < r.size(); ++k) r[k] = 1.0 / static_cast<double>(k);
            return r;
        }();
        const double u = s.next_unit();
        double p = std::exp(-lambda);
        double cdf = p;
        std::uint64_t k = 0;
        // P(K >= 63 | lambda < 10) is below 1e-27; the cap only guards rounding.
        while (u >= cdf && k + 1 < reciprocal.size()) {
            ++k;
            p *= lambda * reciprocal[k];
            cdf += p;
        }
        return k;
    }
    // PTRS transformed rejection (Hoermann 1993).
    const double slam = std::sqrt(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = s.next_unit() - 0.5;
        const double v = s.next_unit();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const auto k = static_cast<std::uint64_t>(kf);
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <= -lambda + kf * std::log(lambda) - log_factorial(k)) {
            return k;
        }
    }
}

GammaSampler::GammaSampler(double shape) : shape_(shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw ParameterError("gamma: shape must be positive and finite");
    // Shapes below one are drawn at shape + 1 and boosted by U^(1/shape).
    const double base = shape < 1.0 ? shape + 1.0 : shape;
    d_ = base - 1.0 / 3.0;
    c_ = 1.0 / std::sqrt(9.0 * d_);
}

double GammaSampler::operator()(Stream& s, double scale) const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("gamma: scale must be positive and finite");
    // Marsaglia-Tsang squeeze.
    double g;
    for (;;) {
        double x, v;
        do {
            x = s.next_normal();
            v = 1.0 + c_ * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = s.next_open_unit();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d_ * (1.0 - v + std::log(v))) {
            g = d_ * v;
            break;
        }
    }
    if (shape_ < 1.0) g *= std::pow(s.next_open_unit(), 1.0 / shape_);
    return scale * g;
}

double gamma(Stream& s, double shape, double scale) { return GammaSampler(shape)(s, scale); }

double lognormal(Stream& s, double mu, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("lognormal: sigma must be positive");
    return std::exp(mu + sigma * s.next_normal());
}

double weibull(Stream& s, double scale, double shape) {
    if (!(scale > 0.0) || !(shape > 0.0)) throw ParameterError("weibull: parameters must be positive");
    return scale * std::pow(-std::log(s.next_open_unit()), 1.0 / shape);
}

}  // namespace rng
}  // namespace sarsim
