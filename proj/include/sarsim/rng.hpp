#pragma once

// Counter-based random streams and the samplers used throughout the engine.
//
// A stream is identified by a master seed plus a hierarchical lane path. The
// pair is hashed into a Philox4x32-10 key, and the stream walks the 128-bit
// counter space of that key, so the output of a lane never depends on what
// other lanes have drawn or on which thread drew it.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace sarsim {

/// Purpose tags used as the last component of a lane path.
enum class LaneTag : std::uint64_t {
    spec = 1,
    rows = 2,
    envelope_rows = 3,
    noise = 4,
    window = 5,
    recipe = 6,
};

struct StreamKey {
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> lane;

    /// Key of a sub-lane: this lane's path with `index` appended.
    StreamKey child(std::uint64_t index) const;
    StreamKey child(LaneTag tag) const { return child(static_cast<std::uint64_t>(tag)); }

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Philox4x32 with 10 rounds.
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// Random stream for one lane. Satisfies UniformRandomBitGenerator.
class Stream {
  public:
    using result_type = std::uint64_t;

    explicit Stream(const StreamKey& key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (next_ == kBlocks * 2) refill();
        return buffer_[next_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a logarithm argument.
    double next_open_unit() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal draw (128-layer ziggurat).
    double next_normal() noexcept;

  private:
    // Philox blocks generated per refill; each block yields two 64-bit words.
    static constexpr std::size_t kBlocks = 8;

    void refill() noexcept;
    double normal_slow_path(std::uint64_t bits) noexcept;

    Philox4x32::Key key_{};
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, kBlocks * 2> buffer_{};
    std::size_t next_ = kBlocks * 2;
};

/// 64-bit finalizer from SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace rng {

double uniform(Stream& s, double lo, double hi);
double log_uniform(Stream& s, double lo, double hi);
/// Integer uniform on the closed range {lo..hi}, unbiased.
std::int64_t uniform_int(Stream& s, std::int64_t lo, std::int64_t hi);
bool bernoulli(Stream& s, double p);
double normal(Stream& s, double mu, double sigma);
std::uint64_t poisson(Stream& s, double lambda);
double gamma(Stream& s, double shape, double scale);

/// Gamma draws with the shape-dependent constants computed once.
class GammaSampler {
  public:
    explicit GammaSampler(double shape);
    double operator()(Stream& s, double scale) const;

  private:
    double shape_;
    double d_;
    double c_;
};
double lognormal(Stream& s, double mu, double sigma);
double weibull(Stream& s, double scale, double shape);

/// Fill `out` with i.i.d. N(0, sigma^2).
void fill_normal(Stream& s, std::span<double> out, double sigma = 1.0);

/// ln(k!) accurate to ~1e-15 relative; used by the Poisson sampler and tests.
double log_factorial(std::uint64_t k) noexcept;

}  // namespace rng
}  // namespace sarsim
