#pragma once

// Top-level sampler. A batch is identified by (master_seed, batch_index);
// attempt a of that batch draws everything from lane {batch_index, a}:
//
//   .child(spec)            structure coin, specs, noiser parameters
//   .child(rows).child(b)   base trajectory of row b
//   .child(envelope_rows)   envelope trajectories (SARIMA-2 only)
//   .child(noise).child(b)  noiser draws for row b
//
// Training windows are keyed by the batch alone: {batch_index, window, b}.

#include <cstdint>
#include <deque>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sarsim/config.hpp"
#include "sarsim/noisers.hpp"
#include "sarsim/sarima.hpp"
#include "sarsim/sarima2.hpp"

namespace sarsim {

enum class Structure { sarima, sarima2 };

/// Everything needed to regenerate one batch bit-for-bit.
struct GenerationRecipe {
    std::uint64_t master_seed = 0;
    std::uint64_t batch_index = 0;
    std::uint32_t attempt = 0;
    std::size_t rows = 0;
    std::size_t length = 0;  ///< emitted length, after warmup trimming
    Structure structure = Structure::sarima;
    /// For plain SARIMA only `structured.base` is used.
    Sarima2Spec structured;
    NoiserSpec noiser;
    int fir_taps = 512;
    double divergence_limit = 1e12;

    nlohmann::json to_json() const;
    static GenerationRecipe from_json(const nlohmann::json& doc);
    /// 16 hex digits of FNV-1a over the compact JSON form.
    std::string digest() const;
};

struct GeneratedBatch {
    SeriesBatch series;
    GenerationRecipe recipe;
};

/// Context 4096 / target 512 under the default geometry. The first pad_len
/// context values are zero and flagged in pad_mask.
struct TrainingWindow {
    std::vector<double> context;
    std::vector<std::uint8_t> pad_mask;  ///< 1 on padded positions
    int pad_len = 0;
    std::vector<double> target;
    std::size_t start = 0;  ///< offset of the slice within the source row
};

/// FNV-1a 64 of `text` as 16 lowercase hex digits.
std::string hex_digest(std::string_view text);

nlohmann::json to_json(const SarimaSpec& spec);
SarimaSpec sarima_spec_from_json(const nlohmann::json& doc);

namespace pipeline {

StreamKey batch_key(std::uint64_t master_seed, std::uint64_t batch_index);

/// Draws the recipe for one attempt without generating data.
GenerationRecipe sample_recipe(std::uint64_t master_seed, std::uint64_t batch_index, std::uint32_t attempt,
                               const SimulatorConfig& config);

/// Runs S, I and N for a recipe. Throws DivergenceError when a pass runs away.
SeriesBatch realize(const GenerationRecipe& recipe);

/// Empty when the batch passes the rejection rules, else the reason.
std::optional<std::string> rejection_reason(const SeriesBatch& batch, double divergence_limit);

/// Samples and realizes attempts until one is accepted. Throws
/// GenerationError carrying the last recipe once retry_cap attempts fail.
GeneratedBatch generate_batch(std::uint64_t master_seed, std::uint64_t batch_index, const SimulatorConfig& config);

/// Same as realize; named for the audit use case.
SeriesBatch replay(const GenerationRecipe& recipe);

/// Uniform start in [0, T - span], pad_len uniform in [0, max_pad].
TrainingWindow extract_window(std::span<const double> row, Stream& s, const WindowGeometry& geometry);

/// Window for row b of a generated batch, using the batch's window lane.
TrainingWindow window_for_row(const GeneratedBatch& batch, std::size_t row, const WindowGeometry& geometry);

/// Lazy, ordered sequence of batches 0, 1, 2, ... With workers > 1 up to
/// `workers` batches are generated ahead on separate threads; content per
/// index never depends on scheduling.
class BatchStream {
  public:
    BatchStream(SimulatorConfig config, std::uint64_t master_seed, std::optional<std::uint64_t> count = {},
                unsigned workers = 1);
    ~BatchStream();

    BatchStream(const BatchStream&) = delete;
    BatchStream& operator=(const BatchStream&) = delete;

    /// Next batch in index order, or empty once `count` batches were produced.
    std::optional<GeneratedBatch> next();

    const SimulatorConfig& config() const noexcept { return config_; }
    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t delivered() const noexcept { return delivered_; }

  private:
    void launch();

    SimulatorConfig config_;
    std::uint64_t seed_;
    std::optional<std::uint64_t> count_;
    unsigned workers_;
    std::uint64_t launched_ = 0;
    std::uint64_t delivered_ = 0;
    std::deque<std::future<GeneratedBatch>> pending_;
};

}  // namespace pipeline

// In-process array interface wrapped by the language bindings.

/// Dense row-major float32 block.
struct FloatMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;
};

struct WindowArrays {
    FloatMatrix context;
    std::vector<std::int32_t> pad_len;
    FloatMatrix target;
};

class StreamHandle {
  public:
    /// Validates `config_mapping` with the same schema as the CLI and throws
    /// ParameterError with the same diagnostics.
    StreamHandle(const nlohmann::json& config_mapping, std::uint64_t master_seed,
                 std::optional<std::uint64_t> count = {}, unsigned workers = 1);

    /// Next (B, T) batch; empty once a bounded stream is exhausted.
    std::optional<FloatMatrix> next_batch();

    /// n windows taken one per row from successive rows of successive
    /// batches; empty when the stream runs out first.
    std::optional<WindowArrays> next_windows(std::size_t n);

    const SimulatorConfig& config() const noexcept { return stream_.config(); }

  private:
    pipeline::BatchStream stream_;
    std::optional<GeneratedBatch> current_;
    std::size_t row_cursor_ = 0;
};

FloatMatrix to_float32(const SeriesBatch& batch);

StreamHandle open_stream(const nlohmann::json& config_mapping, std::uint64_t master_seed,
                         std::optional<std::uint64_t> count = {});
std::optional<FloatMatrix> next_batch(StreamHandle& handle);
std::optional<WindowArrays> next_windows(StreamHandle& handle, std::size_t n);

}  // namespace sarsim
