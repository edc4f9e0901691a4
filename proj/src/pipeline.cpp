#include "sarsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sarsim/errors.hpp"

namespace sarsim {

std::string hex_digest(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json to_json(const SarimaSpec& spec) {
    return {
        {"p", spec.p},
        {"q", spec.q},
        {"P", spec.P},
        {"Q", spec.Q},
        {"s", spec.s},
        {"d_frac", spec.d_frac},
        {"D", spec.D},
        {"ar", spec.ar.coefficients},
        {"ma", spec.ma.coefficients},
        {"sar", spec.sar.coefficients},
        {"sma", spec.sma.coefficients},
        {"innovation_sigma", spec.innovation_sigma},
    };
}

SarimaSpec sarima_spec_from_json(const nlohmann::json& doc) {
    try {
        SarimaSpec spec;
        spec.p = doc.at("p").get<int>();
        spec.q = doc.at("q").get<int>();
        spec.P = doc.at("P").get<int>();
        spec.Q = doc.at("Q").get<int>();
        spec.s = doc.at("s").get<int>();
        spec.d_frac = doc.at("d_frac").get<double>();
        spec.D = doc.at("D").get<int>();
        spec.ar = {doc.at("ar").get<std::vector<double>>(), LagConvention::ar};
        spec.ma = {doc.at("ma").get<std::vector<double>>(), LagConvention::ma};
        spec.sar = {doc.at("sar").get<std::vector<double>>(), LagConvention::ar};
        spec.sma = {doc.at("sma").get<std::vector<double>>(), LagConvention::ma};
        spec.innovation_sigma = doc.at("innovation_sigma").get<double>();
        spec.check();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("sarima spec: ") + e.what());
    }
}

nlohmann::json GenerationRecipe::to_json() const {
    nlohmann::json doc{
        {"master_seed", master_seed},
        {"batch_index", batch_index},
        {"attempt", attempt},
        {"rows", rows},
        {"length", length},
        {"structure", structure == Structure::sarima ? "sarima" : "sarima2"},
        {"base", sarsim::to_json(structured.base)},
        {"noiser",
         {{"family", to_string(noiser.family)},
          {"lambda0", noiser.lambda0},
          {"kappa", noiser.kappa},
          {"zeta", noiser.zeta}}},
        {"fir_taps", fir_taps},
        {"divergence_limit", divergence_limit},
    };
    if (structure == Structure::sarima2) {
        doc["envelope"] = sarsim::to_json(structured.envelope);
        doc["mixing"] = to_string(structured.mixing);
        doc["omega"] = structured.omega;
        doc["upsample_factor"] = structured.upsample_factor;
        doc["upsampling"] = structured.upsampling == EnvelopeUpsampling::hold ? "hold" : "linear";
    }
    return doc;
}

GenerationRecipe GenerationRecipe::from_json(const nlohmann::json& doc) {
    try {
        GenerationRecipe r;
        r.master_seed = doc.at("master_seed").get<std::uint64_t>();
        r.batch_index = doc.at("batch_index").get<std::uint64_t>();
        r.attempt = doc.at("attempt").get<std::uint32_t>();
        r.rows = doc.at("rows").get<std::size_t>();
        r.length = doc.at("length").get<std::size_t>();
        const auto structure = doc.at("structure").get<std::string>();
        if (structure == "sarima") {
            r.structure = Structure::sarima;
        } else if (structure == "sarima2") {
            r.structure = Structure::sarima2;
        } else {
            throw ParameterError("recipe: unknown structure " + structure);
        }
        r.structured.base = sarima_spec_from_json(doc.at("base"));
        if (r.structure == Structure::sarima2) {
            r.structured.envelope = sarima_spec_from_json(doc.at("envelope"));
            r.structured.mixing = mixing_from_string(doc.at("mixing").get<std::string>());
            r.structured.omega = doc.at("omega").get<double>();
            r.structured.upsample_factor = doc.at("upsample_factor").get<int>();
            const auto up = doc.at("upsampling").get<std::string>();
            if (up != "hold" && up != "linear") throw ParameterError("recipe: unknown upsampling " + up);
            r.structured.upsampling = up == "hold" ? EnvelopeUpsampling::hold : EnvelopeUpsampling::linear;
            r.structured.check();
        }
        const auto& n = doc.at("noiser");
        r.noiser.family = noiser_family_from_string(n.at("family").get<std::string>());
        r.noiser.lambda0 = n.at("lambda0").get<double>();
        r.noiser.kappa = n.at("kappa").get<double>();
        r.noiser.zeta = n.at("zeta").get<double>();
        r.noiser.check();
        r.fir_taps = doc.at("fir_taps").get<int>();
        r.divergence_limit = doc.at("divergence_limit").get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("recipe: ") + e.what());
    }
}

std::string GenerationRecipe::digest() const { return hex_digest(to_json().dump()); }

namespace pipeline {

namespace {

StreamKey attempt_key(std::uint64_t master_seed, std::uint64_t batch_index, std::uint32_t attempt) {
    return batch_key(master_seed, batch_index).child(attempt);
}

// Unrolls length + w samples and keeps the last `length`.
SeriesBatch unroll_trimmed(const SarimaSpec& spec, const StreamKey& key, std::size_t rows, std::size_t length,
                           UnrollOptions options) {
    const auto w = static_cast<std::size_t>(sarima::warmup_length(spec));
    options.discard = w;
    return sarima::unroll(spec, key, rows, length + w, options);
}

}  // namespace

StreamKey batch_key(std::uint64_t master_seed, std::uint64_t batch_index) { return {master_seed, {batch_index}}; }

GenerationRecipe sample_recipe(std::uint64_t master_seed, std::uint64_t batch_index, std::uint32_t attempt,
                               const SimulatorConfig& config) {
    Stream s(attempt_key(master_seed, batch_index, attempt).child(LaneTag::spec));
    GenerationRecipe r;
    r.master_seed = master_seed;
    r.batch_index = batch_index;
    r.attempt = attempt;
    r.rows = static_cast<std::size_t>(config.batch_size);
    r.length = static_cast<std::size_t>(config.sequence_length);
    if (rng::bernoulli(s, config.sarima2.probability)) {
        r.structure = Structure::sarima2;
        r.structured = sarima2::sample_spec(s, config);
    } else {
        r.structure = Structure::sarima;
        r.structured.base = sarima::sample_spec(s, config);
    }
    r.noiser = noise::sample_spec(s, config.noisers);
    r.fir_taps = config.integration.fir_taps;
    r.divergence_limit = config.divergence_limit;
    return r;
}

SeriesBatch realize(const GenerationRecipe& r) {
    if (r.rows == 0 || r.length == 0) throw ParameterError("realize: empty recipe shape");
    const StreamKey key = attempt_key(r.master_seed, r.batch_index, r.attempt);
    const UnrollOptions options{r.fir_taps, r.divergence_limit, 0};

    SeriesBatch batch = unroll_trimmed(r.structured.base, key.child(LaneTag::rows), r.rows, r.length, options);
    if (r.structure == Structure::sarima2) {
        const auto env_len = sarima2::envelope_length(r.structured.upsample_factor, r.length);
        const SeriesBatch env =
            unroll_trimmed(r.structured.envelope, key.child(LaneTag::envelope_rows), r.rows, env_len, options);
        batch = sarima2::compose(std::move(batch), env, r.structured);
    }
    if (r.noiser.family != NoiserFamily::passthrough) {
        const StreamKey noise_key = key.child(LaneTag::noise);
        for (std::size_t b = 0; b < r.rows; ++b) {
            Stream s(noise_key.child(b));
            noise::apply_in_place(batch.row(b), r.noiser, s);
        }
    }
    batch.stream_key = key;
    return batch;
}

std::optional<std::string> rejection_reason(const SeriesBatch& batch, double divergence_limit) {
    for (std::size_t b = 0; b < batch.rows; ++b) {
        const auto row = batch.row(b);
        for (const double v : row) {
            if (!std::isfinite(v)) return "row " + std::to_string(b) + " has a non-finite value";
            if (std::fabs(v) > divergence_limit) return "row " + std::to_string(b) + " exceeds the divergence limit";
        }
        if (std::all_of(row.begin(), row.end(), [&](double v) { return v == row[0]; })) {
            return "row " + std::to_string(b) + " is constant";
        }
    }
    return std::nullopt;
}

GeneratedBatch generate_batch(std::uint64_t master_seed, std::uint64_t batch_index, const SimulatorConfig& config) {
    config.check();
    GenerationRecipe last;
    std::string reason;
    for (int attempt = 0; attempt < config.retry_cap; ++attempt) {
        last = sample_recipe(master_seed, batch_index, static_cast<std::uint32_t>(attempt), config);
        try {
            SeriesBatch batch = realize(last);
            auto rejected = rejection_reason(batch, config.divergence_limit);
            if (!rejected) return {std::move(batch), last};
            reason = *rejected;
        } catch (const DivergenceError& e) {
            reason = e.what();
        }
    }
    throw GenerationError("generate_batch: retry cap of " + std::to_string(config.retry_cap) +
                              " exhausted for batch " + std::to_string(batch_index) + " (" + reason + ")",
                          last.to_json().dump());
}

SeriesBatch replay(const GenerationRecipe& recipe) { return realize(recipe); }

TrainingWindow extract_window(std::span<const double> row, Stream& s, const WindowGeometry& geometry) {
    if (geometry.context < 1 || geometry.horizon < 1) throw ParameterError("extract_window: empty geometry");
    if (geometry.max_pad < 0 || geometry.max_pad >= geometry.context) {
        throw ParameterError("extract_window: max_pad must lie in [0, context)");
    }
    const auto span = static_cast<std::size_t>(geometry.span());
    if (row.size() < span) throw ParameterError("extract_window: series shorter than context + horizon");
    const auto context = static_cast<std::size_t>(geometry.context);

    TrainingWindow w;
    w.start = static_cast<std::size_t>(rng::uniform_int(s, 0, static_cast<std::int64_t>(row.size() - span)));
    w.pad_len = static_cast<int>(rng::uniform_int(s, 0, geometry.max_pad));
    const auto pad = static_cast<std::size_t>(w.pad_len);
    const auto slice = row.subspan(w.start, span);
    w.context.assign(slice.begin(), slice.begin() + static_cast<std::ptrdiff_t>(context));
    std::fill(w.context.begin(), w.context.begin() + static_cast<std::ptrdiff_t>(pad), 0.0);
    w.pad_mask.assign(context, 0);
    std::fill(w.pad_mask.begin(), w.pad_mask.begin() + static_cast<std::ptrdiff_t>(pad), 1);
    w.target.assign(slice.begin() + static_cast<std::ptrdiff_t>(context), slice.end());
    return w;
}

TrainingWindow window_for_row(const GeneratedBatch& batch, std::size_t row, const WindowGeometry& geometry) {
    if (row >= batch.series.rows) throw ParameterError("window_for_row: row out of range");
    Stream s(batch_key(batch.recipe.master_seed, batch.recipe.batch_index).child(LaneTag::window).child(row));
    return extract_window(batch.series.row(row), s, geometry);
}

BatchStream::BatchStream(SimulatorConfig config, std::uint64_t master_seed, std::optional<std::uint64_t> count,
                         unsigned workers)
    : config_(std::move(config)), seed_(master_seed), count_(count), workers_(std::max(1u, workers)) {
    config_.check();
}

BatchStream::~BatchStream() {
    for (auto& f : pending_) {
        if (f.valid()) f.wait();
    }
}

void BatchStream::launch() {
    while (pending_.size() < workers_ && (!count_ || launched_ < *count_)) {
        const std::uint64_t index = launched_++;
        pending_.push_back(std::async(std::launch::async,
                                      [this, index] { return generate_batch(seed_, index, config_); }));
    }
}

std::optional<GeneratedBatch> BatchStream::next() {
    if (count_ && delivered_ >= *count_) return std::nullopt;
    if (workers_ == 1) {
        GeneratedBatch out = generate_batch(seed_, delivered_, config_);
        ++delivered_;
        launched_ = delivered_;
        return out;
    }
    launch();
    auto future = std::move(pending_.front());
    pending_.pop_front();
    GeneratedBatch out = future.get();
    ++delivered_;
    launch();
    return out;
}

}  // namespace pipeline

FloatMatrix to_float32(const SeriesBatch& batch) {
    FloatMatrix m{batch.rows, batch.length, std::vector<float>(batch.data.size())};
    std::transform(batch.data.begin(), batch.data.end(), m.data.begin(),
                   [](double v) { return static_cast<float>(v); });
    return m;
}

StreamHandle::StreamHandle(const nlohmann::json& config_mapping, std::uint64_t master_seed,
                           std::optional<std::uint64_t> count, unsigned workers)
    : stream_(config_from_json(config_mapping), master_seed, count, workers) {}

std::optional<FloatMatrix> StreamHandle::next_batch() {
    current_.reset();
    row_cursor_ = 0;
    auto batch = stream_.next();
    if (!batch) return std::nullopt;
    return to_float32(batch->series);
}

std::optional<WindowArrays> StreamHandle::next_windows(std::size_t n) {
    const auto& geometry = stream_.config().window;
    const auto context = static_cast<std::size_t>(geometry.context);
    const auto horizon = static_cast<std::size_t>(geometry.horizon);
    WindowArrays out{{n, context, std::vector<float>(n * context)}, std::vector<std::int32_t>(n),
                     {n, horizon, std::vector<float>(n * horizon)}};
    for (std::size_t i = 0; i < n; ++i) {
        if (!current_ || row_cursor_ >= current_->series.rows) {
            current_ = stream_.next();
            row_cursor_ = 0;
            if (!current_) return std::nullopt;
        }
        const TrainingWindow w = pipeline::window_for_row(*current_, row_cursor_++, geometry);
        std::transform(w.context.begin(), w.context.end(), out.context.data.begin() + static_cast<std::ptrdiff_t>(i * context),
                       [](double v) { return static_cast<float>(v); });
        std::transform(w.target.begin(), w.target.end(), out.target.data.begin() + static_cast<std::ptrdiff_t>(i * horizon),
                       [](double v) { return static_cast<float>(v); });
        out.pad_len[i] = w.pad_len;
    }
    return out;
}

StreamHandle open_stream(const nlohmann::json& config_mapping, std::uint64_t master_seed,
                         std::optional<std::uint64_t> count) {
    return StreamHandle(config_mapping, master_seed, count);
}

std::optional<FloatMatrix> next_batch(StreamHandle& handle) { return handle.next_batch(); }

std::optional<WindowArrays> next_windows(StreamHandle& handle, std::size_t n) { return handle.next_windows(n); }

}  // namespace sarsim
