#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "sarsim/baselines.hpp"
#include "sarsim/config.hpp"
#include "sarsim/errors.hpp"
#include "sarsim/io.hpp"
#include "sarsim/pipeline.hpp"
#include "sarsim/spectral.hpp"
#include "sarsim/version.hpp"

namespace sarsim::cli {

namespace {

using nlohmann::json;

// Output written under a temporary name and renamed into place on commit;
// anything not committed is deleted.
class StagedFile {
  public:
    explicit StagedFile(std::string path) : path_(std::move(path)), tmp_(path_ + ".partial") {
        stream_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!stream_) throw IoError("cannot open " + tmp_ + " for writing");
    }

    StagedFile(const StagedFile&) = delete;
    StagedFile& operator=(const StagedFile&) = delete;

    ~StagedFile() {
        if (committed_) return;
        stream_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }

    std::ostream& stream() { return stream_; }

    void close() {
        stream_.close();
        if (stream_.fail()) throw IoError("failed to write " + tmp_);
    }

    void commit() {
        std::filesystem::rename(tmp_, path_);
        committed_ = true;
    }

  private:
    std::string path_;
    std::string tmp_;
    std::ofstream stream_;
    bool committed_ = false;
};

SimulatorConfig resolve_config(const std::string& path) {
    if (path.empty()) {
        SimulatorConfig config;
        config.check();
        return config;
    }
    return load_config(path);
}

json metadata(const SimulatorConfig& config, const GenerateOptions& options, const char* kind,
              const json& batches) {
    const json cfg = to_json(config);
    return {
        {"engine", kEngineName},
        {"version", kEngineVersion},
        {"kind", kind},
        {"seed", options.seed},
        {"count", options.count},
        {"format", options.format},
        {"rows_per_batch", config.batch_size},
        {"length", config.sequence_length},
        {"config_hash", hex_digest(cfg.dump())},
        {"config", cfg},
        {"batches", batches},
    };
}

json batch_entry(const GeneratedBatch& batch) {
    return {{"index", batch.recipe.batch_index},
            {"attempt", batch.recipe.attempt},
            {"digest", batch.recipe.digest()},
            {"recipe", batch.recipe.to_json()}};
}

// Runs `body` against the chosen sink, then writes the sidecar. Both files
// appear only if everything succeeded.
template <typename Body>
int with_outputs(const GenerateOptions& options, const SimulatorConfig& config, const char* kind, std::ostream& out,
                 Body&& body) {
    json batches = json::array();
    const bool to_stdout = options.out_path == "-";
    if (to_stdout) {
        body(out, batches);
        out.flush();
        if (!out) throw IoError("write to standard output failed");
        if (!options.meta_path.empty()) {
            StagedFile meta(options.meta_path);
            meta.stream() << metadata(config, options, kind, batches).dump(2) << '\n';
            meta.close();
            meta.commit();
        }
        return kExitOk;
    }
    StagedFile data(options.out_path);
    StagedFile meta(options.meta_path.empty() ? options.out_path + ".meta.json" : options.meta_path);
    body(data.stream(), batches);
    meta.stream() << metadata(config, options, kind, batches).dump(2) << '\n';
    data.close();
    meta.close();
    data.commit();
    meta.commit();
    return kExitOk;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const GenerationError& e) {
        err << "error: " << e.what() << '\n';
        if (!e.detail().empty()) err << "last recipe: " << e.detail() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

void check_common(const GenerateOptions& options) {
    if (options.count < 1) throw ParameterError("--count must be >= 1");
    if (options.workers < 1) throw ParameterError("--workers must be >= 1");
}

}  // namespace

std::optional<std::uint64_t> seed_from_env() {
    const char* raw = std::getenv("SARSIM_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    const std::string text(raw);
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        check_common(options);
        const auto format = output_format_from_string(options.format);
        const auto config = resolve_config(options.config_path);
        const auto rows = static_cast<std::size_t>(config.batch_size);
        const auto length = static_cast<std::size_t>(config.sequence_length);

        return with_outputs(options, config, "series", out, [&](std::ostream& sink, json& batches) {
            SeriesWriter writer(sink, format, rows * options.count, length);
            pipeline::BatchStream stream(config, options.seed, options.count, options.workers);
            while (auto batch = stream.next()) {
                writer.write(to_float32(batch->series), batch->recipe.batch_index);
                batches.push_back(batch_entry(*batch));
            }
            writer.finish();
        });
    });
}

int cmd_windows(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        check_common(options);
        const auto format = output_format_from_string(options.format);
        if (format == OutputFormat::csv) throw ParameterError("windows support --format jsonl or raw");
        const auto config = resolve_config(options.config_path);
        const auto rows = static_cast<std::size_t>(config.batch_size);
        const auto& geometry = config.window;

        return with_outputs(options, config, "windows", out, [&](std::ostream& sink, json& batches) {
            WindowWriter writer(sink, format, rows * options.count, static_cast<std::size_t>(geometry.context),
                                static_cast<std::size_t>(geometry.horizon));
            pipeline::BatchStream stream(config, options.seed, options.count, options.workers);
            while (auto batch = stream.next()) {
                for (std::size_t b = 0; b < batch->series.rows; ++b) {
                    writer.write(pipeline::window_for_row(*batch, b, geometry), batch->recipe.batch_index, b);
                }
                batches.push_back(batch_entry(*batch));
            }
            writer.finish();
        });
    });
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (options.generators.empty()) throw ParameterError("bench needs at least one generator");
        for (const auto& g : options.generators) {
            if (g != "sarsim" && g != "forecastpfn" && g != "kernelsynth") {
                throw ParameterError("unknown generator '" + g + "' (expected sarsim, forecastpfn or kernelsynth)");
            }
        }
        if (options.lengths.empty()) throw ParameterError("bench needs at least one length");
        if (options.counts.size() != 1 && options.counts.size() != options.lengths.size()) {
            throw ParameterError("--counts takes one value or one per length");
        }

        std::vector<BenchRow> all;
        for (std::size_t i = 0; i < options.lengths.size(); ++i) {
            const auto count = options.counts.size() == 1 ? options.counts[0] : options.counts[i];
            const auto rows = baselines::bench_compare(options.generators, options.lengths[i], count, options.seed);
            all.insert(all.end(), rows.begin(), rows.end());
        }

        out << std::left << std::setw(12) << "generator" << std::right << std::setw(8) << "length" << std::setw(8)
            << "count" << std::setw(12) << "seconds" << std::setw(16) << "us/series" << std::setw(14) << "series/s"
            << std::setw(12) << "x sarsim" << '\n';
        for (const auto& r : all) {
            out << std::left << std::setw(12) << r.generator << std::right << std::setw(8) << r.series_len
                << std::setw(8) << r.count << std::setw(12) << std::fixed << std::setprecision(4) << r.seconds
                << std::setw(16) << std::setprecision(2) << r.per_series_seconds * 1e6 << std::setw(14)
                << std::setprecision(0) << r.series_per_second << std::setw(12) << std::setprecision(1)
                << r.ratio_vs_sarsim << '\n';
        }
        out.unsetf(std::ios::floatfield);
        out << std::setprecision(6);

        std::ostringstream csv;
        csv << std::setprecision(9);
        csv << "generator,length,count,seconds,per_series_seconds,series_per_second,ratio_vs_sarsim\n";
        for (const auto& r : all) {
            csv << r.generator << ',' << r.series_len << ',' << r.count << ',' << r.seconds << ','
                << r.per_series_seconds << ',' << r.series_per_second << ',' << r.ratio_vs_sarsim << '\n';
        }
        out << '\n' << csv.str();
        if (!options.csv_path.empty()) {
            StagedFile file(options.csv_path);
            file.stream() << csv.str();
            file.close();
            file.commit();
        }
        return kExitOk;
    });
}

int cmd_stats(const StatsOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto file = read_series_file(options.in_path);
        if (file.rows == 0 || file.length == 0) throw IoError("file holds no samples");

        double sum = 0.0;
        double lo = file.data.front();
        double hi = file.data.front();
        std::size_t zeros = 0;
        for (float v : file.data) {
            sum += v;
            lo = std::min(lo, static_cast<double>(v));
            hi = std::max(hi, static_cast<double>(v));
            zeros += v == 0.0f;
        }
        const double n = static_cast<double>(file.data.size());
        const double mean = sum / n;
        double sq = 0.0;
        for (float v : file.data) sq += (v - mean) * (v - mean);

        const std::size_t picks = std::min(options.sample_rows, file.rows);
        json sampled = json::array();
        std::map<std::size_t, std::size_t> top_counts;
        for (std::size_t k = 0; k < picks && file.length >= 2; ++k) {
            const std::size_t row = k * file.rows / picks;
            const std::vector<double> series(file.data.begin() + static_cast<std::ptrdiff_t>(row * file.length),
                                             file.data.begin() + static_cast<std::ptrdiff_t>((row + 1) * file.length));
            const auto pgram = spectral::periodogram(series);
            const auto peaks = spectral::top_peaks(pgram, 3);
            json entry{{"row", row}, {"peaks", json::array()}};
            for (auto bin : peaks) {
                entry["peaks"].push_back({{"bin", bin},
                                          {"period", static_cast<double>(file.length) / static_cast<double>(bin)},
                                          {"power", pgram[bin]}});
            }
            if (!peaks.empty()) ++top_counts[peaks.front()];
            sampled.push_back(entry);
        }
        json modal = nullptr;
        std::size_t best = 0;
        for (const auto& [bin, c] : top_counts) {
            if (c > best) {
                best = c;
                modal = bin;
            }
        }

        const json report{
            {"path", options.in_path},
            {"format", to_string(file.format)},
            {"rows", file.rows},
            {"length", file.length},
            {"mean", mean},
            {"variance", sq / n},
            {"min", lo},
            {"max", hi},
            {"zero_fraction", static_cast<double>(zeros) / n},
            {"sampled_rows", sampled},
            {"modal_top_peak_bin", modal},
        };
        out << report.dump(2) << '\n';
        return kExitOk;
    });
}

}  // namespace sarsim::cli
