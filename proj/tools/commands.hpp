#pragma once

// Subcommand implementations behind the sarsim executable. Each returns the
// process exit status and writes diagnostics to `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sarsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< generation or I/O failure
inline constexpr int kExitUsage = 2;    ///< bad arguments or config

struct GenerateOptions {
    std::string config_path;  ///< empty: built-in defaults
    std::uint64_t seed = 0;
    std::uint64_t count = 1;
    std::string format = "raw";
    std::string out_path = "-";  ///< "-" writes to `out`
    std::string meta_path;       ///< empty: <out_path>.meta.json, none for stdout
    unsigned workers = 1;
};

struct BenchOptions {
    std::vector<std::size_t> lengths{1024};
    std::vector<std::size_t> counts{256};  ///< one entry, or one per length
    std::vector<std::string> generators{"sarsim", "kernelsynth"};
    std::uint64_t seed = 0;
    std::string csv_path;  ///< optional copy of the machine-readable rows
};

struct StatsOptions {
    std::string in_path;
    std::size_t sample_rows = 8;
};

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);
/// Emits one training window per generated row; `format` is jsonl or raw.
int cmd_windows(const GenerateOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);
int cmd_stats(const StatsOptions& options, std::ostream& out, std::ostream& err);

/// SARSIM_SEED when set and parseable, otherwise empty.
std::optional<std::uint64_t> seed_from_env();

}  // namespace sarsim::cli
