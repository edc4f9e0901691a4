#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "sarsim/version.hpp"

namespace {

using namespace sarsim::cli;

void add_generation_flags(CLI::App& cmd, GenerateOptions& o, bool& seed_given, const char* formats) {
    cmd.add_option("--config", o.config_path, "JSON config; built-in defaults when omitted")->check(CLI::ExistingFile);
    cmd.add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { o.seed = v, seed_given = true; }, "master seed (falls back to SARSIM_SEED)");
    cmd.add_option("--count", o.count, "number of batches")->check(CLI::PositiveNumber);
    cmd.add_option("--format", o.format, formats);
    cmd.add_option("--out", o.out_path, "output path, - for stdout");
    cmd.add_option("--meta", o.meta_path, "sidecar path (default <out>.meta.json)");
    cmd.add_option("--workers", o.workers, "generation threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic SARIMA time-series generator"};
    app.set_version_flag("--version", sarsim::kEngineVersion);
    app.require_subcommand(1);

    GenerateOptions gen;
    bool gen_seed = false;
    auto* generate = app.add_subcommand("generate", "write generated batches");
    add_generation_flags(*generate, gen, gen_seed, "csv, jsonl or raw");

    GenerateOptions win;
    win.format = "jsonl";
    bool win_seed = false;
    auto* windows = app.add_subcommand("windows", "write training windows, one per generated row");
    add_generation_flags(*windows, win, win_seed, "jsonl or raw");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "time generators per series");
    bench_cmd->add_option("--lengths", bench.lengths, "series lengths")->delimiter(',');
    bench_cmd->add_option("--counts", bench.counts, "series per length (one value or one per length)")->delimiter(',');
    bench_cmd->add_option("--generators", bench.generators, "subset of sarsim, forecastpfn, kernelsynth")
        ->delimiter(',');
    bench_cmd->add_option("--seed", bench.seed, "seed for the generated series");
    bench_cmd->add_option("--out", bench.csv_path, "also write the csv rows here");

    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "summarize a generated series file");
    stats_cmd->add_option("in", stats.in_path, "series file (raw, csv or jsonl)")->required();
    stats_cmd->add_option("--rows", stats.sample_rows, "rows sampled for periodogram peaks");

    CLI11_PARSE(app, argc, argv);

    auto resolve_seed = [](GenerateOptions& o, bool given) {
        if (given) return;
        if (auto env = seed_from_env()) o.seed = *env;
    };

    std::ios::sync_with_stdio(false);
    if (*generate) {
        resolve_seed(gen, gen_seed);
        return cmd_generate(gen, std::cout, std::cerr);
    }
    if (*windows) {
        resolve_seed(win, win_seed);
        return cmd_windows(win, std::cout, std::cerr);
    }
    if (*bench_cmd) return cmd_bench(bench, std::cout, std::cerr);
    return cmd_stats(stats, std::cout, std::cerr);
}
