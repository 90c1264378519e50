#pragma once

#include "jsrda/config.hpp"
#include "jsrda/eval.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace jsrda {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides the config's output
  std::optional<std::uint64_t> seed;         // overrides the config's seed
  int jobs = 1;
};

/// Loads an experiment config or an emitted run manifest.
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Writes manifest.json, per-view CSVs and the resolved synth_config.json
/// into `out_dir`; returns the manifest path.
std::filesystem::path cmd_synth(const std::filesystem::path& config,
                                const std::filesystem::path& out_dir,
                                std::optional<std::uint64_t> seed = std::nullopt);

struct RunOutput {
  ResultsTable table;
  std::filesystem::path results_csv;
  std::filesystem::path manifest;
};

/// Runs the protocol and writes results.csv plus run_manifest.json.
RunOutput cmd_run(const RunOptions& opts);

/// Parameters accepted by cmd_sweep.
const std::vector<std::string>& sweep_parameters();

struct SweepPoint {
  std::string value;
  double mean_accuracy = 0.0;
  double mean_baseline = 0.0;
};

/// One cmd_run per value, each in its own subdirectory of the output
/// directory, plus sweep.csv with (parameter, value, mean accuracy).
std::vector<SweepPoint> cmd_sweep(const RunOptions& opts, const std::string& parameter,
                                  const std::vector<std::string>& values);

/// Pretty-prints a results CSV.
void cmd_report(const std::filesystem::path& results_csv, std::ostream& out,
                const std::string& layout = "both");

/// Entry point shared by the executable and the tests.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jsrda
