#pragma once

#include "jsrda/adapt.hpp"
#include "jsrda/corpus.hpp"
#include "jsrda/msda.hpp"
#include "jsrda/sam.hpp"
#include "jsrda/sparse.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace jsrda {

/// One recognition task: train in `sources`, recognize in `target`.
struct TaskSpec {
  std::vector<std::string> sources;
  std::string target;

  /// Sources joined with '+', as used in result files.
  std::string source_label() const;
};

/// Which tasks a run covers when none are listed explicitly.
enum class TaskMode {
  CrossView,  // every ordered pair of distinct views
  MultiView,  // each view as target, all others as sources
  Explicit,
};

struct ExperimentConfig {
  // Exactly one corpus source.
  std::optional<std::filesystem::path> manifest;
  std::optional<SynthConfig> synth;

  TaskMode mode = TaskMode::CrossView;
  std::vector<TaskSpec> tasks;  // used when mode == Explicit
  std::vector<int> held_classes;  // empty: every class

  AffinityConfig affinity;
  MsdaConfig msda;
  DictConfig dict;
  AdaptConfig adapt;

  // Root seed: drives the synthetic corpus and dictionary initialization.
  std::uint64_t seed = 0;
  std::filesystem::path output = "results";

  void validate() const;
  /// Pushes the root seed into the nested configs that consume randomness.
  void apply_seed(std::uint64_t root);
};

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_from_json(const nlohmann::json& doc);

/// Every field is written, so the result fully determines a run.
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing fields keep their defaults. Relative manifest paths resolve
/// against `base_dir`.
ExperimentConfig experiment_from_json(const nlohmann::json& doc,
                                      const std::filesystem::path& base_dir);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace jsrda
