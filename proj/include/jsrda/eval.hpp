#pragma once

#include "jsrda/adapt.hpp"
#include "jsrda/config.hpp"
#include "jsrda/corpus.hpp"
#include "jsrda/nn.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace jsrda {

/// Outcome of one leave-one-class-out run for one task.
struct HeldOutResult {
  int held_class = 0;
  double accuracy = 0.0;
  // Plain 1-NN on raw features, source views -> target view.
  double baseline = 0.0;
  Index test_count = 0;
  int adapt_solves = 0;
  bool adapt_converged = false;
  std::vector<Labels> pseudo_history;
};

/// Full pipeline for one held-out class: shared features, transferable
/// dictionaries and distribution adaptation are fit without the held class;
/// the 1-NN classifier is trained on every projected source sample and
/// evaluated on the held class in the target view.
HeldOutResult run_held_out(const MultiViewCorpus& corpus, const std::vector<std::size_t>& sources,
                           std::size_t target, int held_class, const ExperimentConfig& cfg);

/// run_held_out for every requested class (all classes when `held_classes`
/// is empty), in ascending class order.
std::vector<HeldOutResult> run_cross_view(const MultiViewCorpus& corpus,
                                          const std::vector<std::size_t>& sources,
                                          std::size_t target, const ExperimentConfig& cfg,
                                          const std::vector<int>& held_classes = {});

/// 1-NN trained on the target view's own raw features (all samples) and
/// evaluated on the held class.
double within_view_accuracy(const MultiViewCorpus& corpus, std::size_t view, int held_class);

struct ResultRow {
  std::string source;
  std::string target;
  int held_class = 0;
  double accuracy = 0.0;
  double baseline = 0.0;
};

struct PairSummary {
  std::string source;
  std::string target;
  double accuracy = 0.0;
  double baseline = 0.0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  std::vector<PairSummary> pairs;  // per-task means, in task order
  double mean_accuracy = 0.0;
  double mean_baseline = 0.0;

  /// Recomputes pairs and overall means from `rows`.
  void aggregate();

  /// Columns source,target,held_class,accuracy,baseline_accuracy; per-task
  /// means use held_class "mean", the overall mean uses source/target "ALL".
  void write_csv(const std::filesystem::path& path) const;
  static ResultsTable read_csv(const std::filesystem::path& path);
};

/// Tasks implied by the config's mode, validated against the corpus.
std::vector<TaskSpec> resolve_tasks(const MultiViewCorpus& corpus, const ExperimentConfig& cfg);

/// Every (task, held class) run, optionally on `jobs` worker threads. Rows
/// are ordered by (task, class) regardless of scheduling.
ResultsTable run_protocol(const MultiViewCorpus& corpus, const ExperimentConfig& cfg,
                          int jobs = 1);

/// Aligned per-row listing.
std::string format_rows(const ResultsTable& table);
/// Source x target matrix of mean accuracies (percent) with row/column
/// averages; tasks with several sources are listed separately.
std::string format_pairwise(const ResultsTable& table);

}  // namespace jsrda
