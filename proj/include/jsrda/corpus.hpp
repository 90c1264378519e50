#pragma once

#include "jsrda/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace jsrda {

/// Per-view samples. `features` stores one sample per row (N x d); the
/// numerical stages work on the transpose, one sample per column.
struct ViewDataset {
  std::string id;
  Matrix features;
  Labels labels;

  /// d x N view of the features.
  Matrix columns() const { return features.transpose(); }
};

/// Corresponding samples observed from V >= 2 views. Row i of every view
/// is the same physical instance, so labels agree across views.
struct MultiViewCorpus {
  std::vector<ViewDataset> views;
  int class_count = 0;

  Index sample_count() const;
  Index feature_dim() const;
  const Labels& labels() const;
  /// Position of the view with the given id; throws if absent.
  std::size_t view_index(const std::string& id) const;

  /// Checks every corpus invariant and throws jsrda::Error on violation.
  void validate() const;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  int views = 2;
  int classes = 5;
  int samples_per_class = 30;
  int latent_dim = 8;
  double view_noise = 0.05;
  int observation_dim = 40;
  // Spread of class centres relative to the within-class spread.
  double class_separation = 3.0;
  // Every view uses the first view's map (no view shift).
  bool shared_transform = false;

  void validate() const;
};

// CSV matrices: one row per line, comma separated, no header.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
/// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);

Labels read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const Labels& labels);

/// Reads a JSON manifest: {"class_count": C, "views": [{"id", "features_csv",
/// "labels_csv"}, ...]}. Relative paths resolve against the manifest's folder.
MultiViewCorpus load_corpus(const std::filesystem::path& manifest);

/// Writes manifest.json plus one features/labels CSV pair per view into
/// `dir`; returns the manifest path.
std::filesystem::path save_corpus(const MultiViewCorpus& corpus,
                                  const std::filesystem::path& dir);

/// Shared latent Gaussian clusters observed through one seeded linear map
/// per view plus isotropic noise.
MultiViewCorpus synth_corpus(const SynthConfig& cfg);

/// Leave-one-class-out split. Indices are sample positions shared by all views.
struct ClassSplit {
  int held_class = 0;
  // Samples of every class except the held one; fits all representation stages.
  std::vector<Index> feature_learning;
  // Every sample; trains the final classifier.
  std::vector<Index> full;
  // Samples of the held class; evaluated in the target view.
  std::vector<Index> test;
};

ClassSplit hold_out_class(const MultiViewCorpus& corpus, int held_class);

/// Columns of `m` at `idx`, in order.
Matrix select_columns(const Matrix& m, const std::vector<Index>& idx);
Labels select_labels(const Labels& labels, const std::vector<Index>& idx);

}  // namespace jsrda
