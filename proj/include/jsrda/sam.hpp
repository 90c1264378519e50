#pragma once

#include "jsrda/corpus.hpp"
#include "jsrda/types.hpp"

#include <vector>

namespace jsrda {

struct AffinityConfig {
  double bandwidth = 2.0;  // c

  void validate() const;
};

/// exp(-||a - b||^2 / (2c)).
double pair_affinity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                     double c);

/// Block-diagonal VN x VN matrix diag(S_1, ..., S_N). Only the N blocks of
/// size V x V are stored; rows/columns follow the sample-major ordering
/// [x_1^1 .. x_1^V, x_2^1 .. x_2^V, ...].
class SampleAffinityMatrix {
 public:
  SampleAffinityMatrix(int views, std::vector<Matrix> blocks);

  int views() const { return views_; }
  Index samples() const { return static_cast<Index>(blocks_.size()); }
  Index size() const { return samples() * views_; }
  const Matrix& block(Index i) const { return blocks_[static_cast<std::size_t>(i)]; }

  Matrix dense() const;
  /// X S for a d x VN matrix X, using the block structure.
  Matrix right_multiply(const Matrix& x) const;

 private:
  int views_;
  std::vector<Matrix> blocks_;
};

/// Interleaves per-view d x N matrices into the d x VN sample-major layout.
Matrix stack_sample_major(const std::vector<Matrix>& view_columns);

/// `view_columns[v]` is the d x N matrix of view v.
SampleAffinityMatrix build_sam(const std::vector<Matrix>& view_columns,
                               const AffinityConfig& cfg);
SampleAffinityMatrix build_sam(const MultiViewCorpus& corpus, const AffinityConfig& cfg);

}  // namespace jsrda
