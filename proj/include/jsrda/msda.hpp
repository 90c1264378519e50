#pragma once

#include "jsrda/sam.hpp"
#include "jsrda/types.hpp"

#include <vector>

namespace jsrda {

struct MsdaConfig {
  double noise_prob = 0.6;  // N_p, per-entry zeroing probability
  int layers = 1;           // L
  double ridge = 1e-8;      // relative; eps = ridge * trace(Q) / d

  void validate() const;
};

/// Expected cross/auto second moments under marginalized corruption:
/// P = E[X S X~^T], Q = E[X~ X~^T].
struct CorruptionMoments {
  Matrix P;
  Matrix Q;
};

CorruptionMoments corruption_expectations(const Matrix& x, const SampleAffinityMatrix& s,
                                          const MsdaConfig& cfg);
/// Same, for an arbitrary dense VN x VN weighting.
CorruptionMoments corruption_expectations(const Matrix& x, const Matrix& s,
                                          const MsdaConfig& cfg);

struct SharedMapping {
  Matrix W;
};

/// W = P (Q + eps I)^{-1}, computed by a Cholesky solve.
SharedMapping solve_mapping(const Matrix& p, const Matrix& q, const MsdaConfig& cfg);

/// [tanh(W X); X], 2d x n.
Matrix shared_private(const Matrix& x_view, const SharedMapping& mapping);

/// Stack of L mappings fit on one training pool and reused on any data.
class SharedFeatureModel {
 public:
  /// `view_columns[v]` is the d x N training matrix of view v; columns
  /// correspond across views.
  static SharedFeatureModel fit(const std::vector<Matrix>& view_columns,
                                const AffinityConfig& affinity, const MsdaConfig& cfg);

  const std::vector<SharedMapping>& layers() const { return layers_; }

  /// Shared part only: tanh applied layer by layer, d x n.
  Matrix shared(const Matrix& x_view) const;
  /// [shared(X); X], 2d x n.
  Matrix transform(const Matrix& x_view) const;

 private:
  std::vector<SharedMapping> layers_;
};

}  // namespace jsrda
