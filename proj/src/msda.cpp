#include "jsrda/msda.hpp"

#include "jsrda/error.hpp"

#include <cmath>

namespace jsrda {

namespace {

const char* kModule = "msda";

// Reciprocal condition estimate below which Q + eps I is treated as singular.
constexpr double kMinRcond = 1e-14;

CorruptionMoments moments_from_xs(const Matrix& x, const Matrix& xs, const MsdaConfig& cfg) {
  cfg.validate();
  const double keep = 1.0 - cfg.noise_prob;
  CorruptionMoments m;
  // Entry-wise independent zeroing: off-diagonal products survive with
  // probability keep^2, squared entries with probability keep.
  m.P = keep * (xs * x.transpose());
  const Matrix gram = x * x.transpose();
  m.Q = keep * keep * gram;
  m.Q.diagonal() += keep * (1.0 - keep) * gram.diagonal();
  return m;
}

}  // namespace

void MsdaConfig::validate() const {
  if (!(noise_prob >= 0.0 && noise_prob < 1.0))
    throw Error(kModule, "noise probability N_p must lie in [0,1)");
  if (layers < 1) throw Error(kModule, "layers L must be >= 1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error(kModule, "ridge must be >= 0");
}

CorruptionMoments corruption_expectations(const Matrix& x, const SampleAffinityMatrix& s,
                                          const MsdaConfig& cfg) {
  if (x.cols() != s.size()) {
    throw Error(kModule, "X has " + std::to_string(x.cols()) +
                             " columns but the affinity matrix has size " +
                             std::to_string(s.size()));
  }
  return moments_from_xs(x, s.right_multiply(x), cfg);
}

CorruptionMoments corruption_expectations(const Matrix& x, const Matrix& s,
                                          const MsdaConfig& cfg) {
  if (s.rows() != s.cols() || x.cols() != s.rows()) {
    throw Error(kModule, "X has " + std::to_string(x.cols()) +
                             " columns but the affinity matrix is " + std::to_string(s.rows()) +
                             "x" + std::to_string(s.cols()));
  }
  return moments_from_xs(x, x * s, cfg);
}

SharedMapping solve_mapping(const Matrix& p, const Matrix& q, const MsdaConfig& cfg) {
  cfg.validate();
  if (q.rows() != q.cols() || p.rows() != q.rows() || p.cols() != q.cols())
    throw Error(kModule, "P and Q must both be d x d");
  const Index d = q.rows();
  Matrix reg = q;
  reg.diagonal().array() += cfg.ridge * q.trace() / static_cast<double>(d);
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success || !(llt.rcond() > kMinRcond)) {
    throw Error(kModule,
                "Q + eps I is numerically singular (rcond " + std::to_string(llt.rcond()) +
                    "); increase the ridge");
  }
  // W (Q + eps I) = P with Q symmetric.
  SharedMapping m;
  m.W = llt.solve(p.transpose()).transpose();
  if (!m.W.allFinite()) throw Error(kModule, "mapping has non-finite entries");
  return m;
}

Matrix shared_private(const Matrix& x_view, const SharedMapping& mapping) {
  if (x_view.cols() < 1) throw Error(kModule, "no samples to transform");
  if (mapping.W.cols() != x_view.rows()) {
    throw Error(kModule, "mapping expects dimension " + std::to_string(mapping.W.cols()) +
                             ", got " + std::to_string(x_view.rows()));
  }
  Matrix out(2 * x_view.rows(), x_view.cols());
  out.topRows(x_view.rows()) = (mapping.W * x_view).array().tanh().matrix();
  out.bottomRows(x_view.rows()) = x_view;
  return out;
}

SharedFeatureModel SharedFeatureModel::fit(const std::vector<Matrix>& view_columns,
                                           const AffinityConfig& affinity,
                                           const MsdaConfig& cfg) {
  cfg.validate();
  // One affinity matrix from the raw inputs serves every layer.
  const SampleAffinityMatrix sam = build_sam(view_columns, affinity);
  Matrix x = stack_sample_major(view_columns);
  SharedFeatureModel model;
  for (int layer = 0; layer < cfg.layers; ++layer) {
    const auto moments = corruption_expectations(x, sam, cfg);
    model.layers_.push_back(solve_mapping(moments.P, moments.Q, cfg));
    x = (model.layers_.back().W * x).array().tanh().matrix();
  }
  return model;
}

Matrix SharedFeatureModel::shared(const Matrix& x_view) const {
  Matrix h = x_view;
  for (const auto& layer : layers_) {
    if (layer.W.cols() != h.rows()) throw Error(kModule, "dimension mismatch");
    h = (layer.W * h).array().tanh().matrix();
  }
  return h;
}

Matrix SharedFeatureModel::transform(const Matrix& x_view) const {
  if (x_view.cols() < 1) throw Error(kModule, "no samples to transform");
  if (layers_.size() == 1) return shared_private(x_view, layers_.front());
  Matrix out(2 * x_view.rows(), x_view.cols());
  out.topRows(x_view.rows()) = shared(x_view);
  out.bottomRows(x_view.rows()) = x_view;
  return out;
}

}  // namespace jsrda
