#include "jsrda/sam.hpp"

#include "jsrda/error.hpp"

#include <cmath>

namespace jsrda {

namespace {
const char* kModule = "sam";
}

void AffinityConfig::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw Error(kModule, "bandwidth c must be > 0");
}

double pair_affinity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                     double c) {
  if (a.size() != b.size()) {
    throw Error(kModule, "dimension mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
  }
  if (!(c > 0.0)) throw Error(kModule, "bandwidth c must be > 0");
  return std::exp(-(a - b).squaredNorm() / (2.0 * c));
}

SampleAffinityMatrix::SampleAffinityMatrix(int views, std::vector<Matrix> blocks)
    : views_(views), blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.rows() != views_ || b.cols() != views_)
      throw Error(kModule, "affinity block must be V x V");
  }
}

Matrix SampleAffinityMatrix::dense() const {
  Matrix s = Matrix::Zero(size(), size());
  for (Index i = 0; i < samples(); ++i) s.block(i * views_, i * views_, views_, views_) = block(i);
  return s;
}

Matrix SampleAffinityMatrix::right_multiply(const Matrix& x) const {
  if (x.cols() != size()) {
    throw Error(kModule, "X has " + std::to_string(x.cols()) + " columns, S has size " +
                             std::to_string(size()));
  }
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < samples(); ++i) {
    out.middleCols(i * views_, views_).noalias() = x.middleCols(i * views_, views_) * block(i);
  }
  return out;
}

Matrix stack_sample_major(const std::vector<Matrix>& view_columns) {
  if (view_columns.empty()) throw Error(kModule, "no views");
  const Index d = view_columns.front().rows();
  const Index n = view_columns.front().cols();
  const auto v_count = static_cast<Index>(view_columns.size());
  for (const auto& x : view_columns) {
    if (x.rows() != d || x.cols() != n) throw Error(kModule, "views differ in shape");
  }
  Matrix out(d, n * v_count);
  for (Index i = 0; i < n; ++i)
    for (Index v = 0; v < v_count; ++v)
      out.col(i * v_count + v) = view_columns[static_cast<std::size_t>(v)].col(i);
  return out;
}

SampleAffinityMatrix build_sam(const std::vector<Matrix>& view_columns,
                               const AffinityConfig& cfg) {
  cfg.validate();
  if (view_columns.size() < 2) throw Error(kModule, "need at least 2 views");
  const Index d = view_columns.front().rows();
  const Index n = view_columns.front().cols();
  for (const auto& x : view_columns) {
    if (x.rows() != d || x.cols() != n) throw Error(kModule, "views differ in shape");
  }
  const int v_count = static_cast<int>(view_columns.size());
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Matrix b = Matrix::Zero(v_count, v_count);
    for (int u = 0; u < v_count; ++u) {
      for (int v = u + 1; v < v_count; ++v) {
        const double s = pair_affinity(view_columns[u].col(i), view_columns[v].col(i),
                                       cfg.bandwidth);
        b(u, v) = s;
        b(v, u) = s;
      }
    }
    blocks.push_back(std::move(b));
  }
  return SampleAffinityMatrix(v_count, std::move(blocks));
}

SampleAffinityMatrix build_sam(const MultiViewCorpus& corpus, const AffinityConfig& cfg) {
  corpus.validate();
  std::vector<Matrix> cols;
  for (const auto& view : corpus.views) cols.push_back(view.columns());
  return build_sam(cols, cfg);
}

}  // namespace jsrda
