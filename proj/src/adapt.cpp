#include "jsrda/adapt.hpp"

#include "jsrda/error.hpp"
#include "jsrda/nn.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

namespace jsrda {

namespace {

const char* kModule = "adapt";

std::vector<int> present_classes(const Labels& labels) {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

Index count_of(const Labels& labels, int c) {
  return static_cast<Index>(std::count(labels.begin(), labels.end(), c));
}

/// Class-indicator column: 1 where labels == c.
Vector indicator(const Labels& labels, int c) {
  Vector e = Vector::Zero(static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == c) e(static_cast<Index>(i)) = 1.0;
  return e;
}

Matrix class_mean(const Matrix& x, const Labels& labels, int c) {
  Vector sum = Vector::Zero(x.rows());
  Index n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == c) {
      sum += x.col(static_cast<Index>(i));
      ++n;
    }
  }
  if (n == 0) throw Error(kModule, "class " + std::to_string(c) + " has no samples");
  return sum / static_cast<double>(n);
}

void check_labels(const Labels& labels, int class_count, const std::string& what) {
  for (int y : labels) {
    if (y < 1 || y > class_count) {
      throw Error(kModule, what + " label " + std::to_string(y) + " outside [1.." +
                               std::to_string(class_count) + "]");
    }
  }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

std::string to_string(KernelKind kind) { return kind == KernelKind::Rbf ? "rbf" : "linear"; }

std::string to_string(EigOrder order) {
  return order == EigOrder::MaxRatio ? "max-ratio" : "paper-smallest";
}

KernelKind parse_kernel_kind(const std::string& text) {
  if (text == "rbf") return KernelKind::Rbf;
  if (text == "linear") return KernelKind::Linear;
  throw Error(kModule, "unknown kernel '" + text + "' (expected linear or rbf)");
}

EigOrder parse_eig_order(const std::string& text) {
  if (text == "max-ratio") return EigOrder::MaxRatio;
  if (text == "paper-smallest") return EigOrder::PaperSmallest;
  throw Error(kModule, "unknown eig_order '" + text + "' (expected max-ratio or paper-smallest)");
}

void AdaptConfig::validate() const {
  if (!(lambda >= 0.0) || !(mu >= 0.0)) throw Error(kModule, "lambda and mu must be >= 0");
  if (!(beta >= 0.0)) throw Error(kModule, "beta must be >= 0");
  if (subspace_dim < 1) throw Error(kModule, "subspace dimension k must be >= 1");
  if (iterations < 1) throw Error(kModule, "iterations T must be >= 1");
  if (rbf_bandwidth && !(*rbf_bandwidth > 0.0))
    throw Error(kModule, "explicit rbf bandwidth must be > 0");
}

Matrix center_matrix(Index n) {
  if (n < 1) throw Error(kModule, "centering matrix needs n >= 1");
  Matrix h = Matrix::Identity(n, n);
  h.array() -= 1.0 / static_cast<double>(n);
  return h;
}

Matrix MmdMatrices::composed() const {
  Matrix out(Ms.rows() + M.rows(), Ms.cols() + M.cols());
  out << Ms, Mst, Mts, M;
  return out;
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Index rows = 0;
  Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index r = 0;
  Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Matrix block_diagonal(const Matrix& block, int copies) {
  return block_diagonal(std::vector<Matrix>(static_cast<std::size_t>(copies), block));
}

MmdMatrices build_mmd(const std::vector<Matrix>& source_blocks, const Matrix& target,
                      const std::vector<Labels>& source_labels, const Labels& pseudo,
                      int class_count) {
  if (source_blocks.empty()) throw Error(kModule, "no source domains");
  if (source_labels.size() != source_blocks.size())
    throw Error(kModule, "one label vector per source is required");
  if (target.cols() == 0) throw Error(kModule, "empty target domain");
  if (static_cast<Index>(pseudo.size()) != target.cols())
    throw Error(kModule, "pseudo labels do not match target samples");
  check_labels(pseudo, class_count, "pseudo");

  const Index nt = target.cols();
  const Vector ones_t = Vector::Ones(nt);
  std::vector<Matrix> ms, mst, mts, mt;
  for (std::size_t i = 0; i < source_blocks.size(); ++i) {
    const Matrix& xs = source_blocks[i];
    const Labels& ys = source_labels[i];
    if (xs.cols() == 0) throw Error(kModule, "empty source domain");
    if (xs.rows() != target.rows()) throw Error(kModule, "source/target dimension mismatch");
    if (static_cast<Index>(ys.size()) != xs.cols())
      throw Error(kModule, "source labels do not match source samples");
    check_labels(ys, class_count, "source");

    const Index ns = xs.cols();
    const Vector ones_s = Vector::Ones(ns);
    // Marginal terms.
    Matrix l_s = ones_s * ones_s.transpose() / double(ns * ns);
    Matrix l_st = -ones_s * ones_t.transpose() / double(ns * nt);
    Matrix l_ts = -ones_t * ones_s.transpose() / double(nt * ns);
    Matrix l_t = ones_t * ones_t.transpose() / double(nt * nt);
    // Conditional terms, only for classes seen in both domains.
    for (int c = 1; c <= class_count; ++c) {
      const Index nsc = count_of(ys, c);
      const Index ntc = count_of(pseudo, c);
      if (nsc == 0 || ntc == 0) continue;
      const Vector es = indicator(ys, c);
      const Vector et = indicator(pseudo, c);
      l_s += es * es.transpose() / double(nsc * nsc);
      l_st -= es * et.transpose() / double(nsc * ntc);
      l_ts -= et * es.transpose() / double(ntc * nsc);
      l_t += et * et.transpose() / double(ntc * ntc);
    }
    ms.push_back(xs * l_s * xs.transpose());
    mst.push_back(xs * l_st * target.transpose());
    mts.push_back(target * l_ts * xs.transpose());
    mt.push_back(target * l_t * target.transpose());
  }
  return MmdMatrices{block_diagonal(ms), block_diagonal(mst), block_diagonal(mts),
                     block_diagonal(mt)};
}

Matrix between_class_scatter(const Matrix& x, const Labels& labels,
                             const std::vector<int>& classes) {
  if (static_cast<Index>(labels.size()) != x.cols())
    throw Error(kModule, "labels do not match samples");
  if (x.cols() == 0) throw Error(kModule, "empty source domain");
  const Vector mean = x.rowwise().mean();
  Matrix sb = Matrix::Zero(x.rows(), x.rows());
  for (int c : classes) {
    const Vector diff = class_mean(x, labels, c) - mean;
    sb.noalias() += double(count_of(labels, c)) * diff * diff.transpose();
  }
  return sb;
}

Matrix within_class_scatter(const Matrix& x, const Labels& labels,
                            const std::vector<int>& classes) {
  if (static_cast<Index>(labels.size()) != x.cols())
    throw Error(kModule, "labels do not match samples");
  Matrix sw = Matrix::Zero(x.rows(), x.rows());
  for (int c : classes) {
    const Vector mean = class_mean(x, labels, c);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != c) continue;
      const Vector diff = x.col(static_cast<Index>(i)) - mean;
      sw.noalias() += diff * diff.transpose();
    }
  }
  return sw;
}

Matrix target_variance(const Matrix& target) {
  if (target.cols() == 0) throw Error(kModule, "empty target domain");
  const Matrix centered = target.colwise() - target.rowwise().mean();
  return centered * centered.transpose();
}

ScatterMatrices build_scatter(const std::vector<Matrix>& source_blocks,
                              const std::vector<Labels>& source_labels, const Matrix& target) {
  if (source_blocks.empty()) throw Error(kModule, "no source domains");
  if (source_labels.size() != source_blocks.size())
    throw Error(kModule, "one label vector per source is required");
  std::vector<Matrix> sb, sw;
  for (std::size_t i = 0; i < source_blocks.size(); ++i) {
    const auto classes = present_classes(source_labels[i]);
    sb.push_back(between_class_scatter(source_blocks[i], source_labels[i], classes));
    sw.push_back(within_class_scatter(source_blocks[i], source_labels[i], classes));
  }
  const Matrix st = target_variance(target);
  return ScatterMatrices{block_diagonal(sb), block_diagonal(sw),
                         block_diagonal(st, static_cast<int>(source_blocks.size()))};
}

Matrix KernelContext::rows(const Matrix& x) const {
  if (x.rows() != anchors.rows()) {
    throw Error(kModule, "kernel input has dimension " + std::to_string(x.rows()) +
                             ", anchors have " + std::to_string(anchors.rows()));
  }
  if (function == KernelFunction::Dot) return anchors.transpose() * x;
  Matrix out(anchors.cols(), x.cols());
  const double denom = 2.0 * sigma * sigma;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index a = 0; a < anchors.cols(); ++a)
      out(a, j) = std::exp(-(anchors.col(a) - x.col(j)).squaredNorm() / denom);
  return out;
}

double median_pairwise_distance(const Matrix& x) {
  std::vector<double> dists;
  for (Index a = 0; a < x.cols(); ++a)
    for (Index b = a + 1; b < x.cols(); ++b) dists.push_back((x.col(a) - x.col(b)).norm());
  if (dists.empty()) return 0.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  if (dists.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dists.begin(), mid);
  return 0.5 * (lower + upper);
}

KernelContext rbf_gram(const Matrix& x, std::optional<double> sigma) {
  if (x.cols() < 1) throw Error(kModule, "kernel needs at least one sample");
  KernelContext ctx;
  ctx.function = KernelFunction::Rbf;
  ctx.anchors = x;
  if (sigma) {
    if (!(*sigma > 0.0)) throw Error(kModule, "rbf bandwidth must be > 0");
    ctx.sigma = *sigma;
  } else {
    ctx.sigma = median_pairwise_distance(x);
    if (!(ctx.sigma > 0.0)) {
      throw Error(kModule,
                  "median heuristic gave bandwidth 0 (identical samples); set an explicit "
                  "rbf_bandwidth");
    }
  }
  const Index n = x.cols();
  const double denom = 2.0 * ctx.sigma * ctx.sigma;
  ctx.gram.resize(n, n);
  for (Index a = 0; a < n; ++a) {
    ctx.gram(a, a) = 1.0;
    for (Index b = a + 1; b < n; ++b) {
      const double v = std::exp(-(x.col(a) - x.col(b)).squaredNorm() / denom);
      ctx.gram(a, b) = v;
      ctx.gram(b, a) = v;
    }
  }
  return ctx;
}

KernelContext dot_gram(const Matrix& x) {
  if (x.cols() < 1) throw Error(kModule, "kernel needs at least one sample");
  KernelContext ctx;
  ctx.function = KernelFunction::Dot;
  ctx.anchors = x;
  ctx.gram = x.transpose() * x;
  return ctx;
}

GevpProblem assemble_problem(const MmdMatrices& mmd, const ScatterMatrices& scatter,
                             const KernelContext* kernel, const AdaptConfig& cfg) {
  cfg.validate();
  const Index n = mmd.Ms.rows();
  auto square = [n](const Matrix& m) { return m.rows() == n && m.cols() == n; };
  if (!square(mmd.Ms) || !square(mmd.Mst) || !square(mmd.Mts) || !square(mmd.M) ||
      !square(scatter.Sb) || !square(scatter.Sw) || !square(scatter.S)) {
    throw Error(kModule, "MMD and scatter blocks are not dimensionally consistent");
  }
  Matrix reg;
  if (kernel) {
    const Index d = kernel->gram.rows();
    if (d == 0 || n % d != 0) throw Error(kModule, "Gram size does not divide the block size");
    reg = block_diagonal(kernel->gram, static_cast<int>(n / d));
  } else {
    reg = Matrix::Identity(n, n);
  }

  GevpProblem p;
  p.A = Matrix::Zero(2 * n, 2 * n);
  p.A.topLeftCorner(n, n) = cfg.beta * scatter.Sb;
  p.A.bottomRightCorner(n, n) = cfg.mu * scatter.S;
  if (p.A.isZero(0.0)) {
    throw Error(kModule, "degenerate problem: numerator matrix is zero (beta and mu vanish "
                         "or carry no scatter)");
  }
  p.B.resize(2 * n, 2 * n);
  p.B.topLeftCorner(n, n) = mmd.Ms + cfg.lambda * reg + cfg.beta * scatter.Sw;
  p.B.topRightCorner(n, n) = mmd.Mst - cfg.lambda * reg;
  p.B.bottomLeftCorner(n, n) = mmd.Mts - cfg.lambda * reg;
  p.B.bottomRightCorner(n, n) = mmd.M + (cfg.lambda + cfg.mu) * reg;
  p.A = symmetrize(p.A);
  p.B = symmetrize(p.B);
  return p;
}

GevpProblem tie_target_copies(const GevpProblem& problem, int sources) {
  if (sources < 1) throw Error(kModule, "need at least one source");
  if (sources == 1) return problem;
  const Index full = problem.A.rows();
  if (full % (2 * sources) != 0) throw Error(kModule, "problem size not divisible by 2p");
  const Index d = full / (2 * sources);
  const Index ns = sources * d;
  Matrix t = Matrix::Zero(full, ns + d);
  t.topLeftCorner(ns, ns).setIdentity();
  for (int i = 0; i < sources; ++i) t.block(ns + i * d, ns, d, d).setIdentity();
  return GevpProblem{symmetrize(t.transpose() * problem.A * t),
                     symmetrize(t.transpose() * problem.B * t)};
}

GevpSolution solve_gevp(const Matrix& a, const Matrix& b, int k, EigOrder order) {
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n)
    throw Error(kModule, "A and B must be square and of equal size");
  if (n < 1) throw Error(kModule, "empty eigenproblem");
  if (k < 1) throw Error(kModule, "k must be >= 1");
  if (a.isZero(0.0)) throw Error(kModule, "degenerate problem: A is zero");

  GevpSolution sol;
  Index keep = k;
  const Index limit = std::max<Index>(1, n - 1);
  if (keep > limit) {
    keep = limit;
    sol.clamped = true;
  }

  Matrix bb = b;
  Eigen::LLT<Matrix> llt(bb);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
    bb.diagonal().array() += 1e-10 * std::abs(b.trace()) / static_cast<double>(n);
    llt.compute(bb);
    sol.ridge_added = true;
    if (llt.info() != Eigen::Success)
      throw Error(kModule, "B is numerically indefinite; check lambda/mu and the kernel");
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, bb,
                                                      Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw Error(kModule, "generalized eigensolver failed");
  // Eigenvalues come back ascending.
  sol.vectors.resize(n, keep);
  sol.values.resize(keep);
  for (Index j = 0; j < keep; ++j) {
    const Index src = order == EigOrder::MaxRatio ? n - 1 - j : j;
    sol.vectors.col(j) = es.eigenvectors().col(src);
    sol.values(j) = es.eigenvalues()(src);
  }
  return sol;
}

Matrix ProjectionPair::project_source(std::size_t i, const Matrix& x) const {
  if (i >= source.size()) throw Error(kModule, "source index out of range");
  if (kernel) return source[i].transpose() * kernel->rows(x);
  if (x.rows() != source[i].rows()) throw Error(kModule, "projection dimension mismatch");
  return source[i].transpose() * x;
}

Matrix ProjectionPair::project_target(const Matrix& x) const {
  if (kernel) return target.transpose() * kernel->rows(x);
  if (x.rows() != target.rows()) throw Error(kModule, "projection dimension mismatch");
  return target.transpose() * x;
}

AdaptResult adapt_loop(const std::vector<Matrix>& source_codes,
                       const std::vector<Labels>& source_labels, const Matrix& target_codes,
                       int class_count, const AdaptConfig& cfg) {
  cfg.validate();
  if (source_codes.empty()) throw Error(kModule, "no source domains");
  if (source_labels.size() != source_codes.size())
    throw Error(kModule, "one label vector per source is required");
  for (std::size_t i = 0; i < source_codes.size(); ++i) {
    if (source_codes[i].rows() != target_codes.rows())
      throw Error(kModule, "source and target codes differ in dimension");
    if (static_cast<Index>(source_labels[i].size()) != source_codes[i].cols())
      throw Error(kModule, "source labels do not match source samples");
    check_labels(source_labels[i], class_count, "source");
  }
  const int p = static_cast<int>(source_codes.size());

  Index source_total = 0;
  for (const auto& x : source_codes) source_total += x.cols();
  Matrix all_sources(target_codes.rows(), source_total);
  Labels all_labels;
  {
    Index offset = 0;
    for (std::size_t i = 0; i < source_codes.size(); ++i) {
      all_sources.middleCols(offset, source_codes[i].cols()) = source_codes[i];
      offset += source_codes[i].cols();
      all_labels.insert(all_labels.end(), source_labels[i].begin(), source_labels[i].end());
    }
  }

  // Data blocks entering the quadratic forms: raw codes, or the Gram
  // columns of each domain in kernel mode.
  std::vector<Matrix> blocks;
  Matrix target_block;
  std::optional<KernelContext> kernel;
  if (cfg.kernel == KernelKind::Rbf) {
    Matrix anchors(target_codes.rows(), source_total + target_codes.cols());
    anchors << all_sources, target_codes;
    kernel = rbf_gram(anchors, cfg.rbf_bandwidth);
    Index offset = 0;
    for (const auto& x : source_codes) {
      blocks.push_back(kernel->gram.middleCols(offset, x.cols()));
      offset += x.cols();
    }
    target_block = kernel->gram.rightCols(target_codes.cols());
  } else {
    blocks = source_codes;
    target_block = target_codes;
  }
  const Index dim = target_block.rows();

  AdaptResult res;
  res.pseudo = nn_classify(all_sources, all_labels, target_codes);
  res.pseudo_history.push_back(res.pseudo);
  const ScatterMatrices scatter = build_scatter(blocks, source_labels, target_block);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const MmdMatrices mmd = build_mmd(blocks, target_block, source_labels, res.pseudo, class_count);
    const GevpProblem full = assemble_problem(mmd, scatter, kernel ? &*kernel : nullptr, cfg);
    const GevpProblem tied = tie_target_copies(full, p);
    const GevpSolution sol = solve_gevp(tied.A, tied.B, cfg.subspace_dim, cfg.eig_order);
    ++res.gevp_solves;
    res.clamped = sol.clamped;
    res.eigenvalues = sol.values;

    ProjectionPair proj;
    for (int i = 0; i < p; ++i) proj.source.push_back(sol.vectors.middleRows(i * dim, dim));
    proj.target = sol.vectors.bottomRows(dim);
    proj.kernel = kernel;

    res.source_projected.clear();
    for (int i = 0; i < p; ++i) res.source_projected.push_back(proj.source[i].transpose() * blocks[i]);
    res.target_projected = proj.target.transpose() * target_block;
    res.projections = std::move(proj);

    Matrix z_sources(res.target_projected.rows(), source_total);
    Index offset = 0;
    for (const auto& z : res.source_projected) {
      z_sources.middleCols(offset, z.cols()) = z;
      offset += z.cols();
    }
    Labels next = nn_classify(z_sources, all_labels, res.target_projected);
    res.pseudo_history.push_back(next);
    const bool unchanged = next == res.pseudo;
    res.pseudo = std::move(next);
    if (unchanged) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace jsrda
