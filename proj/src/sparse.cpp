#include "jsrda/sparse.hpp"

#include "jsrda/corpus.hpp"
#include "jsrda/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace jsrda {

namespace {

const char* kModule = "sparse";

// Relative objective decrease under which K-SVD stops early.
constexpr double kEarlyStop = 1e-6;

void check_dictionary(const Dictionary& dict) {
  if (dict.size() < 1 || dict.dim() < 1) throw Error(kModule, "empty dictionary");
  if (dict.atoms.isZero(0.0)) throw Error(kModule, "dictionary has only zero atoms");
}

Vector omp_impl(const Matrix& atoms, const Vector& norms, const Eigen::Ref<const Vector>& y,
                int sparsity, double tol) {
  const Index k = atoms.cols();
  Vector code = Vector::Zero(k);
  Vector residual = y;
  if (residual.norm() <= tol || y.isZero(0.0)) return code;

  std::vector<Index> support;
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  // Cholesky factor of the support Gram matrix, grown one row per step.
  Matrix chol(sparsity, sparsity);
  Vector coeffs;
  const Vector dty = atoms.transpose() * y;

  for (int step = 0; step < sparsity; ++step) {
    const Vector corr = atoms.transpose() * residual;
    Index best = -1;
    double best_score = 0.0;
    for (Index j = 0; j < k; ++j) {
      if (used[static_cast<std::size_t>(j)] || norms(j) == 0.0) continue;
      const double score = std::abs(corr(j)) / norms(j);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best < 0 || best_score <= 1e-14 * y.norm()) break;

    const auto s = static_cast<Index>(support.size());
    if (s > 0) {
      Vector g(s);
      for (Index i = 0; i < s; ++i) g(i) = atoms.col(support[i]).dot(atoms.col(best));
      const Vector w =
          chol.topLeftCorner(s, s).triangularView<Eigen::Lower>().solve(g);
      const double diag = norms(best) * norms(best) - w.squaredNorm();
      // Atom numerically inside the span of the current support.
      if (!(diag > 1e-12 * norms(best) * norms(best))) break;
      chol.row(s).head(s) = w.transpose();
      chol(s, s) = std::sqrt(diag);
    } else {
      chol(0, 0) = norms(best);
    }
    support.push_back(best);
    used[static_cast<std::size_t>(best)] = true;

    const Index n = s + 1;
    Vector rhs(n);
    for (Index i = 0; i < n; ++i) rhs(i) = dty(support[i]);
    const auto lower = chol.topLeftCorner(n, n).triangularView<Eigen::Lower>();
    coeffs = lower.transpose().solve(lower.solve(rhs));

    residual = y;
    for (Index i = 0; i < n; ++i) residual.noalias() -= coeffs(i) * atoms.col(support[i]);
    if (residual.norm() <= tol) break;
  }
  for (std::size_t i = 0; i < support.size(); ++i)
    code(support[i]) = coeffs(static_cast<Index>(i));
  return code;
}

Dictionary initial_dictionary(const Matrix& y, const DictConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const Index n = y.cols();
  const Index k = cfg.atoms;
  std::vector<Index> nonzero;
  for (Index i = 0; i < n; ++i)
    if (y.col(i).norm() > 0.0) nonzero.push_back(i);
  std::shuffle(nonzero.begin(), nonzero.end(), rng);

  Dictionary dict;
  dict.atoms.resize(y.rows(), k);
  const Index from_data = std::min<Index>(k, static_cast<Index>(nonzero.size()));
  for (Index j = 0; j < from_data; ++j) dict.atoms.col(j) = y.col(nonzero[j]).normalized();
  // More atoms than usable columns: the rest start as random unit vectors.
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j = from_data; j < k; ++j) {
    Vector a(y.rows());
    for (Index i = 0; i < a.size(); ++i) a(i) = normal(rng);
    dict.atoms.col(j) = a.normalized();
  }
  return dict;
}

struct KsvdState {
  Matrix atoms;
  SparseCodes codes;
  Matrix residual;  // y - atoms * codes
};

// One K-SVD iteration: OMP coding, then a rank-1 update of every atom.
void ksvd_sweep(const Matrix& y, KsvdState& st, const DictConfig& cfg, bool first) {
  const Index n = y.cols();
  const Index k = st.atoms.cols();

  // A column keeps its previous code when OMP does worse, so the
  // objective cannot rise.
  const SparseCodes fresh = omp_batch(Dictionary{st.atoms}, y, cfg.sparsity, cfg.omp_tol);
  for (Index i = 0; i < n; ++i) {
    const Vector r_new = y.col(i) - st.atoms * fresh.col(i);
    if (first || r_new.squaredNorm() <= st.residual.col(i).squaredNorm()) {
      st.codes.col(i) = fresh.col(i);
      st.residual.col(i) = r_new;
    }
  }

  std::vector<bool> replaced(static_cast<std::size_t>(n), false);
  for (Index a = 0; a < k; ++a) {
    std::vector<Index> users;
    for (Index i = 0; i < n; ++i)
      if (st.codes(a, i) != 0.0) users.push_back(i);

    if (users.empty()) {
      // Dead atom: restart it on the worst-represented column.
      Index worst = -1;
      double worst_err = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double e = st.residual.col(i).squaredNorm();
        if (!replaced[static_cast<std::size_t>(i)] && e > worst_err) {
          worst_err = e;
          worst = i;
        }
      }
      if (worst >= 0 && y.col(worst).norm() > 0.0) {
        st.atoms.col(a) = y.col(worst).normalized();
        replaced[static_cast<std::size_t>(worst)] = true;
      }
      continue;
    }

    const auto u = static_cast<Index>(users.size());
    Matrix err(y.rows(), u);
    Vector g(u);
    for (Index j = 0; j < u; ++j) {
      g(j) = st.codes(a, users[j]);
      err.col(j) = st.residual.col(users[j]) + st.atoms.col(a) * g(j);
    }
    // Dominant singular pair of the restricted error by alternating least
    // squares started from the current (atom, coefficients); every step
    // lowers ||err - d g^T||.
    Vector d = st.atoms.col(a);
    g = err.transpose() * d;
    for (int it = 0; it < 200; ++it) {
      const double gg = g.squaredNorm();
      if (gg == 0.0) break;
      Vector d_new = err * g / gg;
      const double scale = d_new.norm();
      if (scale == 0.0) break;
      d_new /= scale;
      const Vector g_new = err.transpose() * d_new;
      const double change = (d_new - d).norm();
      d = d_new;
      g = g_new;
      if (change < 1e-12) break;
    }
    if (g.squaredNorm() == 0.0) continue;
    st.atoms.col(a) = d;
    for (Index j = 0; j < u; ++j) {
      st.codes(a, users[j]) = g(j);
      st.residual.col(users[j]) = err.col(j) - d * g(j);
    }
  }
  // Recomputed rather than accumulated to avoid drift.
  st.residual = y - st.atoms * st.codes;
}

// Replaces the atom whose removal costs least with the normalized residual
// of the worst-represented column; codes on that atom are dropped. Returns
// false when there is nothing to gain.
bool replace_weakest_atom(KsvdState& st) {
  const Index k = st.atoms.cols();
  const Index n = st.codes.cols();
  if (k < 2) return false;
  Index worst = 0;
  st.residual.colwise().squaredNorm().maxCoeff(&worst);
  const double worst_err = st.residual.col(worst).squaredNorm();
  if (worst_err <= 0.0) return false;

  Index weakest = 0;
  double weakest_loss = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < k; ++a) {
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double g = st.codes(a, i);
      if (g != 0.0) loss += (st.residual.col(i) + st.atoms.col(a) * g).squaredNorm() -
                            st.residual.col(i).squaredNorm();
    }
    if (loss < weakest_loss) {
      weakest_loss = loss;
      weakest = a;
    }
  }

  for (Index i = 0; i < n; ++i) {
    const double g = st.codes(weakest, i);
    if (g != 0.0) {
      st.residual.col(i) += st.atoms.col(weakest) * g;
      st.codes(weakest, i) = 0.0;
    }
  }
  st.atoms.col(weakest) = st.residual.col(worst).normalized();
  return true;
}

}  // namespace

void DictConfig::validate() const {
  if (sparsity < 1) throw Error(kModule, "sparsity gamma must be >= 1");
  if (atoms < 1) throw Error(kModule, "dictionary size K must be >= 1");
  if (sparsity > atoms) {
    throw Error(kModule, "sparsity gamma (" + std::to_string(sparsity) +
                             ") exceeds dictionary size K (" + std::to_string(atoms) + ")");
  }
  if (ksvd_iters < 1) throw Error(kModule, "ksvd_iters must be >= 1");
  if (!(omp_tol >= 0.0)) throw Error(kModule, "omp_tol must be >= 0");
}

Index support_size(const Eigen::Ref<const Vector>& code) {
  return static_cast<Index>((code.array() != 0.0).count());
}

Vector omp(const Dictionary& dict, const Eigen::Ref<const Vector>& y, int sparsity, double tol) {
  check_dictionary(dict);
  if (y.size() != dict.dim()) {
    throw Error(kModule, "signal has dimension " + std::to_string(y.size()) +
                             ", dictionary atoms have " + std::to_string(dict.dim()));
  }
  if (sparsity < 1) throw Error(kModule, "sparsity gamma must be >= 1");
  const Vector norms = dict.atoms.colwise().norm().transpose();
  return omp_impl(dict.atoms, norms, y, std::min<int>(sparsity, dict.size()), tol);
}

SparseCodes omp_batch(const Dictionary& dict, const Matrix& y, int sparsity, double tol) {
  check_dictionary(dict);
  if (y.rows() != dict.dim()) {
    throw Error(kModule, "signals have dimension " + std::to_string(y.rows()) +
                             ", dictionary atoms have " + std::to_string(dict.dim()));
  }
  if (sparsity < 1) throw Error(kModule, "sparsity gamma must be >= 1");
  const Vector norms = dict.atoms.colwise().norm().transpose();
  const int s = std::min<int>(sparsity, dict.size());
  SparseCodes codes(dict.size(), y.cols());
  for (Index i = 0; i < y.cols(); ++i) codes.col(i) = omp_impl(dict.atoms, norms, y.col(i), s, tol);
  return codes;
}

KsvdResult ksvd(const Matrix& y, const DictConfig& cfg) {
  cfg.validate();
  if (y.size() == 0 || y.isZero(0.0)) throw Error(kModule, "training matrix is all zero");
  return ksvd(y, initial_dictionary(y, cfg), cfg);
}

KsvdResult ksvd(const Matrix& y, const Dictionary& init, const DictConfig& cfg) {
  cfg.validate();
  if (y.size() == 0 || y.isZero(0.0)) throw Error(kModule, "training matrix is all zero");
  if (init.dim() != y.rows() || init.size() != cfg.atoms)
    throw Error(kModule, "initial dictionary shape does not match data and K");
  if (!y.allFinite()) throw Error(kModule, "training matrix has non-finite entries");

  KsvdResult res;
  res.dict = init;
  for (Index j = 0; j < res.dict.size(); ++j) {
    const double nrm = res.dict.atoms.col(j).norm();
    if (nrm == 0.0) throw Error(kModule, "initial dictionary has a zero atom");
    res.dict.atoms.col(j) /= nrm;
  }
  res.codes = SparseCodes::Zero(res.dict.size(), y.cols());
  KsvdState state{res.dict.atoms, res.codes, y};
  double previous = y.squaredNorm();

  for (int iter = 0; iter < cfg.ksvd_iters; ++iter) {
    KsvdState plain = state;
    ksvd_sweep(y, plain, cfg, iter == 0);
    double current = plain.residual.squaredNorm();
    // Second proposal: swap the least useful atom for the direction the
    // dictionary misses most, then sweep. The lower objective wins, so
    // the sequence stays non-increasing.
    if (iter > 0) {
      KsvdState swapped = state;
      if (replace_weakest_atom(swapped)) {
        ksvd_sweep(y, swapped, cfg, false);
        const double alt = swapped.residual.squaredNorm();
        if (alt < current) {
          plain = std::move(swapped);
          current = alt;
        }
      }
    }
    state = std::move(plain);
    res.objective.push_back(current);
    res.iterations = iter + 1;
    if (previous <= 0.0 || (previous - current) <= kEarlyStop * previous) break;
    previous = current;
  }
  res.dict.atoms = std::move(state.atoms);
  res.codes = std::move(state.codes);
  return res;
}

TransferResult learn_transfer_dictionaries(const std::vector<Matrix>& view_features,
                                           const DictConfig& cfg) {
  if (view_features.size() < 2) throw Error(kModule, "need at least one source and one target");
  const Index rows = view_features.front().rows();
  const Index n = view_features.front().cols();
  for (const auto& v : view_features) {
    if (v.cols() != n) {
      throw Error(kModule, "views have different sample counts (" + std::to_string(n) + " vs " +
                               std::to_string(v.cols()) + ")");
    }
    if (v.rows() != rows) throw Error(kModule, "views have different feature dimensions");
  }
  const auto views = static_cast<Index>(view_features.size());
  Matrix stacked(rows * views, n);
  for (Index v = 0; v < views; ++v)
    stacked.middleRows(v * rows, rows) = view_features[static_cast<std::size_t>(v)];

  KsvdResult fit = ksvd(stacked, cfg);
  TransferResult out;
  out.dict.stacked = fit.dict;
  for (Index v = 0; v < views; ++v)
    out.dict.view_blocks.push_back(Dictionary{fit.dict.atoms.middleRows(v * rows, rows)});
  out.codes = std::move(fit.codes);
  out.objective = std::move(fit.objective);
  return out;
}

SparseCodes encode_view(const Dictionary& block, const Matrix& y_view, const DictConfig& cfg) {
  cfg.validate();
  return omp_batch(block, y_view, cfg.sparsity, cfg.omp_tol);
}

void save_dictionary_csv(const std::filesystem::path& path, const Dictionary& dict) {
  write_matrix_csv(path, dict.atoms.transpose());
}

Dictionary load_dictionary_csv(const std::filesystem::path& path) {
  return Dictionary{read_matrix_csv(path).transpose()};
}

}  // namespace jsrda
