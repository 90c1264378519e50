#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite. Nothing here calls into the library's numerics.

#include "jsrda/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using jsrda::Index;
using jsrda::Labels;
using jsrda::Matrix;
using jsrda::Vector;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix g = gaussian(n, n, rng);
  return 0.5 * (g + g.transpose());
}

inline Matrix random_spd(Index n, std::mt19937_64& rng) {
  const Matrix g = gaussian(n, n, rng);
  return g * g.transpose() + double(n) * Matrix::Identity(n, n);
}

inline Labels random_labels(Index n, int classes, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(1, classes);
  Labels out(static_cast<std::size_t>(n));
  for (auto& l : out) l = u(rng);
  return out;
}

/// Monte-Carlo averages of X S X~^T and X~ X~^T with each entry of X~
/// zeroed independently with probability `drop`.
struct MonteCarloMoments {
  Matrix P;
  Matrix Q;
};

inline MonteCarloMoments monte_carlo_moments(const Matrix& x, const Matrix& s, double drop,
                                             int draws, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(1.0 - drop);
  const Matrix xs = x * s;
  MonteCarloMoments acc{Matrix::Zero(x.rows(), x.rows()), Matrix::Zero(x.rows(), x.rows())};
  Matrix xt(x.rows(), x.cols());
  for (int t = 0; t < draws; ++t) {
    for (Index j = 0; j < x.cols(); ++j)
      for (Index i = 0; i < x.rows(); ++i) xt(i, j) = keep(rng) ? x(i, j) : 0.0;
    acc.P.noalias() += xs * xt.transpose();
    acc.Q.noalias() += xt * xt.transpose();
  }
  acc.P /= double(draws);
  acc.Q /= double(draws);
  return acc;
}

/// Smallest least-squares residual norm of y over every atom support of
/// size 1..max_support (and the empty support).
inline double exhaustive_best_residual(const Matrix& dict, const Vector& y, int max_support) {
  const Index k = dict.cols();
  double best = y.norm();
  std::vector<int> pick;
  // Enumerate subsets by bitmask; K is tiny in every caller.
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    pick.clear();
    for (Index j = 0; j < k; ++j)
      if (mask & (1u << j)) pick.push_back(static_cast<int>(j));
    if (static_cast<int>(pick.size()) > max_support) continue;
    Matrix sub(dict.rows(), static_cast<Index>(pick.size()));
    for (std::size_t c = 0; c < pick.size(); ++c) sub.col(Index(c)) = dict.col(pick[c]);
    const Vector coef = sub.colPivHouseholderQr().solve(y);
    best = std::min(best, (y - sub * coef).norm());
  }
  return best;
}

inline Vector column_mean(const Matrix& z) { return z.rowwise().mean(); }

inline Vector class_mean(const Matrix& z, const Labels& labels, int c) {
  Vector sum = Vector::Zero(z.rows());
  int count = 0;
  for (Index j = 0; j < z.cols(); ++j) {
    if (labels[std::size_t(j)] == c) {
      sum += z.col(j);
      ++count;
    }
  }
  return count ? Vector(sum / double(count)) : sum;
}

inline int class_count_of(const Labels& labels, int c) {
  return static_cast<int>(std::count(labels.begin(), labels.end(), c));
}

/// Sum over sources of the squared distance between projected domain means
/// plus, per class present on both sides, the squared distance between the
/// projected class means. Source i is projected with `fs[i]` and the target
/// with `ft[i]`.
inline double direct_mmd(const std::vector<Matrix>& fs, const std::vector<Matrix>& ft,
                         const std::vector<Matrix>& xs, const Matrix& xt,
                         const std::vector<Labels>& ys, const Labels& pseudo, int classes) {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Matrix zs = fs[i].transpose() * xs[i];
    const Matrix zt = ft[i].transpose() * xt;
    total += (column_mean(zs) - column_mean(zt)).squaredNorm();
    for (int c = 1; c <= classes; ++c) {
      if (class_count_of(ys[i], c) == 0 || class_count_of(pseudo, c) == 0) continue;
      total += (class_mean(zs, ys[i], c) - class_mean(zt, pseudo, c)).squaredNorm();
    }
  }
  return total;
}

/// sum_j ||x_j - m||^2-style total scatter X H X^T.
inline Matrix total_scatter(const Matrix& x) {
  const Matrix centred = x.colwise() - x.rowwise().mean();
  return centred * centred.transpose();
}

/// Max over columns of ||A w - phi B w|| / (||A|| + |phi| ||B||).
inline double gevp_relative_residual(const Matrix& a, const Matrix& b, const Matrix& w,
                                     const Vector& phi) {
  const double na = a.norm();
  const double nb = b.norm();
  double worst = 0.0;
  for (Index j = 0; j < w.cols(); ++j) {
    const double r = (a * w.col(j) - phi(j) * b * w.col(j)).norm();
    worst = std::max(worst, r / (na + std::abs(phi(j)) * nb));
  }
  return worst;
}

/// Max entry of |W^T B W - I|.
inline double b_orthonormality_error(const Matrix& b, const Matrix& w) {
  const Matrix g = w.transpose() * b * w;
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

inline Matrix pairwise_sq_distances(const Matrix& z) {
  Matrix d(z.cols(), z.cols());
  for (Index a = 0; a < z.cols(); ++a)
    for (Index b = 0; b < z.cols(); ++b) d(a, b) = (z.col(a) - z.col(b)).squaredNorm();
  return d;
}

inline Matrix unit_columns(Matrix m) {
  for (Index j = 0; j < m.cols(); ++j) m.col(j).normalize();
  return m;
}

// Near-orthogonal unit atoms: mutual coherence well below 1/3.
inline Matrix incoherent_atoms(Index m, Index k, std::mt19937_64& rng) {
  const Matrix q = gaussian(m, m, rng).householderQr().householderQ();
  return unit_columns(q.leftCols(k) + 0.05 * gaussian(m, k, rng));
}

// Y = D0 X0 with exactly `gamma` nonzeros per column.
inline Matrix planted_signals(const Matrix& d0, int gamma, Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution sign(0.5);
  Matrix y(d0.rows(), n);
  std::vector<int> idx(static_cast<std::size_t>(d0.cols()));
  for (Index j = 0; j < n; ++j) {
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Vector x = Vector::Zero(d0.cols());
    for (int s = 0; s < gamma; ++s) x(idx[std::size_t(s)]) = (sign(rng) ? 1 : -1) * mag(rng);
    y.col(j) = d0 * x;
  }
  return y;
}

}  // namespace oracle
