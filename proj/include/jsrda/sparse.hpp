#pragma once

#include "jsrda/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace jsrda {

struct DictConfig {
  int atoms = 1000;    // K
  int sparsity = 50;   // gamma, max nonzeros per code
  int ksvd_iters = 30;
  std::uint64_t seed = 0;
  double omp_tol = 0.0;  // stop once the residual norm drops to this

  void validate() const;
};

/// m x K matrix of atoms (one per column).
struct Dictionary {
  Matrix atoms;

  Index dim() const { return atoms.rows(); }
  Index size() const { return atoms.cols(); }
};

/// Codes are stored densely, K x N; each column has at most gamma nonzeros.
using SparseCodes = Matrix;

/// Number of nonzeros in a code vector.
Index support_size(const Eigen::Ref<const Vector>& code);

/// Orthogonal matching pursuit. Picks the atom with the largest normalized
/// absolute correlation against the residual (lowest index on ties), refits
/// all selected coefficients by least squares, and stops after `sparsity`
/// atoms or once the residual norm is <= tol.
Vector omp(const Dictionary& dict, const Eigen::Ref<const Vector>& y, int sparsity,
           double tol = 0.0);

/// omp() applied to every column of `y`.
SparseCodes omp_batch(const Dictionary& dict, const Matrix& y, int sparsity, double tol = 0.0);

struct KsvdResult {
  Dictionary dict;
  SparseCodes codes;
  // ||Y - DX||_F^2 after each completed iteration.
  std::vector<double> objective;
  int iterations = 0;
};

/// K-SVD with seeded data-column initialization and dead-atom replacement.
KsvdResult ksvd(const Matrix& y, const DictConfig& cfg);
/// Same, starting from a caller-supplied dictionary (columns normalized).
KsvdResult ksvd(const Matrix& y, const Dictionary& init, const DictConfig& cfg);

/// Stacked dictionary over [source_1; ...; source_p; target] with its
/// per-view row blocks.
struct TransferDictionary {
  Dictionary stacked;
  std::vector<Dictionary> view_blocks;
};

struct TransferResult {
  TransferDictionary dict;
  SparseCodes codes;  // shared by every view
  std::vector<double> objective;
};

/// Vertically stacks the views (each rows x N, identical shapes), learns a
/// dictionary on the stack and slices it back into per-view blocks.
TransferResult learn_transfer_dictionaries(const std::vector<Matrix>& view_features,
                                           const DictConfig& cfg);

/// Encodes the columns of one view against its sliced dictionary block.
SparseCodes encode_view(const Dictionary& block, const Matrix& y_view, const DictConfig& cfg);

// Inspection dumps: one atom per CSV row.
void save_dictionary_csv(const std::filesystem::path& path, const Dictionary& dict);
Dictionary load_dictionary_csv(const std::filesystem::path& path);

}  // namespace jsrda
