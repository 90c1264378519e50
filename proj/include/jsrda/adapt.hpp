#pragma once

#include "jsrda/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jsrda {

/// Linear works on the raw codes; Rbf solves the Representer-form problem
/// over a Gram matrix of all training samples.
enum class KernelKind { Linear, Rbf };

/// MaxRatio keeps the eigenvectors with the largest generalized eigenvalues
/// (the trace-ratio maximizer); PaperSmallest keeps the smallest ones.
enum class EigOrder { MaxRatio, PaperSmallest };

std::string to_string(KernelKind kind);
std::string to_string(EigOrder order);
KernelKind parse_kernel_kind(const std::string& text);
EigOrder parse_eig_order(const std::string& text);

struct AdaptConfig {
  double lambda = 1.0;  // subspace divergence weight
  double mu = 1.0;      // target variance / scale weight
  double beta = 1e-6;   // source class-scatter weight
  int subspace_dim = 1000;  // k, clamped to the problem size
  int iterations = 5;       // T
  KernelKind kernel = KernelKind::Rbf;
  std::optional<double> rbf_bandwidth;  // unset: median heuristic
  EigOrder eig_order = EigOrder::MaxRatio;

  void validate() const;
};

/// I - (1/n) 1 1^T.
Matrix center_matrix(Index n);

/// Quadratic-form matrices of the marginal + conditional MMD. With p
/// sources every matrix is p x p block diagonal (blocks of the data
/// dimension), block i pairing source i with the target.
struct MmdMatrices {
  Matrix Ms;
  Matrix Mst;
  Matrix Mts;
  Matrix M;

  /// [[Ms, Mst], [Mts, M]].
  Matrix composed() const;
};

/// `source_blocks[i]` is D x N_{s,i}; `target` is D x N_t. Classes with no
/// member in either the source or the pseudo-labelled target are left out
/// of the conditional terms for that source.
MmdMatrices build_mmd(const std::vector<Matrix>& source_blocks, const Matrix& target,
                      const std::vector<Labels>& source_labels, const Labels& pseudo,
                      int class_count);

/// sum_c N^(c) (m^(c) - m)(m^(c) - m)^T over `classes`; each must be present.
Matrix between_class_scatter(const Matrix& x, const Labels& labels,
                             const std::vector<int>& classes);
/// sum_c X^(c) H^(c) X^(c)^T over `classes`; each must be present.
Matrix within_class_scatter(const Matrix& x, const Labels& labels,
                            const std::vector<int>& classes);
/// S_t = X_t H_t X_t^T.
Matrix target_variance(const Matrix& target);

/// Block-diagonal assemblies over the p sources.
struct ScatterMatrices {
  Matrix Sb;  // diag(S_{b,1}, ..., S_{b,p})
  Matrix Sw;  // diag(S_{w,1}, ..., S_{w,p})
  Matrix S;   // diag(S_t, ..., S_t)
};

/// Uses the classes present in each source's labels.
ScatterMatrices build_scatter(const std::vector<Matrix>& source_blocks,
                              const std::vector<Labels>& source_labels, const Matrix& target);

/// p copies of `block` on the diagonal.
Matrix block_diagonal(const Matrix& block, int copies);
Matrix block_diagonal(const std::vector<Matrix>& blocks);

enum class KernelFunction { Rbf, Dot };

/// Gram matrix over the training anchors plus what is needed to evaluate
/// kernel rows for new samples.
struct KernelContext {
  KernelFunction function = KernelFunction::Rbf;
  double sigma = 0.0;
  Matrix gram;     // N x N
  Matrix anchors;  // D x N, one training sample per column

  /// N x n matrix of k(anchor_a, x_j).
  Matrix rows(const Matrix& x) const;
};

double median_pairwise_distance(const Matrix& x);
/// exp(-||a - b||^2 / (2 sigma^2)); sigma defaults to the median pairwise
/// distance of the columns of `x`.
KernelContext rbf_gram(const Matrix& x, std::optional<double> sigma = std::nullopt);
/// X^T X.
KernelContext dot_gram(const Matrix& x);

struct GevpProblem {
  Matrix A;
  Matrix B;
};

/// A = [[beta Sb, 0], [0, mu S]],
/// B = [[Ms + lambda R + beta Sw, Mst - lambda R], [Mts - lambda R, M + (lambda + mu) R]]
/// with R the identity (linear) or p copies of the Gram matrix (kernel).
GevpProblem assemble_problem(const MmdMatrices& mmd, const ScatterMatrices& scatter,
                             const KernelContext* kernel, const AdaptConfig& cfg);

/// Restricts a problem over [F_s; F] (F = p stacked copies of F_t) to the
/// free variables [F_s; F_t], i.e. returns T^T A T and T^T B T.
GevpProblem tie_target_copies(const GevpProblem& problem, int sources);

struct GevpSolution {
  Matrix vectors;  // B-orthonormal columns
  Vector values;   // in selection order
  bool clamped = false;
  bool ridge_added = false;
};

/// Solves A w = phi B w for symmetric A and symmetric positive definite B.
GevpSolution solve_gevp(const Matrix& a, const Matrix& b, int k, EigOrder order);

/// Per-domain projections; in kernel mode these are coefficient matrices
/// over the kernel anchors.
struct ProjectionPair {
  std::vector<Matrix> source;
  Matrix target;
  std::optional<KernelContext> kernel;

  Index dim() const { return target.cols(); }
  Matrix project_source(std::size_t i, const Matrix& x) const;
  Matrix project_target(const Matrix& x) const;
};

struct AdaptResult {
  ProjectionPair projections;
  std::vector<Matrix> source_projected;
  Matrix target_projected;
  Labels pseudo;
  // Initial labels followed by the labels after every solve.
  std::vector<Labels> pseudo_history;
  Vector eigenvalues;
  int gevp_solves = 0;
  bool converged = false;
  bool clamped = false;
};

/// Alternates projection learning and 1-NN pseudo-labelling of the target
/// for up to T rounds, stopping once the labels stop changing.
AdaptResult adapt_loop(const std::vector<Matrix>& source_codes,
                       const std::vector<Labels>& source_labels, const Matrix& target_codes,
                       int class_count, const AdaptConfig& cfg);

}  // namespace jsrda
