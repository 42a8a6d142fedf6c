#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "spacetime/linalg.hpp"
#include "spacetime/spatial.hpp"

namespace spacetime {

/// Mass and stiffness matrices on every level of a hierarchy, shared by all
/// solvers built on it.
class LevelMatrices {
 public:
  LevelMatrices(std::shared_ptr<const MeshHierarchy> hierarchy, const Coefficients& coeffs);

  const MeshHierarchy& hierarchy() const { return *hierarchy_; }
  std::shared_ptr<const MeshHierarchy> hierarchy_ptr() const { return hierarchy_; }
  const SpatialMatrices& level(int k) const { return levels_.at(static_cast<std::size_t>(k - 1)); }
  const SpatialMatrices& finest() const { return levels_.back(); }

 private:
  std::shared_ptr<const MeshHierarchy> hierarchy_;
  std::vector<SpatialMatrices> levels_;
};

struct MultigridOptions {
  int n_vcycles = 2;
  int n_smooth = 3;
  /// Doubles the number of smoothing steps on each coarser level. Ignored for
  /// d = 1, where it would make the cycle cost O(N log N).
  bool increase_smoothing = true;
};

/// Fixed number of V-cycles from a zero initial guess for alpha*A + mu*M.
/// Pre-smoothing is forward Gauss-Seidel, post-smoothing backward
/// Gauss-Seidel (lexicographic), so the induced map is symmetric positive
/// definite. The coarsest level (level 1) is solved by dense Cholesky.
class MultigridSolver final : public LinearOperator {
 public:
  MultigridSolver(std::shared_ptr<const LevelMatrices> levels, double alpha, double mu, MultigridOptions options = {});

  std::size_t rows() const override { return ops_.back().rows(); }
  std::size_t cols() const override { return rows(); }
  void apply(std::span<const double> b, std::span<double> x) const override;

  double alpha() const { return alpha_; }
  double mu() const { return mu_; }
  const MultigridOptions& options() const { return options_; }
  const SparseMatrix& level_operator(int k) const { return ops_.at(static_cast<std::size_t>(k - 1)); }

 private:
  struct Workspace;
  void vcycle(int k, int n_smooth, std::span<const double> b, std::span<double> x, Workspace& ws) const;
  void smooth_forward(int k, std::span<const double> b, std::span<double> x) const;
  void smooth_backward(int k, std::span<const double> b, std::span<double> x) const;

  std::shared_ptr<const LevelMatrices> levels_;
  double alpha_;
  double mu_;
  MultigridOptions options_;
  std::vector<SparseMatrix> ops_;
  std::vector<std::vector<std::size_t>> diag_pos_;
  Eigen::LLT<Eigen::MatrixXd> coarse_;
};

/// Exact inverse of alpha*A + mu*M by sparse Cholesky.
class DirectSolver final : public LinearOperator {
 public:
  explicit DirectSolver(const SparseMatrix& a);
  DirectSolver(const SpatialMatrices& m, double alpha, double mu);

  std::size_t rows() const override { return n_; }
  std::size_t cols() const override { return n_; }
  void apply(std::span<const double> b, std::span<double> x) const override;

 private:
  std::size_t n_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

/// C A C for a symmetric C.
class SandwichOperator final : public LinearOperator {
 public:
  SandwichOperator(std::shared_ptr<const LinearOperator> outer, SparseMatrix middle);
  std::size_t rows() const override { return middle_.rows(); }
  std::size_t cols() const override { return middle_.cols(); }
  void apply(std::span<const double> x, std::span<double> y) const override;

 private:
  std::shared_ptr<const LinearOperator> outer_;
  SparseMatrix middle_;
};

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a);

/// Extreme eigenvalues of the pencil (approximate inverse, exact inverse),
/// i.e. the spectrum of B*A with B the materialized approximate inverse.
struct SpectralEquivalenceReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 1.0;
};

SpectralEquivalenceReport spectral_report(const LinearOperator& approximate_inverse, const SparseMatrix& exact_operator);

}  // namespace spacetime
