#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "spacetime/linalg.hpp"
#include "spacetime/multigrid.hpp"
#include "spacetime/spatial.hpp"
#include "spacetime/temporal.hpp"
#include "spacetime/wavelet.hpp"

namespace spacetime {

enum class SchurForm { lemma1, lemma2 };

/// v' = (O^{-1} (x) K_x) v over the 2^{J+1} test columns.
void apply_KY(const TestMatrices& test, const LinearOperator& k_x, const SpaceTimeVector& v, SpaceTimeVector& out,
              ColumnExecutor& exec);
SpaceTimeVector apply_KY(const TestMatrices& test, const LinearOperator& k_x, const SpaceTimeVector& v);

/// Schur complement of the space-time saddle point system,
///   S = B^T K_Y B + Gamma_0 (x) M_x
///     = A_t (x) M K M + M_t (x) A K A + L^T (x) M K A + L (x) A K M + Gamma_0 (x) M,
/// with B = T (x) M_x + N (x) A_x and K = K_x. Both forms are evaluated
/// column by column without forming any Kronecker matrix.
class SchurOperator {
 public:
  SchurOperator(std::shared_ptr<const TemporalMatrices> temporal, std::shared_ptr<const TestMatrices> test,
                std::shared_ptr<const SpatialMatrices> spatial, std::shared_ptr<const LinearOperator> k_x,
                std::shared_ptr<const WaveletTransform> wavelet, SchurForm form = SchurForm::lemma2);

  std::size_t n_space() const { return spatial_->mass.rows(); }
  std::size_t n_time() const { return temporal_->mass.rows(); }
  SchurForm form() const { return form_; }
  const WaveletTransform& wavelet() const { return *wavelet_; }
  const LinearOperator& k_x() const { return *k_x_; }

  /// out = S u in single-scale coordinates.
  void apply_single_scale(const SpaceTimeVector& u, SpaceTimeVector& out, ColumnExecutor& exec) const;
  SpaceTimeVector apply_single_scale(const SpaceTimeVector& u) const;

  /// out = W^T S W w in wavelet-in-time coordinates.
  void apply(const SpaceTimeVector& w, SpaceTimeVector& out, ColumnExecutor& exec) const;
  SpaceTimeVector apply(const SpaceTimeVector& w) const;

 private:
  void check(const SpaceTimeVector& in, const SpaceTimeVector& out) const;
  void apply_lemma1(const SpaceTimeVector& u, SpaceTimeVector& out, ColumnExecutor& exec) const;
  void apply_lemma2(const SpaceTimeVector& u, SpaceTimeVector& out, ColumnExecutor& exec) const;

  std::shared_ptr<const TemporalMatrices> temporal_;
  std::shared_ptr<const TestMatrices> test_;
  std::shared_ptr<const SpatialMatrices> spatial_;
  std::shared_ptr<const LinearOperator> k_x_;
  std::shared_ptr<const WaveletTransform> wavelet_;
  SchurForm form_;
};

/// K_X = blockdiag[C_{|lambda|} A_x C_{|lambda|}] in wavelet coordinates, with
/// C_l an approximate inverse of alpha A_x + 2^l M_x.
class PreconditionerKX {
 public:
  /// blocks[l] is C_l for l = 0..J.
  PreconditionerKX(std::vector<std::shared_ptr<const LinearOperator>> level_inverses, const SparseMatrix& stiffness,
                   std::span<const int> level_of);

  std::size_t n_levels() const { return inverses_.size(); }
  const BlockDiagOperator& operator_() const { return op_; }
  const LinearOperator& level_inverse(std::size_t l) const { return *inverses_.at(l); }

  void apply(const SpaceTimeVector& r, SpaceTimeVector& out, ColumnExecutor& exec) const;
  SpaceTimeVector apply(const SpaceTimeVector& r) const;
  void apply_columns(const SpaceTimeVector& r, SpaceTimeVector& out, ColumnRange range) const;

 private:
  std::vector<std::shared_ptr<const LinearOperator>> inverses_;
  BlockDiagOperator op_;
};

/// Parameters of one discretized instance.
struct SystemConfig {
  int dim = 2;
  int time_level = 3;   // J: N_t = 2^J + 1
  int space_level = 3;  // K: N_x = (2^K - 1)^d
  double alpha = 0.3;
  MultigridOptions multigrid{};
  bool exact_inverses = false;
  SchurForm form = SchurForm::lemma2;
  Coefficients coefficients = Coefficients::heat(2);
};

/// Everything needed to apply S-hat and K_X for one configuration.
struct SpaceTimeSystem {
  SystemConfig config;
  std::shared_ptr<const TemporalMatrices> temporal;
  std::shared_ptr<const TestMatrices> test;
  std::shared_ptr<const MeshHierarchy> hierarchy;
  std::shared_ptr<const LevelMatrices> levels;
  std::shared_ptr<const SpatialMatrices> spatial;
  std::shared_ptr<const WaveletBasis> basis;
  std::shared_ptr<const WaveletTransform> wavelet;
  std::shared_ptr<const LinearOperator> k_x;
  std::shared_ptr<const SchurOperator> schur;
  std::shared_ptr<const PreconditionerKX> preconditioner;

  std::size_t n_time() const { return temporal->mass.rows(); }
  std::size_t n_space() const { return spatial->mass.rows(); }
  const MeshLevel& mesh() const { return hierarchy->level(config.space_level); }
};

/// Builds matrices, hierarchy and operators. Throws for invalid levels or
/// coefficients.
SpaceTimeSystem build_system(const SystemConfig& config);

/// f-hat = W^T (B^T K_Y g + Phi_t(0) (x) <u0, Phi_x>), split into its parts.
struct RightHandSide {
  SpaceTimeVector f_hat;
  SpaceTimeVector forcing_part;  // B^T K_Y g, single-scale
  SpaceTimeVector initial_part;  // Phi_t(0) (x) <u0, Phi_x>, single-scale
};

RightHandSide assemble_rhs(const SpaceTimeSystem& system, const ProblemData& problem, ColumnExecutor& exec);
RightHandSide assemble_rhs(const SpaceTimeSystem& system, const ProblemData& problem);

/// B^T K_Y g for a load already assembled against the test basis.
SpaceTimeVector apply_BT_KY(const SpaceTimeSystem& system, const SpaceTimeVector& load, ColumnExecutor& exec);

}  // namespace spacetime
