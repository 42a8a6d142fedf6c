#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <vector>

#include "spacetime/linalg.hpp"

namespace spacetime {

/// Three-point piecewise-linear wavelets on the dyadic partitions of [0, 1].
///
/// V_j is spanned by the 2^j + 1 hats on level j. The wavelets completing V_j
/// to V_{j+1} sit at the 2^j new (odd) fine vertices and are combinations of
/// three fine hats:
///   interior         (-1/2, 1, -1/2)
///   left boundary    (-1,   1, -1/2)   (the half hat at t = 0 carries -1)
///   right boundary   (-1/2, 1, -1)
///   single wavelet   (-1,   1, -1)     (j = 0: both neighbours are boundary hats)
/// so that every wavelet has a vanishing integral. Wavelets on level l = j + 1
/// are scaled by 2^{l/2}, which makes the family uniformly L2-stable.
///
/// Wavelet coordinates are ordered coarse-to-fine: the two hats of V_0
/// (level 0), then the level-1 wavelet, the two level-2 wavelets, and so on.
class WaveletBasis {
 public:
  explicit WaveletBasis(int max_level);

  int max_level() const { return max_level_; }
  std::size_t n_dofs() const { return dim(max_level_); }
  static std::size_t dim(int j) { return (std::size_t{1} << j) + 1; }

  /// |lambda| for every wavelet coordinate.
  std::span<const int> level_of() const { return level_of_; }

  /// Two-scale matrices for the step V_j -> V_{j+1}, 0 <= j < J.
  const SparseMatrix& coarse_to_fine(int j) const { return p_.at(static_cast<std::size_t>(j)); }
  const SparseMatrix& wavelet_to_fine(int j) const { return q_.at(static_cast<std::size_t>(j)); }
  /// M_j = [P_j | Q_j], square of size dim(j + 1).
  const SparseMatrix& two_scale(int j) const { return m_.at(static_cast<std::size_t>(j)); }
  const SparseMatrix& two_scale_transposed(int j) const { return mt_.at(static_cast<std::size_t>(j)); }

 private:
  int max_level_;
  std::vector<int> level_of_;
  std::vector<SparseMatrix> p_, q_, m_, mt_;
};

/// W = W_t (x) Id_x, mapping wavelet-in-time to single-scale coordinates, as a
/// composition of J levelwise Kronecker stages.
class WaveletTransform {
 public:
  explicit WaveletTransform(std::shared_ptr<const WaveletBasis> basis);

  const WaveletBasis& basis() const { return *basis_; }
  std::size_t n_time() const { return basis_->n_dofs(); }
  /// Number of sparse stages one application performs.
  std::size_t depth() const { return static_cast<std::size_t>(basis_->max_level()); }
  /// Stages executed since construction (both directions).
  std::size_t stages_executed() const { return stages_.load(); }

  /// out = W in. `in` and `out` must be distinct and equally shaped.
  void apply(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const;
  /// out = W^T in.
  void apply_transpose(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const;

  SpaceTimeVector apply(const SpaceTimeVector& in) const;
  SpaceTimeVector apply_transpose(const SpaceTimeVector& in) const;

 private:
  void check(const SpaceTimeVector& in, const SpaceTimeVector& out) const;

  std::shared_ptr<const WaveletBasis> basis_;
  mutable std::atomic<std::size_t> stages_{0};
};

}  // namespace spacetime
