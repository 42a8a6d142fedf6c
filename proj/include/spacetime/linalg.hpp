#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spacetime {

using DenseMatrix = Eigen::MatrixXd;

/// Global multiply-add counter used by the complexity tests. Every sparse
/// kernel adds its number of nonzeros touched.
namespace flops {
void reset();
std::uint64_t count();
void add(std::uint64_t n);
}  // namespace flops

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-row sparse matrix. Immutable after construction; column indices
/// within a row are sorted and unique.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  /// Sums duplicates. Entries that are exactly zero after summation are dropped
  /// unless `keep_zeros` is set.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries,
                                    bool keep_zeros = false);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const double> diag);
  static SparseMatrix from_dense(const DenseMatrix& dense, double drop_tol = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  /// Entry lookup; zero when not stored.
  double at(std::size_t i, std::size_t j) const;

  SparseMatrix transpose() const;
  DenseMatrix to_dense() const;
  double max_abs() const;
  /// Largest |i - j| over stored entries.
  std::size_t bandwidth() const;
  /// |A_ij - A_ji| <= rel_tol * max|A| on a full scan.
  bool is_symmetric(double rel_tol = 1e-12) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// y = A x. Rows are accumulated left to right.
void csr_matvec(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
std::vector<double> csr_matvec(const SparseMatrix& a, std::span<const double> x);
/// y += scale * A x
void csr_matvec_add(const SparseMatrix& a, std::span<const double> x, std::span<double> y,
                    double scale = 1.0);

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);
/// alpha * A + beta * B
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);

/// Coefficient vector on a tensor-product space, stored as a column-major
/// N_x x N_t matrix: column j holds the spatial coefficients of temporal DOF j.
class SpaceTimeVector {
 public:
  SpaceTimeVector() = default;
  SpaceTimeVector(std::size_t n_space, std::size_t n_time, double fill = 0.0);
  SpaceTimeVector(std::size_t n_space, std::size_t n_time, std::vector<double> data);

  std::size_t n_space() const { return n_space_; }
  std::size_t n_time() const { return n_time_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> column(std::size_t j) { return {data_.data() + j * n_space_, n_space_}; }
  std::span<const double> column(std::size_t j) const { return {data_.data() + j * n_space_, n_space_}; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * n_space_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * n_space_ + i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& vec() const { return data_; }

  bool same_shape(const SpaceTimeVector& other) const {
    return n_space_ == other.n_space_ && n_time_ == other.n_time_;
  }

 private:
  std::size_t n_space_ = 0;
  std::size_t n_time_ = 0;
  std::vector<double> data_;
};

/// Half-open range of temporal columns [begin, end).
struct ColumnRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const ColumnRange&) const = default;
};

/// Splits [0, n) into `parts` contiguous ranges whose sizes differ by at most one.
std::vector<ColumnRange> split_columns(std::size_t n, std::size_t parts);

/// Runs column-partitioned phases. Each call to `for_each_range` is one
/// fork-join phase: it returns once every range has been processed, so
/// results written in one phase may be read by any worker in the next.
class ColumnExecutor {
 public:
  using RangeTask = std::function<void(std::size_t worker, ColumnRange range)>;
  virtual ~ColumnExecutor() = default;
  virtual std::size_t n_workers() const = 0;
  virtual void for_each_range(std::size_t n_columns, const RangeTask& task) = 0;
};

class SerialExecutor final : public ColumnExecutor {
 public:
  std::size_t n_workers() const override { return 1; }
  void for_each_range(std::size_t n_columns, const RangeTask& task) override;
};

/// Abstract linear map on spatial coefficient vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  /// y = Op x. Must be safe to call concurrently with distinct y.
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;

  std::vector<double> operator()(std::span<const double> x) const;
};

class MatrixOperator final : public LinearOperator {
 public:
  explicit MatrixOperator(SparseMatrix a) : a_(std::move(a)) {}
  std::size_t rows() const override { return a_.rows(); }
  std::size_t cols() const override { return a_.cols(); }
  void apply(std::span<const double> x, std::span<double> y) const override { csr_matvec(a_, x, y); }
  const SparseMatrix& matrix() const { return a_; }

 private:
  SparseMatrix a_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(std::size_t n) : n_(n) {}
  std::size_t rows() const override { return n_; }
  std::size_t cols() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override;

 private:
  std::size_t n_;
};

class ScaledOperator final : public LinearOperator {
 public:
  ScaledOperator(std::shared_ptr<const LinearOperator> op, double scale) : op_(std::move(op)), scale_(scale) {}
  std::size_t rows() const override { return op_->rows(); }
  std::size_t cols() const override { return op_->cols(); }
  void apply(std::span<const double> x, std::span<double> y) const override;

 private:
  std::shared_ptr<const LinearOperator> op_;
  double scale_;
};

/// out = sum_k bt(j, k) * x.column(k), accumulated in stored column order.
void temporal_combine(const SparseMatrix& bt, const SpaceTimeVector& x, std::size_t j, std::span<double> out);
/// out += scale * sum_k bt(j, k) * x.column(k)
void temporal_combine_add(const SparseMatrix& bt, const SpaceTimeVector& x, std::size_t j, std::span<double> out,
                          double scale = 1.0);

/// Lazy B_t (x) B_x acting through vec(B_x (B_t X^T)^T); the Kronecker matrix is
/// never formed. An empty temporal factor stands for the identity.
class KroneckerOperator {
 public:
  KroneckerOperator(std::optional<SparseMatrix> temporal, std::shared_ptr<const LinearOperator> spatial,
                    std::size_t n_time_identity = 0);

  std::size_t n_time_out() const;
  std::size_t n_time_in() const;
  std::size_t n_space_out() const { return spatial_->rows(); }
  std::size_t n_space_in() const { return spatial_->cols(); }

  /// Output must already have shape (n_space_out, n_time_out).
  void apply(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const;
  void apply(const SpaceTimeVector& in, SpaceTimeVector& out) const;
  SpaceTimeVector apply(const SpaceTimeVector& in) const;
  /// Computes output columns in `range` only; reads whichever input columns the
  /// temporal factor couples them to.
  void apply_columns(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnRange range) const;

 private:
  void check(const SpaceTimeVector& in, const SpaceTimeVector& out) const;

  std::optional<SparseMatrix> temporal_;
  std::shared_ptr<const LinearOperator> spatial_;
  std::size_t n_time_identity_;
};

/// blockdiag over temporal columns: column j is acted on by blocks[block_index[j]].
class BlockDiagOperator {
 public:
  BlockDiagOperator(std::vector<std::shared_ptr<const LinearOperator>> blocks, std::vector<std::size_t> block_index);

  std::size_t n_time() const { return block_index_.size(); }
  std::size_t n_space() const;
  std::span<const std::size_t> block_index() const { return block_index_; }
  const LinearOperator& block(std::size_t b) const { return *blocks_.at(b); }

  void apply(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const;
  void apply(const SpaceTimeVector& in, SpaceTimeVector& out) const;
  void apply_columns(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnRange range) const;

 private:
  std::vector<std::shared_ptr<const LinearOperator>> blocks_;
  std::vector<std::size_t> block_index_;
};

/// Dense matrix whose column k is op(e_k). Oracle use only.
inline constexpr std::size_t kMaxMaterialize = 5000;
using VectorMap = std::function<void(std::span<const double>, std::span<double>)>;
DenseMatrix dense_materialize(const VectorMap& op, std::size_t n);
DenseMatrix dense_materialize(const LinearOperator& op);

/// Eigenvalues of a symmetric dense matrix, ascending.
Eigen::VectorXd symmetric_eigenvalues(const DenseMatrix& a);

}  // namespace spacetime
