#include "spacetime/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spacetime {

namespace flops {
namespace {
std::atomic<std::uint64_t> g_count{0};
}
void reset() { g_count.store(0, std::memory_order_relaxed); }
std::uint64_t count() { return g_count.load(std::memory_order_relaxed); }
void add(std::uint64_t n) { g_count.fetch_add(n, std::memory_order_relaxed); }
}  // namespace flops

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  require(row_offsets_.size() == rows_ + 1, "SparseMatrix: row_offsets must have rows+1 entries");
  require(row_offsets_.front() == 0, "SparseMatrix: row_offsets must start at 0");
  require(row_offsets_.back() == col_indices_.size(), "SparseMatrix: row_offsets end mismatch");
  require(col_indices_.size() == values_.size(), "SparseMatrix: index/value length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) {
    require(row_offsets_[i] <= row_offsets_[i + 1], "SparseMatrix: row_offsets must be nondecreasing");
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      require(col_indices_[p] < cols_, "SparseMatrix: column index out of range");
      require(p == row_offsets_[i] || col_indices_[p - 1] < col_indices_[p],
              "SparseMatrix: column indices must be sorted and unique");
      require(std::isfinite(values_[p]), "SparseMatrix: non-finite value");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries,
                                         bool keep_zeros) {
  for (const auto& t : entries) {
    require(t.row < rows && t.col < cols, "from_triplets: index out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols_out;
  std::vector<double> vals_out;
  cols_out.reserve(entries.size());
  vals_out.reserve(entries.size());

  std::size_t p = 0;
  while (p < entries.size()) {
    const std::size_t r = entries[p].row;
    const std::size_t c = entries[p].col;
    double sum = 0.0;
    while (p < entries.size() && entries[p].row == r && entries[p].col == c) sum += entries[p++].value;
    if (sum != 0.0 || keep_zeros) {
      cols_out.push_back(c);
      vals_out.push_back(sum);
      ++offsets[r + 1];
    }
  }
  for (std::size_t i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals_out));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    offsets[i + 1] = i + 1;
    cols[i] = i;
  }
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(diag.begin(), diag.end()));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense, double drop_tol) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < dense.rows(); ++i)
    for (Eigen::Index j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_tol)
        t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), dense(i, j)});
  return from_triplets(static_cast<std::size_t>(dense.rows()), static_cast<std::size_t>(dense.cols()),
                       std::move(t));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("SparseMatrix::at");
  const auto c = row_cols(i);
  const auto it = std::lower_bound(c.begin(), c.end(), j);
  if (it == c.end() || *it != j) return 0.0;
  return values_[row_offsets_[i] + static_cast<std::size_t>(it - c.begin())];
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (const auto c : col_indices_) ++offsets[c + 1];
  for (std::size_t j = 0; j < cols_; ++j) offsets[j + 1] += offsets[j];
  std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> cols(nnz());
  std::vector<double> vals(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const std::size_t q = next[col_indices_[p]]++;
      cols[q] = i;
      vals[q] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(cols), std::move(vals));
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_indices_[p])) = values_[p];
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (const double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::size_t SparseMatrix::bandwidth() const {
  std::size_t b = 0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (const auto j : row_cols(i)) b = std::max(b, i > j ? i - j : j - i);
  return b;
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  const double tol = rel_tol * max_abs();
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto c = row_cols(i);
    const auto v = row_values(i);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (std::abs(v[k] - at(c[k], i)) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Kernels

void csr_matvec(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) throw std::invalid_argument("csr_matvec: dimension mismatch");
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) sum += val[p] * x[col[p]];
    y[i] = sum;
  }
  flops::add(a.nnz());
}

std::vector<double> csr_matvec(const SparseMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  csr_matvec(a, x, y);
  return y;
}

void csr_matvec_add(const SparseMatrix& a, std::span<const double> x, std::span<double> y, double scale) {
  if (x.size() != a.cols() || y.size() != a.rows())
    throw std::invalid_argument("csr_matvec_add: dimension mismatch");
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) sum += val[p] * x[col[p]];
    y[i] += scale * sum;
  }
  flops::add(a.nnz());
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    for (std::size_t p = 0; p < ac.size(); ++p) {
      const auto bc = b.row_cols(ac[p]);
      const auto bv = b.row_values(ac[p]);
      for (std::size_t q = 0; q < bc.size(); ++q) t.push_back({i, bc[q], av[p] * bv[q]});
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(t), true);
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: dimension mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto c = a.row_cols(i);
    const auto v = a.row_values(i);
    for (std::size_t p = 0; p < c.size(); ++p) t.push_back({i, c[p], alpha * v[p]});
  }
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const auto c = b.row_cols(i);
    const auto v = b.row_values(i);
    for (std::size_t p = 0; p < c.size(); ++p) t.push_back({i, c[p], beta * v[p]});
  }
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t), true);
}

// ---------------------------------------------------------------------------
// SpaceTimeVector

SpaceTimeVector::SpaceTimeVector(std::size_t n_space, std::size_t n_time, double fill)
    : n_space_(n_space), n_time_(n_time), data_(n_space * n_time, fill) {}

SpaceTimeVector::SpaceTimeVector(std::size_t n_space, std::size_t n_time, std::vector<double> data)
    : n_space_(n_space), n_time_(n_time), data_(std::move(data)) {
  if (data_.size() != n_space_ * n_time_) throw std::invalid_argument("SpaceTimeVector: data length mismatch");
}

// ---------------------------------------------------------------------------
// Executors and operators

std::vector<ColumnRange> split_columns(std::size_t n, std::size_t parts) {
  if (parts == 0) throw std::invalid_argument("split_columns: zero parts");
  std::vector<ColumnRange> out;
  out.reserve(parts);
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < parts; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    out.push_back({begin, begin + len});
    begin += len;
  }
  return out;
}

void SerialExecutor::for_each_range(std::size_t n_columns, const RangeTask& task) {
  if (n_columns > 0) task(0, {0, n_columns});
}

std::vector<double> LinearOperator::operator()(std::span<const double> x) const {
  std::vector<double> y(rows());
  apply(x, y);
  return y;
}

void IdentityOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw std::invalid_argument("IdentityOperator: dimension mismatch");
  std::copy(x.begin(), x.end(), y.begin());
}

void ScaledOperator::apply(std::span<const double> x, std::span<double> y) const {
  op_->apply(x, y);
  for (auto& v : y) v *= scale_;
}

void temporal_combine(const SparseMatrix& bt, const SpaceTimeVector& x, std::size_t j, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  temporal_combine_add(bt, x, j, out, 1.0);
}

void temporal_combine_add(const SparseMatrix& bt, const SpaceTimeVector& x, std::size_t j, std::span<double> out,
                          double scale) {
  if (bt.cols() != x.n_time() || out.size() != x.n_space() || j >= bt.rows())
    throw std::invalid_argument("temporal_combine: dimension mismatch");
  const auto cols = bt.row_cols(j);
  const auto vals = bt.row_values(j);
  const std::size_t n = out.size();
  for (std::size_t p = 0; p < cols.size(); ++p) {
    const double c = scale * vals[p];
    const auto src = x.column(cols[p]);
    for (std::size_t i = 0; i < n; ++i) out[i] += c * src[i];
  }
  flops::add(cols.size() * n);
}

KroneckerOperator::KroneckerOperator(std::optional<SparseMatrix> temporal,
                                     std::shared_ptr<const LinearOperator> spatial, std::size_t n_time_identity)
    : temporal_(std::move(temporal)), spatial_(std::move(spatial)), n_time_identity_(n_time_identity) {
  if (!spatial_) throw std::invalid_argument("KroneckerOperator: missing spatial factor");
  if (!temporal_ && n_time_identity_ == 0)
    throw std::invalid_argument("KroneckerOperator: identity temporal factor needs a size");
}

std::size_t KroneckerOperator::n_time_out() const { return temporal_ ? temporal_->rows() : n_time_identity_; }
std::size_t KroneckerOperator::n_time_in() const { return temporal_ ? temporal_->cols() : n_time_identity_; }

void KroneckerOperator::check(const SpaceTimeVector& in, const SpaceTimeVector& out) const {
  if (in.n_time() != n_time_in() || in.n_space() != n_space_in() || out.n_time() != n_time_out() ||
      out.n_space() != n_space_out())
    throw std::invalid_argument("kron_apply: dimension mismatch");
}

void KroneckerOperator::apply_columns(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnRange range) const {
  check(in, out);
  std::vector<double> tmp(n_space_in());
  for (std::size_t j = range.begin; j < range.end; ++j) {
    if (temporal_) {
      temporal_combine(*temporal_, in, j, tmp);
      spatial_->apply(tmp, out.column(j));
    } else {
      spatial_->apply(in.column(j), out.column(j));
    }
  }
}

void KroneckerOperator::apply(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const {
  check(in, out);
  exec.for_each_range(n_time_out(), [&](std::size_t, ColumnRange r) { apply_columns(in, out, r); });
}

void KroneckerOperator::apply(const SpaceTimeVector& in, SpaceTimeVector& out) const {
  SerialExecutor serial;
  apply(in, out, serial);
}

SpaceTimeVector KroneckerOperator::apply(const SpaceTimeVector& in) const {
  SpaceTimeVector out(n_space_out(), n_time_out());
  apply(in, out);
  return out;
}

BlockDiagOperator::BlockDiagOperator(std::vector<std::shared_ptr<const LinearOperator>> blocks,
                                     std::vector<std::size_t> block_index)
    : blocks_(std::move(blocks)), block_index_(std::move(block_index)) {
  if (blocks_.empty()) throw std::invalid_argument("BlockDiagOperator: no blocks");
  for (const auto& b : blocks_) {
    if (!b) throw std::invalid_argument("BlockDiagOperator: null block");
    if (b->rows() != b->cols() || b->rows() != blocks_.front()->rows())
      throw std::invalid_argument("BlockDiagOperator: blocks must be square and equally sized");
  }
  for (const auto idx : block_index_) {
    if (idx >= blocks_.size())
      throw std::out_of_range("BlockDiagOperator: missing block for level " + std::to_string(idx));
  }
}

std::size_t BlockDiagOperator::n_space() const { return blocks_.front()->rows(); }

void BlockDiagOperator::apply_columns(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnRange range) const {
  if (!in.same_shape(out) || in.n_time() != n_time() || in.n_space() != n_space())
    throw std::invalid_argument("blockdiag_apply: dimension mismatch");
  for (std::size_t j = range.begin; j < range.end; ++j) blocks_[block_index_[j]]->apply(in.column(j), out.column(j));
}

void BlockDiagOperator::apply(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const {
  exec.for_each_range(n_time(), [&](std::size_t, ColumnRange r) { apply_columns(in, out, r); });
}

void BlockDiagOperator::apply(const SpaceTimeVector& in, SpaceTimeVector& out) const {
  SerialExecutor serial;
  apply(in, out, serial);
}

// ---------------------------------------------------------------------------
// Oracles

DenseMatrix dense_materialize(const VectorMap& op, std::size_t n) {
  if (n > kMaxMaterialize)
    throw std::length_error("dense_materialize: n = " + std::to_string(n) + " exceeds the oracle cap");
  const auto sn = static_cast<Eigen::Index>(n);
  DenseMatrix out(sn, sn);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t k = 0; k < n; ++k) {
    e[k] = 1.0;
    op(e, col);
    e[k] = 0.0;
    for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[i];
  }
  return out;
}

DenseMatrix dense_materialize(const LinearOperator& op) {
  if (op.rows() != op.cols()) throw std::invalid_argument("dense_materialize: operator not square");
  return dense_materialize([&](std::span<const double> x, std::span<double> y) { op.apply(x, y); }, op.rows());
}

Eigen::VectorXd symmetric_eigenvalues(const DenseMatrix& a) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_eigenvalues: decomposition failed");
  return es.eigenvalues();
}

}  // namespace spacetime
