#include "spacetime/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spacetime {

LevelMatrices::LevelMatrices(std::shared_ptr<const MeshHierarchy> hierarchy, const Coefficients& coeffs)
    : hierarchy_(std::move(hierarchy)) {
  if (!hierarchy_) throw std::invalid_argument("LevelMatrices: empty hierarchy");
  for (int k = 1; k <= hierarchy_->finest_level(); ++k) levels_.push_back(assemble_spatial(hierarchy_->level(k), coeffs));
}

struct MultigridSolver::Workspace {
  // Per level: right-hand side, iterate, residual.
  std::vector<std::vector<double>> b, x, r;
};

MultigridSolver::MultigridSolver(std::shared_ptr<const LevelMatrices> levels, double alpha, double mu,
                                 MultigridOptions options)
    : levels_(std::move(levels)), alpha_(alpha), mu_(mu), options_(options) {
  if (!levels_) throw std::invalid_argument("MultigridSolver: empty hierarchy");
  if (!(alpha >= 0.0 && mu >= 0.0 && (alpha > 0.0 || mu > 0.0)))
    throw std::invalid_argument("MultigridSolver: need alpha > 0 or mu > 0 (both nonnegative)");
  if (options_.n_vcycles < 1 || options_.n_smooth < 0) throw std::invalid_argument("MultigridSolver: bad options");

  const int finest = levels_->hierarchy().finest_level();
  for (int k = 1; k <= finest; ++k) {
    const auto& m = levels_->level(k);
    ops_.push_back(add(m.stiffness, m.mass, alpha_, mu_));
    const auto& op = ops_.back();
    std::vector<std::size_t> diag(op.rows());
    for (std::size_t i = 0; i < op.rows(); ++i) {
      const auto c = op.row_cols(i);
      const auto it = std::lower_bound(c.begin(), c.end(), i);
      if (it == c.end() || *it != i) throw std::runtime_error("MultigridSolver: missing diagonal entry");
      diag[i] = op.row_offsets()[i] + static_cast<std::size_t>(it - c.begin());
    }
    diag_pos_.push_back(std::move(diag));
  }
  coarse_.compute(ops_.front().to_dense());
  if (coarse_.info() != Eigen::Success) throw std::runtime_error("MultigridSolver: coarse operator not SPD");
}

void MultigridSolver::smooth_forward(int k, std::span<const double> b, std::span<double> x) const {
  const auto& a = ops_[static_cast<std::size_t>(k - 1)];
  const auto& dp = diag_pos_[static_cast<std::size_t>(k - 1)];
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = b[i];
    for (std::size_t p = off[i]; p < off[i + 1]; ++p)
      if (p != dp[i]) sum -= val[p] * x[col[p]];
    x[i] = sum / val[dp[i]];
  }
  flops::add(a.nnz());
}

void MultigridSolver::smooth_backward(int k, std::span<const double> b, std::span<double> x) const {
  const auto& a = ops_[static_cast<std::size_t>(k - 1)];
  const auto& dp = diag_pos_[static_cast<std::size_t>(k - 1)];
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (std::size_t i = a.rows(); i-- > 0;) {
    double sum = b[i];
    for (std::size_t p = off[i]; p < off[i + 1]; ++p)
      if (p != dp[i]) sum -= val[p] * x[col[p]];
    x[i] = sum / val[dp[i]];
  }
  flops::add(a.nnz());
}

void MultigridSolver::vcycle(int k, int n_smooth, std::span<const double> b, std::span<double> x, Workspace& ws) const {
  if (k == 1) {
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(x.size()));
    xm = coarse_.solve(bm);
    flops::add(b.size() * b.size());
    return;
  }
  const auto uk = static_cast<std::size_t>(k);
  const auto& a = ops_[uk - 1];
  for (int s = 0; s < n_smooth; ++s) smooth_forward(k, b, x);

  auto& r = ws.r[uk];
  csr_matvec(a, x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];

  auto& bc = ws.b[uk - 1];
  auto& xc = ws.x[uk - 1];
  csr_matvec(levels_->hierarchy().restriction(k), r, bc);
  std::fill(xc.begin(), xc.end(), 0.0);
  const bool grow = options_.increase_smoothing && levels_->hierarchy().dim() >= 2;
  vcycle(k - 1, grow ? 2 * n_smooth : n_smooth, bc, xc, ws);
  csr_matvec_add(levels_->hierarchy().prolongation(k), xc, x);

  for (int s = 0; s < n_smooth; ++s) smooth_backward(k, b, x);
}

void MultigridSolver::apply(std::span<const double> b, std::span<double> x) const {
  if (b.size() != rows() || x.size() != rows()) throw std::invalid_argument("mg_apply: dimension mismatch");
  const int finest = levels_->hierarchy().finest_level();
  Workspace ws;
  ws.b.resize(static_cast<std::size_t>(finest + 1));
  ws.x.resize(static_cast<std::size_t>(finest + 1));
  ws.r.resize(static_cast<std::size_t>(finest + 1));
  for (int k = 1; k <= finest; ++k) {
    const std::size_t n = ops_[static_cast<std::size_t>(k - 1)].rows();
    ws.b[static_cast<std::size_t>(k)].resize(n);
    ws.x[static_cast<std::size_t>(k)].resize(n);
    ws.r[static_cast<std::size_t>(k)].resize(n);
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (int c = 0; c < options_.n_vcycles; ++c) vcycle(finest, options_.n_smooth, b, x, ws);
}

// ---------------------------------------------------------------------------

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto c = a.row_cols(i);
    const auto v = a.row_values(i);
    for (std::size_t p = 0; p < c.size(); ++p)
      t.emplace_back(static_cast<int>(i), static_cast<int>(c[p]), v[p]);
  }
  Eigen::SparseMatrix<double> out(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

DirectSolver::DirectSolver(const SparseMatrix& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("DirectSolver: matrix not square");
  llt_.compute(to_eigen(a));
  if (llt_.info() != Eigen::Success) throw std::runtime_error("DirectSolver: matrix not SPD");
}

DirectSolver::DirectSolver(const SpatialMatrices& m, double alpha, double mu)
    : DirectSolver(add(m.stiffness, m.mass, alpha, mu)) {}

void DirectSolver::apply(std::span<const double> b, std::span<double> x) const {
  if (b.size() != n_ || x.size() != n_) throw std::invalid_argument("DirectSolver: dimension mismatch");
  Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(n_));
  Eigen::Map<Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(n_));
  xm = llt_.solve(bm);
  flops::add(2 * static_cast<std::uint64_t>(llt_.matrixL().nestedExpression().nonZeros()));
}

SandwichOperator::SandwichOperator(std::shared_ptr<const LinearOperator> outer, SparseMatrix middle)
    : outer_(std::move(outer)), middle_(std::move(middle)) {
  if (!outer_ || outer_->rows() != middle_.rows() || outer_->cols() != middle_.cols())
    throw std::invalid_argument("SandwichOperator: dimension mismatch");
}

void SandwichOperator::apply(std::span<const double> x, std::span<double> y) const {
  std::vector<double> t1(x.size()), t2(x.size());
  outer_->apply(x, t1);
  csr_matvec(middle_, t1, t2);
  outer_->apply(t2, y);
}

SpectralEquivalenceReport spectral_report(const LinearOperator& approximate_inverse, const SparseMatrix& exact_operator) {
  const DenseMatrix b = dense_materialize(approximate_inverse);
  const DenseMatrix a = exact_operator.to_dense();
  const double asym = (b - b.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * b.cwiseAbs().maxCoeff()) throw std::runtime_error("spectral_report: operator is not symmetric");
  const DenseMatrix bs = 0.5 * (b + b.transpose());
  Eigen::LLT<DenseMatrix> lb(bs);
  if (lb.info() != Eigen::Success) throw std::runtime_error("spectral_report: operator is not positive definite");
  Eigen::LLT<DenseMatrix> la(a);
  if (la.info() != Eigen::Success) throw std::runtime_error("spectral_report: exact operator is not positive definite");
  // eig(B A) = eig(L^T B L) with A = L L^T.
  const DenseMatrix l = la.matrixL();
  const Eigen::VectorXd ev = symmetric_eigenvalues(l.transpose() * bs * l);
  SpectralEquivalenceReport r;
  r.lambda_min = ev.minCoeff();
  r.lambda_max = ev.maxCoeff();
  r.kappa = r.lambda_max / r.lambda_min;
  return r;
}

}  // namespace spacetime
