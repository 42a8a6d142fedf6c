#include "spacetime/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spacetime {

namespace {

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) { csr_matvec(a, x, y); }

// out.column(j) = scale * x.column(j) for every j, serially per range.
void copy_columns(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnRange r) {
  for (std::size_t j = r.begin; j < r.end; ++j) {
    const auto s = in.column(j);
    std::copy(s.begin(), s.end(), out.column(j).begin());
  }
}

}  // namespace

void apply_KY(const TestMatrices& test, const LinearOperator& k_x, const SpaceTimeVector& v, SpaceTimeVector& out,
              ColumnExecutor& exec) {
  const std::size_t n_test = test.gram.rows();
  if (v.n_time() != n_test || v.n_space() != k_x.rows() || !v.same_shape(out))
    throw std::invalid_argument("apply_KY: dimension mismatch");
  exec.for_each_range(n_test, [&](std::size_t, ColumnRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i) {
      auto o = out.column(i);
      k_x.apply(v.column(i), o);
      const double s = test.gram_inverse_diagonal[i];
      if (s != 1.0)
        for (double& x : o) x *= s;
    }
  });
}

SpaceTimeVector apply_KY(const TestMatrices& test, const LinearOperator& k_x, const SpaceTimeVector& v) {
  SpaceTimeVector out(v.n_space(), v.n_time());
  SerialExecutor serial;
  apply_KY(test, k_x, v, out, serial);
  return out;
}

// ---------------------------------------------------------------------------

SchurOperator::SchurOperator(std::shared_ptr<const TemporalMatrices> temporal, std::shared_ptr<const TestMatrices> test,
                             std::shared_ptr<const SpatialMatrices> spatial, std::shared_ptr<const LinearOperator> k_x,
                             std::shared_ptr<const WaveletTransform> wavelet, SchurForm form)
    : temporal_(std::move(temporal)),
      test_(std::move(test)),
      spatial_(std::move(spatial)),
      k_x_(std::move(k_x)),
      wavelet_(std::move(wavelet)),
      form_(form) {
  if (!temporal_ || !test_ || !spatial_ || !k_x_ || !wavelet_) throw std::invalid_argument("SchurOperator: null part");
  if (k_x_->rows() != spatial_->mass.rows() || wavelet_->n_time() != temporal_->mass.rows() ||
      test_->derivative.cols() != temporal_->mass.rows())
    throw std::invalid_argument("SchurOperator: inconsistent dimensions");
}

void SchurOperator::check(const SpaceTimeVector& in, const SpaceTimeVector& out) const {
  if (in.n_space() != n_space() || in.n_time() != n_time() || !in.same_shape(out))
    throw std::invalid_argument("schur_apply: dimension mismatch");
  if (&in == &out) throw std::invalid_argument("schur_apply: input and output must differ");
}

void SchurOperator::apply_lemma2(const SpaceTimeVector& u, SpaceTimeVector& out, ColumnExecutor& exec) const {
  const std::size_t nx = n_space();
  const std::size_t nt = n_time();
  const auto& mx = spatial_->mass;
  const auto& ax = spatial_->stiffness;
  const auto& tm = *temporal_;

  SpaceTimeVector mu(nx, nt), au(nx, nt);
  exec.for_each_range(nt, [&](std::size_t, ColumnRange r) {
    for (std::size_t k = r.begin; k < r.end; ++k) {
      spmv(mx, u.column(k), mu.column(k));
      spmv(ax, u.column(k), au.column(k));
    }
  });

  exec.for_each_range(nt, [&](std::size_t, ColumnRange r) {
    std::vector<double> z1(nx), z2(nx), k1(nx), k2(nx);
    for (std::size_t j = r.begin; j < r.end; ++j) {
      temporal_combine(tm.stiffness, mu, j, z1);
      temporal_combine_add(tm.derivative_t, au, j, z1);
      temporal_combine(tm.mass, au, j, z2);
      temporal_combine_add(tm.derivative, mu, j, z2);
      k_x_->apply(z1, k1);
      k_x_->apply(z2, k2);
      auto o = out.column(j);
      spmv(mx, k1, o);
      csr_matvec_add(ax, k2, o);
      if (j == 0) {
        const auto m0 = mu.column(0);
        for (std::size_t i = 0; i < nx; ++i) o[i] += m0[i];
      }
    }
  });
}

void SchurOperator::apply_lemma1(const SpaceTimeVector& u, SpaceTimeVector& out, ColumnExecutor& exec) const {
  const std::size_t nx = n_space();
  const std::size_t nt = n_time();
  const std::size_t n_test = test_->gram.rows();
  const auto& mx = spatial_->mass;
  const auto& ax = spatial_->stiffness;

  SpaceTimeVector mu(nx, nt), au(nx, nt);
  exec.for_each_range(nt, [&](std::size_t, ColumnRange r) {
    for (std::size_t k = r.begin; k < r.end; ++k) {
      spmv(mx, u.column(k), mu.column(k));
      spmv(ax, u.column(k), au.column(k));
    }
  });

  // Y = B u on the test columns, then V = K_Y Y.
  SpaceTimeVector y(nx, n_test), v(nx, n_test);
  exec.for_each_range(n_test, [&](std::size_t, ColumnRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i) {
      auto yi = y.column(i);
      temporal_combine(test_->derivative, mu, i, yi);
      temporal_combine_add(test_->mass, au, i, yi);
    }
  });
  apply_KY(*test_, *k_x_, y, v, exec);

  // out = B^T V + Gamma_0 (x) M u.
  const SparseMatrix tt = test_->derivative.transpose();
  const SparseMatrix nt_ = test_->mass.transpose();
  exec.for_each_range(nt, [&](std::size_t, ColumnRange r) {
    std::vector<double> s1(nx), s2(nx);
    for (std::size_t j = r.begin; j < r.end; ++j) {
      temporal_combine(tt, v, j, s1);
      temporal_combine(nt_, v, j, s2);
      auto o = out.column(j);
      spmv(mx, s1, o);
      csr_matvec_add(ax, s2, o);
      if (j == 0) {
        const auto m0 = mu.column(0);
        for (std::size_t i = 0; i < nx; ++i) o[i] += m0[i];
      }
    }
  });
}

void SchurOperator::apply_single_scale(const SpaceTimeVector& u, SpaceTimeVector& out, ColumnExecutor& exec) const {
  check(u, out);
  if (form_ == SchurForm::lemma2)
    apply_lemma2(u, out, exec);
  else
    apply_lemma1(u, out, exec);
}

SpaceTimeVector SchurOperator::apply_single_scale(const SpaceTimeVector& u) const {
  SpaceTimeVector out(u.n_space(), u.n_time());
  SerialExecutor serial;
  apply_single_scale(u, out, serial);
  return out;
}

void SchurOperator::apply(const SpaceTimeVector& w, SpaceTimeVector& out, ColumnExecutor& exec) const {
  check(w, out);
  SpaceTimeVector u(n_space(), n_time()), su(n_space(), n_time());
  wavelet_->apply(w, u, exec);
  apply_single_scale(u, su, exec);
  wavelet_->apply_transpose(su, out, exec);
}

SpaceTimeVector SchurOperator::apply(const SpaceTimeVector& w) const {
  SpaceTimeVector out(w.n_space(), w.n_time());
  SerialExecutor serial;
  apply(w, out, serial);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::shared_ptr<const LinearOperator>> sandwich_blocks(
    const std::vector<std::shared_ptr<const LinearOperator>>& inverses, const SparseMatrix& stiffness) {
  std::vector<std::shared_ptr<const LinearOperator>> blocks;
  for (const auto& c : inverses) blocks.push_back(std::make_shared<SandwichOperator>(c, stiffness));
  return blocks;
}

std::vector<std::size_t> block_indices(std::span<const int> level_of) {
  std::vector<std::size_t> idx;
  idx.reserve(level_of.size());
  for (int l : level_of) idx.push_back(static_cast<std::size_t>(l));
  return idx;
}

}  // namespace

PreconditionerKX::PreconditionerKX(std::vector<std::shared_ptr<const LinearOperator>> level_inverses,
                                   const SparseMatrix& stiffness, std::span<const int> level_of)
    : inverses_(std::move(level_inverses)),
      op_(sandwich_blocks(inverses_, stiffness), block_indices(level_of)) {}

void PreconditionerKX::apply(const SpaceTimeVector& r, SpaceTimeVector& out, ColumnExecutor& exec) const {
  op_.apply(r, out, exec);
}

SpaceTimeVector PreconditionerKX::apply(const SpaceTimeVector& r) const {
  SpaceTimeVector out(r.n_space(), r.n_time());
  op_.apply(r, out);
  return out;
}

void PreconditionerKX::apply_columns(const SpaceTimeVector& r, SpaceTimeVector& out, ColumnRange range) const {
  op_.apply_columns(r, out, range);
}

// ---------------------------------------------------------------------------

SpaceTimeSystem build_system(const SystemConfig& config) {
  if (config.dim < 1 || config.dim > 3) throw std::invalid_argument("build_system: dim must be 1, 2 or 3");
  if (config.time_level < 0 || config.time_level > 24) throw std::invalid_argument("build_system: bad time level");
  if (config.space_level < 1 || config.space_level > 14) throw std::invalid_argument("build_system: bad space level");
  if (!(config.alpha > 0.0)) throw std::invalid_argument("build_system: alpha must be positive");
  if (config.coefficients.dim != config.dim) throw std::invalid_argument("build_system: coefficient dimension mismatch");

  SpaceTimeSystem s;
  s.config = config;
  s.temporal = std::make_shared<const TemporalMatrices>(assemble_temporal_trial(config.time_level));
  s.test = std::make_shared<const TestMatrices>(assemble_temporal_test(config.time_level));
  s.hierarchy = std::make_shared<const MeshHierarchy>(config.dim, config.space_level);
  s.levels = std::make_shared<const LevelMatrices>(s.hierarchy, config.coefficients);
  s.spatial = std::make_shared<const SpatialMatrices>(s.levels->finest());
  s.basis = std::make_shared<const WaveletBasis>(config.time_level);
  s.wavelet = std::make_shared<const WaveletTransform>(s.basis);

  auto make_inverse = [&](double a, double m) -> std::shared_ptr<const LinearOperator> {
    if (config.exact_inverses) return std::make_shared<DirectSolver>(*s.spatial, a, m);
    return std::make_shared<MultigridSolver>(s.levels, a, m, config.multigrid);
  };

  s.k_x = make_inverse(1.0, 0.0);
  s.schur = std::make_shared<const SchurOperator>(s.temporal, s.test, s.spatial, s.k_x, s.wavelet, config.form);

  std::vector<std::shared_ptr<const LinearOperator>> c;
  for (int l = 0; l <= config.time_level; ++l) c.push_back(make_inverse(config.alpha, std::ldexp(1.0, l)));
  s.preconditioner = std::make_shared<const PreconditionerKX>(std::move(c), s.spatial->stiffness, s.basis->level_of());
  return s;
}

SpaceTimeVector apply_BT_KY(const SpaceTimeSystem& system, const SpaceTimeVector& load, ColumnExecutor& exec) {
  const std::size_t nx = system.n_space();
  const std::size_t nt = system.n_time();
  const auto& test = *system.test;
  if (load.n_space() != nx || load.n_time() != test.gram.rows())
    throw std::invalid_argument("apply_BT_KY: dimension mismatch");
  SpaceTimeVector v(nx, load.n_time());
  apply_KY(test, *system.k_x, load, v, exec);
  const SparseMatrix tt = test.derivative.transpose();
  const SparseMatrix ntr = test.mass.transpose();
  SpaceTimeVector out(nx, nt);
  exec.for_each_range(nt, [&](std::size_t, ColumnRange r) {
    std::vector<double> s1(nx), s2(nx);
    for (std::size_t j = r.begin; j < r.end; ++j) {
      temporal_combine(tt, v, j, s1);
      temporal_combine(ntr, v, j, s2);
      auto o = out.column(j);
      spmv(system.spatial->mass, s1, o);
      csr_matvec_add(system.spatial->stiffness, s2, o);
    }
  });
  return out;
}

RightHandSide assemble_rhs(const SpaceTimeSystem& system, const ProblemData& problem, ColumnExecutor& exec) {
  const std::size_t nx = system.n_space();
  const std::size_t nt = system.n_time();
  RightHandSide rhs{SpaceTimeVector(nx, nt), SpaceTimeVector(nx, nt), SpaceTimeVector(nx, nt)};
  const MeshLevel& mesh = system.mesh();

  if (problem.forcing) {
    const SpaceTimeVector load = assemble_load(mesh, system.config.time_level, problem.forcing);
    rhs.forcing_part = apply_BT_KY(system, load, exec);
  }
  if (problem.initial) {
    const std::vector<double> u0 = project_initial(mesh, problem.initial);
    const auto& phi0 = system.temporal->trace_start;
    for (std::size_t j = 0; j < nt; ++j) {
      if (phi0[j] == 0.0) continue;
      auto c = rhs.initial_part.column(j);
      for (std::size_t i = 0; i < nx; ++i) c[i] = phi0[j] * u0[i];
    }
  }
  SpaceTimeVector f(nx, nt);
  exec.for_each_range(nt, [&](std::size_t, ColumnRange r) {
    copy_columns(rhs.forcing_part, f, r);
    for (std::size_t j = r.begin; j < r.end; ++j) {
      auto o = f.column(j);
      const auto a = rhs.initial_part.column(j);
      for (std::size_t i = 0; i < nx; ++i) o[i] += a[i];
    }
  });
  system.wavelet->apply_transpose(f, rhs.f_hat, exec);
  return rhs;
}

RightHandSide assemble_rhs(const SpaceTimeSystem& system, const ProblemData& problem) {
  SerialExecutor serial;
  return assemble_rhs(system, problem, serial);
}

}  // namespace spacetime
