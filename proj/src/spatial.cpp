#include "spacetime/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "spacetime/temporal.hpp"

namespace spacetime {

// ---------------------------------------------------------------------------
// Quadrature

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map from [-1, 1] to [0, 1].
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes[a] < nodes[b]; });
  std::vector<double> sn, sw;
  for (auto o : order) {
    sn.push_back(nodes[o]);
    sw.push_back(weights[o]);
  }
  nodes = std::move(sn);
  weights = std::move(sw);
}

SimplexQuadrature simplex_quadrature(int dim, int n) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("simplex_quadrature: dim must be 1, 2 or 3");
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  SimplexQuadrature q;
  q.dim = dim;
  auto push = [&](double a, double b, double c, double weight) {
    std::array<double, 4> bary{1.0 - a - b - c, a, b, c};
    q.bary.push_back(bary);
    q.weights.push_back(weight);
  };
  const std::size_t m = x.size();
  if (dim == 1) {
    for (std::size_t i = 0; i < m; ++i) push(x[i], 0, 0, w[i]);
  } else if (dim == 2) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) push(x[i], (1 - x[i]) * x[j], 0, w[i] * w[j] * (1 - x[i]));
  } else {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) {
          const double u = x[i], v = x[j], s = x[k];
          push(u, (1 - u) * v, (1 - u) * (1 - v) * s, w[i] * w[j] * w[k] * (1 - u) * (1 - u) * (1 - v));
        }
  }
  return q;
}

// ---------------------------------------------------------------------------
// Meshes

namespace {

long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

double simplex_measure(const Simplex& s) {
  const int d = s.dim;
  Eigen::Matrix3d b = Eigen::Matrix3d::Identity();
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) b(r, c) = s.vertex[static_cast<std::size_t>(c + 1)][static_cast<std::size_t>(r)] - s.vertex[0][static_cast<std::size_t>(r)];
  const double det = std::abs(b.topLeftCorner(d, d).determinant());
  double fact = 1.0;
  for (int i = 2; i <= d; ++i) fact *= i;
  return det / fact;
}

}  // namespace

MeshLevel::MeshLevel(int dim, int level) : dim_(dim), level_(level) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("MeshLevel: dim must be 1, 2 or 3");
  if (level < 0 || level > 20) throw std::invalid_argument("MeshLevel: level out of range");
  n_ = 1L << level;
  n_interior_ = static_cast<std::size_t>(ipow(n_ - 1, dim));
}

std::size_t MeshLevel::n_simplices() const {
  std::size_t fact = 1;
  for (int i = 2; i <= dim_; ++i) fact *= static_cast<std::size_t>(i);
  return static_cast<std::size_t>(ipow(n_, dim_)) * fact;
}

std::optional<std::size_t> MeshLevel::interior_index(const GridIndex& g) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int a = 0; a < dim_; ++a) {
    const long v = g[static_cast<std::size_t>(a)];
    if (v <= 0 || v >= n_) return std::nullopt;
    idx += static_cast<std::size_t>(v - 1) * stride;
    stride *= static_cast<std::size_t>(n_ - 1);
  }
  return idx;
}

GridIndex MeshLevel::interior_grid(std::size_t idx) const {
  GridIndex g{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    g[static_cast<std::size_t>(a)] = static_cast<long>(idx % static_cast<std::size_t>(n_ - 1)) + 1;
    idx /= static_cast<std::size_t>(n_ - 1);
  }
  return g;
}

Point MeshLevel::interior_vertex(std::size_t idx) const {
  const auto g = interior_grid(idx);
  Point p{0, 0, 0};
  for (int a = 0; a < dim_; ++a) p[static_cast<std::size_t>(a)] = static_cast<double>(g[static_cast<std::size_t>(a)]) * mesh_width();
  return p;
}

void MeshLevel::cell_simplices(const GridIndex& corner, const std::function<void(const Simplex&)>& fn) const {
  std::array<int, 3> perm{0, 1, 2};
  const double h = mesh_width();
  do {
    Simplex s;
    s.dim = dim_;
    GridIndex g = corner;
    for (int v = 0; v <= dim_; ++v) {
      if (v > 0) ++g[static_cast<std::size_t>(perm[static_cast<std::size_t>(v - 1)])];
      Point p{0, 0, 0};
      for (int a = 0; a < dim_; ++a) p[static_cast<std::size_t>(a)] = static_cast<double>(g[static_cast<std::size_t>(a)]) * h;
      s.vertex[static_cast<std::size_t>(v)] = p;
      s.dof[static_cast<std::size_t>(v)] = interior_index(g).value_or(kBoundary);
    }
    fn(s);
  } while (std::next_permutation(perm.begin(), perm.begin() + dim_));
}

void MeshLevel::for_each_simplex(const std::function<void(const Simplex&)>& fn) const {
  const long nz = dim_ >= 3 ? n_ : 1;
  const long ny = dim_ >= 2 ? n_ : 1;
  for (long k = 0; k < nz; ++k)
    for (long j = 0; j < ny; ++j)
      for (long i = 0; i < n_; ++i) cell_simplices({i, j, k}, fn);
}

MeshHierarchy::MeshHierarchy(int dim, int finest_level) : dim_(dim), finest_(finest_level) {
  if (finest_level < 1) throw std::invalid_argument("MeshHierarchy: finest level must be >= 1");
  for (int k = 1; k <= finest_level; ++k) levels_.emplace_back(dim, k);
  prolongations_.resize(static_cast<std::size_t>(finest_level + 1));
  restrictions_.resize(static_cast<std::size_t>(finest_level + 1));
  for (int k = 2; k <= finest_level; ++k) {
    prolongations_[static_cast<std::size_t>(k)] = build_prolongation(*this, k);
    restrictions_[static_cast<std::size_t>(k)] = prolongations_[static_cast<std::size_t>(k)].transpose();
  }
}

const SparseMatrix& MeshHierarchy::prolongation(int k) const {
  if (k < 2 || k > finest_) throw std::out_of_range("MeshHierarchy::prolongation: level");
  return prolongations_[static_cast<std::size_t>(k)];
}

const SparseMatrix& MeshHierarchy::restriction(int k) const {
  if (k < 2 || k > finest_) throw std::out_of_range("MeshHierarchy::restriction: level");
  return restrictions_[static_cast<std::size_t>(k)];
}

MeshHierarchy build_mesh_hierarchy(int dim, int finest_level) { return MeshHierarchy(dim, finest_level); }

SparseMatrix build_prolongation(const MeshHierarchy& hierarchy, int k) {
  if (k < 1 || k > hierarchy.finest_level()) throw std::out_of_range("build_prolongation: level");
  const MeshLevel& fine = hierarchy.level(k);
  const int d = hierarchy.dim();
  if (k == 1) return SparseMatrix(fine.n_interior(), 0, std::vector<std::size_t>(fine.n_interior() + 1, 0), {}, {});
  const MeshLevel& coarse = hierarchy.level(k - 1);

  std::vector<Triplet> t;
  for (std::size_t i = 0; i < fine.n_interior(); ++i) {
    const GridIndex g = fine.interior_grid(i);
    // A fine vertex is either a coarse vertex or the midpoint of the Kuhn edge
    // from floor(g/2) along the directions in which g is odd.
    GridIndex lo{0, 0, 0}, hi{0, 0, 0};
    bool odd = false;
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      lo[ua] = g[ua] / 2;
      hi[ua] = (g[ua] + 1) / 2;
      odd = odd || (g[ua] % 2 != 0);
    }
    if (!odd) {
      t.push_back({i, *coarse.interior_index(lo), 1.0});
    } else {
      if (auto c = coarse.interior_index(lo)) t.push_back({i, *c, 0.5});
      if (auto c = coarse.interior_index(hi)) t.push_back({i, *c, 0.5});
    }
  }
  return SparseMatrix::from_triplets(fine.n_interior(), coarse.n_interior(), std::move(t));
}

// ---------------------------------------------------------------------------
// Assembly

Coefficients Coefficients::heat(int dim) {
  Coefficients c;
  c.dim = dim;
  c.diffusion.fill(0.0);
  for (int i = 0; i < dim; ++i) c.diffusion[static_cast<std::size_t>(i * dim + i)] = 1.0;
  c.reaction = 0.0;
  return c;
}

void validate_coefficients(const Coefficients& coeffs) {
  const int d = coeffs.dim;
  if (d < 1 || d > 3) throw std::invalid_argument("Coefficients: dim must be 1, 2 or 3");
  if (!(coeffs.reaction >= 0.0)) throw std::invalid_argument("Coefficients: reaction must be >= 0");
  Eigen::MatrixXd dm(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) dm(i, j) = coeffs.d(i, j);
  if ((dm - dm.transpose()).cwiseAbs().maxCoeff() > 1e-14 * dm.cwiseAbs().maxCoeff())
    throw std::invalid_argument("Coefficients: diffusion matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(dm);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("Coefficients: diffusion matrix is not positive definite");
}

void element_matrices(const Simplex& s, const Coefficients& coeffs, DenseMatrix& mass, DenseMatrix& stiffness) {
  const int d = s.dim;
  const int nv = d + 1;
  Eigen::MatrixXd b(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r)
      b(r, c) = s.vertex[static_cast<std::size_t>(c + 1)][static_cast<std::size_t>(r)] - s.vertex[0][static_cast<std::size_t>(r)];
  const double vol = simplex_measure(s);
  // Row a of grad holds grad(lambda_a).
  Eigen::MatrixXd grad(nv, d);
  const Eigen::MatrixXd binv = b.inverse();
  grad.bottomRows(d) = binv;
  grad.row(0) = -binv.colwise().sum();
  Eigen::MatrixXd dm(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) dm(i, j) = coeffs.d(i, j);

  mass.resize(nv, nv);
  const double mscale = vol / ((d + 1.0) * (d + 2.0));
  for (int a = 0; a < nv; ++a)
    for (int c = 0; c < nv; ++c) mass(a, c) = mscale * (a == c ? 2.0 : 1.0);
  stiffness = vol * grad * dm * grad.transpose() + coeffs.reaction * mass;
}

SpatialMatrices assemble_spatial(const MeshLevel& mesh, const Coefficients& coeffs) {
  validate_coefficients(coeffs);
  if (coeffs.dim != mesh.dim()) throw std::invalid_argument("assemble_spatial: dimension mismatch");
  const int d = mesh.dim();

  // Every interior vertex of a uniform constant-coefficient mesh has the same
  // stencil. Build it once from the 2^d cells around a reference vertex, then
  // drop couplings to Dirichlet vertices row by row.
  std::map<GridIndex, std::pair<double, double>> stencil;  // offset -> (mass, stiffness)
  const MeshLevel& patch = mesh;
  GridIndex center{0, 0, 0};
  for (int a = 0; a < d; ++a) center[static_cast<std::size_t>(a)] = 1;
  const long nz = d >= 3 ? 2 : 1;
  const long ny = d >= 2 ? 2 : 1;
  DenseMatrix me, ke;
  for (long k = 0; k < nz; ++k)
    for (long j = 0; j < ny; ++j)
      for (long i = 0; i < 2; ++i) {
        patch.cell_simplices({i, j, k}, [&](const Simplex& s) {
          element_matrices(s, coeffs, me, ke);
          const double h = patch.mesh_width();
          auto grid_of = [&](int v) {
            GridIndex g{0, 0, 0};
            for (int a = 0; a < d; ++a)
              g[static_cast<std::size_t>(a)] = std::lround(s.vertex[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)] / h);
            return g;
          };
          for (int a = 0; a <= d; ++a) {
            if (grid_of(a) != center) continue;
            for (int c = 0; c <= d; ++c) {
              GridIndex off = grid_of(c);
              for (int x = 0; x < d; ++x) off[static_cast<std::size_t>(x)] -= center[static_cast<std::size_t>(x)];
              auto& e = stencil[off];
              e.first += me(a, c);
              e.second += ke(a, c);
            }
          }
        });
      }
  const std::size_t n = mesh.n_interior();
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> mv, kv;
  cols.reserve(n * stencil.size());
  mv.reserve(n * stencil.size());
  kv.reserve(n * stencil.size());
  std::vector<std::pair<std::size_t, std::pair<double, double>>> row;
  for (std::size_t i = 0; i < n; ++i) {
    const GridIndex g = mesh.interior_grid(i);
    row.clear();
    for (const auto& [off, e] : stencil) {
      if (e.first == 0.0 && e.second == 0.0) continue;
      GridIndex nb = g;
      for (int a = 0; a < d; ++a) nb[static_cast<std::size_t>(a)] += off[static_cast<std::size_t>(a)];
      if (auto j = mesh.interior_index(nb)) row.push_back({*j, e});
    }
    std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [j, e] : row) {
      cols.push_back(j);
      mv.push_back(e.first);
      kv.push_back(e.second);
    }
    offsets[i + 1] = cols.size();
  }
  SpatialMatrices out;
  out.mass = SparseMatrix(n, n, offsets, cols, std::move(mv));
  out.stiffness = SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(kv));
  return out;
}

// ---------------------------------------------------------------------------
// Data vectors

namespace {

Point map_point(const Simplex& s, const std::array<double, 4>& bary) {
  Point p{0, 0, 0};
  for (int v = 0; v <= s.dim; ++v)
    for (int a = 0; a < 3; ++a)
      p[static_cast<std::size_t>(a)] += bary[static_cast<std::size_t>(v)] * s.vertex[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)];
  return p;
}

double jacobian(const Simplex& s) {
  double fact = 1.0;
  for (int i = 2; i <= s.dim; ++i) fact *= i;
  return simplex_measure(s) * fact;
}

}  // namespace

std::vector<double> project_initial(const MeshLevel& mesh, const InitialDatum& u0, int points_per_direction) {
  std::vector<double> out(mesh.n_interior(), 0.0);
  if (!u0) return out;
  const auto q = simplex_quadrature(mesh.dim(), points_per_direction);
  mesh.for_each_simplex([&](const Simplex& s) {
    const double jac = jacobian(s);
    for (std::size_t p = 0; p < q.weights.size(); ++p) {
      const double f = u0(map_point(s, q.bary[p])) * q.weights[p] * jac;
      for (int v = 0; v <= s.dim; ++v) {
        const auto dof = s.dof[static_cast<std::size_t>(v)];
        if (dof != kBoundary) out[dof] += f * q.bary[p][static_cast<std::size_t>(v)];
      }
    }
  });
  return out;
}

std::vector<double> interpolate(const MeshLevel& mesh, const InitialDatum& f) {
  std::vector<double> out(mesh.n_interior());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(mesh.interior_vertex(i));
  return out;
}

SpaceTimeVector assemble_load(const MeshLevel& mesh, int time_level, const SpaceTimeFunction& g,
                              int points_per_direction) {
  const TemporalDiscretization tdisc{time_level};
  SpaceTimeVector out(mesh.n_interior(), 2 * tdisc.n_elements(), 0.0);
  if (!g) return out;
  std::vector<double> tn, tw;
  gauss_legendre(points_per_direction, tn, tw);
  const double ht = tdisc.mesh_width();
  for (std::size_t e = 0; e < tdisc.n_elements(); ++e) {
    for (std::size_t q = 0; q < tn.size(); ++q) {
      const double t = (static_cast<double>(e) + tn[q]) * ht;
      const auto slice = project_initial(mesh, [&](const Point& x) { return g(t, x); }, points_per_direction);
      for (std::size_t k = 0; k < 2; ++k) {
        const std::size_t xi = 2 * e + k;
        const double wt = tw[q] * ht * test_function(time_level, xi, t);
        auto col = out.column(xi);
        for (std::size_t i = 0; i < slice.size(); ++i) col[i] += wt * slice[i];
      }
    }
  }
  return out;
}

double l2_error(const MeshLevel& mesh, std::span<const double> coeffs, const InitialDatum& f,
                int points_per_direction) {
  if (coeffs.size() != mesh.n_interior()) throw std::invalid_argument("l2_error: coefficient length mismatch");
  const auto q = simplex_quadrature(mesh.dim(), points_per_direction);
  double sum = 0.0;
  mesh.for_each_simplex([&](const Simplex& s) {
    const double jac = jacobian(s);
    for (std::size_t p = 0; p < q.weights.size(); ++p) {
      double uh = 0.0;
      for (int v = 0; v <= s.dim; ++v) {
        const auto dof = s.dof[static_cast<std::size_t>(v)];
        if (dof != kBoundary) uh += coeffs[dof] * q.bary[p][static_cast<std::size_t>(v)];
      }
      const double diff = uh - (f ? f(map_point(s, q.bary[p])) : 0.0);
      sum += diff * diff * q.weights[p] * jac;
    }
  });
  return std::sqrt(sum);
}

}  // namespace spacetime
