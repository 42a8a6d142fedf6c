#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's assembly or transform code; only plain Eigen and closed forms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spacetime/linalg.hpp"

namespace oracle {

using Dense = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Dense kron(const Dense& a, const Dense& b) {
  Dense out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Dense random_dense(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double density = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> keep(0.0, 1.0);
  Dense m = Dense::Zero(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      if (keep(rng) < density) m(i, j) = u(rng);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline spacetime::SpaceTimeVector random_st(std::size_t nx, std::size_t nt, std::mt19937_64& rng) {
  return spacetime::SpaceTimeVector(nx, nt, random_vector(nx * nt, rng));
}

inline Vec to_vec(const spacetime::SpaceTimeVector& v) {
  return Eigen::Map<const Vec>(v.data().data(), static_cast<Eigen::Index>(v.size()));
}

inline double rel_diff(const Dense& a, const Dense& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return scale == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / scale;
}

// ---------------------------------------------------------------------------
// Temporal: hats on a uniform mesh and the per-element Legendre test basis,
// integrated with 5-point Gauss-Legendre per element.

inline const std::array<std::pair<double, double>, 5>& gauss5() {
  static const std::array<std::pair<double, double>, 5> rule = [] {
    const double a = 1.0 / 3.0 * std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0));
    const double b = 1.0 / 3.0 * std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0));
    const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    // Mapped from [-1, 1] to [0, 1].
    return std::array<std::pair<double, double>, 5>{{{0.5 * (1 - b), 0.5 * wb},
                                                     {0.5 * (1 - a), 0.5 * wa},
                                                     {0.5, 0.5 * 128.0 / 225.0},
                                                     {0.5 * (1 + a), 0.5 * wa},
                                                     {0.5 * (1 + b), 0.5 * wb}}};
  }();
  return rule;
}

struct TemporalOracle {
  Dense mass, stiffness, derivative, gram, test_derivative, test_mass;
};

// (i, j) = int f_j g_i over (0, 1) for trial index j and test index i.
inline TemporalOracle temporal(int level) {
  const int ne = 1 << level;
  const int nt = ne + 1;
  const double h = 1.0 / ne;
  auto hat = [&](int i, double t) { return std::max(0.0, 1.0 - std::abs(t / h - i)); };
  auto dhat = [&](int i, int e, double) {
    if (i == e) return -1.0 / h;
    if (i == e + 1) return 1.0 / h;
    return 0.0;
  };
  auto xi = [&](int k, double t) {
    const int e = k / 2;
    const double s = t / h - e;
    if (s < 0.0 || s > 1.0) return 0.0;
    return k % 2 == 0 ? 1.0 / std::sqrt(h) : std::sqrt(3.0 / h) * (2.0 * s - 1.0);
  };
  TemporalOracle o;
  o.mass = Dense::Zero(nt, nt);
  o.stiffness = Dense::Zero(nt, nt);
  o.derivative = Dense::Zero(nt, nt);
  o.gram = Dense::Zero(2 * ne, 2 * ne);
  o.test_derivative = Dense::Zero(2 * ne, nt);
  o.test_mass = Dense::Zero(2 * ne, nt);
  for (int e = 0; e < ne; ++e) {
    for (const auto& [s, w] : gauss5()) {
      const double t = (e + s) * h;
      const double wt = w * h;
      for (int i = e; i <= e + 1; ++i)
        for (int j = e; j <= e + 1; ++j) {
          o.mass(i, j) += wt * hat(i, t) * hat(j, t);
          o.stiffness(i, j) += wt * dhat(i, e, t) * dhat(j, e, t);
          o.derivative(i, j) += wt * dhat(j, e, t) * hat(i, t);
        }
      for (int k = 2 * e; k <= 2 * e + 1; ++k) {
        for (int l = 2 * e; l <= 2 * e + 1; ++l) o.gram(k, l) += wt * xi(k, t) * xi(l, t);
        for (int j = e; j <= e + 1; ++j) {
          o.test_derivative(k, j) += wt * dhat(j, e, t) * xi(k, t);
          o.test_mass(k, j) += wt * hat(j, t) * xi(k, t);
        }
      }
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// Spatial: brute-force P1 assembly on the Kuhn triangulation, all vertices
// first, Dirichlet rows/columns removed afterwards.

struct SpatialOracle {
  Dense mass, stiffness;
  std::vector<std::array<double, 3>> points;  // interior vertices in library order
};

inline SpatialOracle spatial(int dim, int level, const Dense& diffusion, double reaction) {
  const long n = 1L << level;
  const long nv = n + 1;
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= nv;
  auto vid = [&](const std::array<long, 3>& g) {
    long id = 0;
    for (int i = dim - 1; i >= 0; --i) id = id * nv + g[static_cast<std::size_t>(i)];
    return id;
  };
  Dense m = Dense::Zero(total, total), a = Dense::Zero(total, total);
  const double h = 1.0 / static_cast<double>(n);
  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.begin() + dim));
  double fact = 1.0;
  for (int i = 2; i <= dim; ++i) fact *= i;
  const double vol = std::pow(h, dim) / fact;

  long cells = 1;
  for (int i = 0; i < dim; ++i) cells *= n;
  for (long c = 0; c < cells; ++c) {
    std::array<long, 3> corner{0, 0, 0};
    long rem = c;
    for (int i = 0; i < dim; ++i) {
      corner[static_cast<std::size_t>(i)] = rem % n;
      rem /= n;
    }
    for (const auto& p : perms) {
      std::vector<std::array<long, 3>> verts{corner};
      for (int k = 0; k < dim; ++k) {
        auto v = verts.back();
        ++v[static_cast<std::size_t>(p[static_cast<std::size_t>(k)])];
        verts.push_back(v);
      }
      // Gradients of barycentric coordinates: rows of inv(E)^T with E the edge matrix.
      Dense e(dim, dim);
      for (int k = 0; k < dim; ++k)
        for (int r = 0; r < dim; ++r)
          e(r, k) = h * static_cast<double>(verts[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(r)] -
                                            verts[0][static_cast<std::size_t>(r)]);
      const Dense einv = e.inverse();
      Dense grads(dim + 1, dim);
      for (int k = 0; k < dim; ++k) grads.row(k + 1) = einv.row(k);
      grads.row(0) = -grads.bottomRows(dim).colwise().sum();
      for (int i = 0; i <= dim; ++i)
        for (int j = 0; j <= dim; ++j) {
          const long gi = vid(verts[static_cast<std::size_t>(i)]);
          const long gj = vid(verts[static_cast<std::size_t>(j)]);
          const double mij = vol * (i == j ? 2.0 : 1.0) / ((dim + 1) * (dim + 2));
          m(gi, gj) += mij;
          a(gi, gj) += vol * grads.row(i).dot(diffusion * grads.row(j).transpose()) + reaction * mij;
        }
    }
  }
  std::vector<long> interior;
  SpatialOracle o;
  for (long id = 0; id < total; ++id) {
    long rem = id;
    bool inside = true;
    std::array<double, 3> pt{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
      const long g = rem % nv;
      rem /= nv;
      if (g == 0 || g == n) inside = false;
      pt[static_cast<std::size_t>(i)] = static_cast<double>(g) * h;
    }
    if (inside) {
      interior.push_back(id);
      o.points.push_back(pt);
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior.size());
  o.mass.resize(ni, ni);
  o.stiffness.resize(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < ni; ++j) {
      o.mass(i, j) = m(interior[static_cast<std::size_t>(i)], interior[static_cast<std::size_t>(j)]);
      o.stiffness(i, j) = a(interior[static_cast<std::size_t>(i)], interior[static_cast<std::size_t>(j)]);
    }
  return o;
}

inline SpatialOracle heat_spatial(int dim, int level) { return spatial(dim, level, Dense::Identity(dim, dim), 0.0); }

// ---------------------------------------------------------------------------
// Wavelets evaluated as functions: nodal values on the level-J grid of every
// basis function, ordered coarse to fine. This is W_J column by column.

inline Dense wavelet_nodal(int J) {
  const int nf = (1 << J) + 1;
  const double hf = 1.0 / (nf - 1);
  auto hat = [](int level, int i, double t) {
    const double h = std::ldexp(1.0, -level);
    return std::max(0.0, 1.0 - std::abs(t / h - i));
  };
  Dense w = Dense::Zero(nf, nf);
  int col = 0;
  for (int r = 0; r < nf; ++r) w(r, col) = hat(0, 0, r * hf);
  ++col;
  for (int r = 0; r < nf; ++r) w(r, col) = hat(0, 1, r * hf);
  ++col;
  for (int l = 1; l <= J; ++l) {
    const int count = 1 << (l - 1);
    const double scale = std::pow(2.0, l / 2.0);
    for (int k = 0; k < count; ++k) {
      const int c = 2 * k + 1;
      const double left = (k == 0) ? -1.0 : -0.5;
      const double right = (k == count - 1) ? -1.0 : -0.5;
      for (int r = 0; r < nf; ++r) {
        const double t = r * hf;
        w(r, col) = scale * (hat(l, c, t) + left * hat(l, c - 1, t) + right * hat(l, c + 1, t));
      }
      ++col;
    }
  }
  return w;
}

// Lemma-2 Schur matrix from dense factors and exact K = A_x^{-1}:
// A_t (x) M K M + M_t (x) A K A + L^T (x) M K A + L (x) A K M + Gamma_0 (x) M.
inline Dense schur_dense(const TemporalOracle& t, const SpatialOracle& s) {
  const Dense k = s.stiffness.inverse();
  const Dense& m = s.mass;
  const Dense& a = s.stiffness;
  Dense g0 = Dense::Zero(t.mass.rows(), t.mass.cols());
  g0(0, 0) = 1.0;
  return kron(t.stiffness, m * k * m) + kron(t.mass, a * k * a) + kron(t.derivative.transpose(), m * k * a) +
         kron(t.derivative, a * k * m) + kron(g0, m);
}

// blockdiag over wavelet columns of C_l A C_l, C_l = (alpha A + 2^l M)^{-1}.
inline Dense kx_dense(int J, const SpatialOracle& s, double alpha) {
  const int nt = (1 << J) + 1;
  const auto nx = s.mass.rows();
  Dense out = Dense::Zero(nt * nx, nt * nx);
  std::vector<int> level{0, 0};
  for (int l = 1; l <= J; ++l) level.insert(level.end(), static_cast<std::size_t>(1 << (l - 1)), l);
  for (int j = 0; j < nt; ++j) {
    const Dense c = (alpha * s.stiffness + std::ldexp(1.0, level[static_cast<std::size_t>(j)]) * s.mass).inverse();
    out.block(j * nx, j * nx, nx, nx) = c * s.stiffness * c;
  }
  return out;
}

inline Eigen::VectorXd generalized_eigenvalues(const Dense& a, const Dense& b_inverse_form) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Dense> es(a, b_inverse_form);
  return es.eigenvalues();
}

}  // namespace oracle
