#include "spacetime/temporal.hpp"

#include <cmath>
#include <stdexcept>

namespace spacetime {

namespace {

TemporalDiscretization make_disc(int level) {
  if (level < 0 || level > 30) throw std::invalid_argument("temporal level out of range");
  return TemporalDiscretization{level};
}

}  // namespace

TemporalMatrices assemble_temporal_trial(int level) {
  const auto disc = make_disc(level);
  const std::size_t n = disc.n_dofs();
  const double h = disc.mesh_width();

  std::vector<Triplet> m, a, l;
  for (std::size_t e = 0; e < disc.n_elements(); ++e) {
    const std::size_t idx[2] = {e, e + 1};
    const double slope[2] = {-1.0 / h, 1.0 / h};
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        m.push_back({idx[p], idx[q], h / 6.0 * (p == q ? 2.0 : 1.0)});
        a.push_back({idx[p], idx[q], slope[p] * slope[q] * h});
        // int phi_q' phi_p over the element; each hat integrates to h/2.
        l.push_back({idx[p], idx[q], slope[q] * h / 2.0});
      }
    }
  }

  TemporalMatrices out;
  out.mass = SparseMatrix::from_triplets(n, n, std::move(m));
  out.stiffness = SparseMatrix::from_triplets(n, n, std::move(a));
  out.derivative = SparseMatrix::from_triplets(n, n, std::move(l));
  out.derivative_t = out.derivative.transpose();
  out.trace_start = evaluate_trace(level, 0.0);
  out.trace_end = evaluate_trace(level, 1.0);
  out.initial_trace = SparseMatrix::from_triplets(n, n, {{0, 0, 1.0}});
  return out;
}

TestMatrices assemble_temporal_test(int level) {
  const auto disc = make_disc(level);
  const std::size_t n_trial = disc.n_dofs();
  const std::size_t n_test = 2 * disc.n_elements();
  const double h = disc.mesh_width();
  const double sqrt_h = std::sqrt(h);

  std::vector<Triplet> t, nm;
  for (std::size_t e = 0; e < disc.n_elements(); ++e) {
    const std::size_t xi0 = 2 * e;
    const std::size_t xi1 = 2 * e + 1;
    // xi0 = 1/sqrt(h), xi1 = sqrt(3/h) (2s - 1) in the local coordinate s.
    t.push_back({xi0, e, -1.0 / sqrt_h});
    t.push_back({xi0, e + 1, 1.0 / sqrt_h});
    nm.push_back({xi0, e, sqrt_h / 2.0});
    nm.push_back({xi0, e + 1, sqrt_h / 2.0});
    const double odd = std::sqrt(3.0 * h) / 6.0;
    nm.push_back({xi1, e, -odd});
    nm.push_back({xi1, e + 1, odd});
  }

  TestMatrices out;
  out.gram_inverse_diagonal.assign(n_test, 1.0);
  std::vector<double> ones(n_test, 1.0);
  out.gram = SparseMatrix::diagonal(ones);
  out.derivative = SparseMatrix::from_triplets(n_test, n_trial, std::move(t));
  out.mass = SparseMatrix::from_triplets(n_test, n_trial, std::move(nm));
  return out;
}

std::vector<double> evaluate_trace(int level, double t) {
  const auto disc = make_disc(level);
  std::vector<double> v(disc.n_dofs(), 0.0);
  if (t == 0.0) {
    v.front() = 1.0;
  } else if (t == 1.0) {
    v.back() = 1.0;
  } else {
    throw std::invalid_argument("evaluate_trace: t must be an endpoint of [0, 1]");
  }
  return v;
}

double hat_function(int level, std::size_t index, double t) {
  const auto disc = make_disc(level);
  if (index >= disc.n_dofs()) throw std::out_of_range("hat_function: index");
  const double x = t * static_cast<double>(disc.n_elements()) - static_cast<double>(index);
  return std::max(0.0, 1.0 - std::abs(x));
}

double test_function(int level, std::size_t index, double t) {
  const auto disc = make_disc(level);
  if (index >= 2 * disc.n_elements()) throw std::out_of_range("test_function: index");
  const std::size_t e = index / 2;
  const double h = disc.mesh_width();
  const double a = static_cast<double>(e) * h;
  if (t < a || t > a + h) return 0.0;
  if (index % 2 == 0) return 1.0 / std::sqrt(h);
  const double s = (t - a) / h;
  return std::sqrt(3.0 / h) * (2.0 * s - 1.0);
}

}  // namespace spacetime
