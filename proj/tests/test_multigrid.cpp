#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spacetime/multigrid.hpp"

using namespace spacetime;

namespace {

std::shared_ptr<const LevelMatrices> levels(int dim, int K) {
  return std::make_shared<LevelMatrices>(std::make_shared<MeshHierarchy>(dim, K), Coefficients::heat(dim));
}

SparseMatrix shifted(const SpatialMatrices& m, double alpha, double mu) { return add(m.stiffness, m.mass, alpha, mu); }

}  // namespace

TEST_SUITE("multigrid") {

TEST_CASE("zero right-hand side") {
  const MultigridSolver mg(levels(2, 4), 1.0, 0.0);
  const std::vector<double> b(mg.rows(), 0.0);
  for (double v : mg(b)) CHECK(v == 0.0);
  CHECK_THROWS(mg(std::vector<double>(mg.rows() + 1)));
}

TEST_CASE("induced operator is symmetric") {
  std::mt19937_64 rng(4);
  for (double mu : {0.0, 64.0}) {
    const MultigridSolver mg(levels(2, 4), mu == 0.0 ? 1.0 : 0.3, mu);
    for (int trial = 0; trial < 50; ++trial) {
      const auto b1 = oracle::random_vector(mg.rows(), rng);
      const auto b2 = oracle::random_vector(mg.rows(), rng);
      const auto x1 = mg(b1), x2 = mg(b2);
      double l = 0.0, r = 0.0;
      for (std::size_t i = 0; i < b1.size(); ++i) {
        l += x1[i] * b2[i];
        r += b1[i] * x2[i];
      }
      CHECK(std::abs(l - r) <= 1e-12 * std::abs(l));
    }
  }
}

TEST_CASE("single level is the direct solve") {
  auto lv = levels(2, 1);
  const MultigridSolver mg(lv, 0.3, 2.0);
  const DenseMatrix a = shifted(lv->finest(), 0.3, 2.0).to_dense();
  const std::vector<double> b{1.5};
  CHECK(mg(b)[0] == doctest::Approx(1.5 / a(0, 0)).epsilon(1e-15));

  auto lv1 = levels(1, 1);
  const MultigridSolver mg1(lv1, 1.0, 0.0);
  CHECK(mg1(std::vector<double>{2.0})[0] == doctest::Approx(2.0 / lv1->finest().stiffness.at(0, 0)));
}

TEST_CASE("exact inverse has unit condition") {
  auto lv = levels(2, 3);
  const SparseMatrix a = shifted(lv->finest(), 0.3, 8.0);
  const auto r = spectral_report(DirectSolver(a), a);
  CHECK(r.kappa == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral report rejects non-SPD input") {
  const SparseMatrix a = SparseMatrix::identity(3);
  const SparseMatrix nonsym = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {0, 1, 0.5}, {1, 1, 1.0}, {2, 2, 1.0}});
  CHECK_THROWS(spectral_report(MatrixOperator(nonsym), a));
  const SparseMatrix indef = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, -1.0}, {2, 2, 1.0}});
  CHECK_THROWS(spectral_report(MatrixOperator(indef), a));
}

TEST_CASE("V-cycle quality for the Laplacian at K = 5") {
  auto lv = levels(2, 5);
  const MultigridSolver mg(lv, 1.0, 0.0);
  const auto r = spectral_report(mg, lv->finest().stiffness);
  CHECK(r.lambda_min >= 0.8);
  CHECK(r.lambda_max <= 1.25);
  CHECK(r.kappa <= 1.6);
}

TEST_CASE("robust in the reaction parameter") {
  auto lv = levels(2, 4);
  std::vector<double> kappa;
  for (int j = 0; j <= 12; ++j) {
    const double mu = std::ldexp(1.0, j);
    kappa.push_back(spectral_report(MultigridSolver(lv, 0.3, mu), shifted(lv->finest(), 0.3, mu)).kappa);
  }
  const auto [lo, hi] = std::minmax_element(kappa.begin(), kappa.end());
  CHECK(*hi / *lo <= 1.5);
}

TEST_CASE("robust in the mesh level") {
  std::vector<double> kappa;
  for (int K = 2; K <= 5; ++K) {
    auto lv = levels(2, K);
    kappa.push_back(spectral_report(MultigridSolver(lv, 1.0, 0.0), lv->finest().stiffness).kappa);
    CHECK(kappa.back() <= 1.6);
  }
  for (std::size_t i = 1; i < kappa.size(); ++i) CHECK(kappa[i] <= 1.1 * kappa[i - 1] + 0.05);
}

TEST_CASE("work is linear in the number of unknowns") {
  for (int dim : {1, 2, 3}) {
    std::vector<double> work, size;
    const int top = dim == 3 ? 6 : 8;
    for (int K = top - 2; K <= top; ++K) {
      const MultigridSolver mg(levels(dim, K), 0.3, 4.0);
      const std::vector<double> b(mg.rows(), 1.0);
      flops::reset();
      (void)mg(b);
      work.push_back(static_cast<double>(flops::count()));
      size.push_back(static_cast<double>(mg.rows()));
    }
    for (std::size_t i = 1; i < work.size(); ++i) {
      CAPTURE(dim);
      const double ratio = work[i] / work[i - 1];
      if (dim == 1) CHECK(ratio <= 2.3);
      if (dim == 2) CHECK(ratio <= 4.3);
      // Work per unknown stays flat.
      CHECK(ratio <= 1.15 * size[i] / size[i - 1]);
    }
  }
}

TEST_CASE("sandwich operator") {
  auto lv = levels(1, 3);
  const SparseMatrix a = lv->finest().stiffness;
  auto c = std::make_shared<DirectSolver>(shifted(lv->finest(), 0.3, 4.0));
  const SandwichOperator s(c, a);
  const DenseMatrix cd = shifted(lv->finest(), 0.3, 4.0).to_dense().inverse();
  CHECK(oracle::rel_diff(dense_materialize(s), cd * a.to_dense() * cd) <= 1e-13);
}

}  // TEST_SUITE
