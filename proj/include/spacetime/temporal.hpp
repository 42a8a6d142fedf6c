#pragma once

#include <cstddef>
#include <vector>

#include "spacetime/linalg.hpp"

namespace spacetime {

// Matrix orientation used throughout: for function tuples Phi (trial) and
// Psi (test), <Phi, Psi> has entry (i, j) = integral of phi_j * psi_i, i.e.
// rows index the second argument.

/// Uniform partition of I = (0, 1) into 2^J subintervals with continuous
/// piecewise-linear trial space (p_t = 1).
struct TemporalDiscretization {
  int level = 0;

  std::size_t n_elements() const { return std::size_t{1} << level; }
  std::size_t n_dofs() const { return n_elements() + 1; }
  double mesh_width() const { return 1.0 / static_cast<double>(n_elements()); }
};

/// Trial-space matrices on the hat basis.
struct TemporalMatrices {
  SparseMatrix mass;           // M_t = <Phi, Phi>
  SparseMatrix stiffness;      // A_t = <Phi', Phi'>
  SparseMatrix derivative;     // L = <Phi', Phi>, (i, j) = int phi_j' phi_i
  SparseMatrix derivative_t;   // L^T
  SparseMatrix initial_trace;  // Gamma_0 = Phi(0) Phi(0)^T
  std::vector<double> trace_start;
  std::vector<double> trace_end;
};

/// Matrices against the discontinuous test basis Xi: per element, the
/// L2-normalized shifted Legendre polynomials of degree 0 and 1. Test index
/// 2e is the degree-0 function on element e, 2e+1 the degree-1 one.
struct TestMatrices {
  SparseMatrix gram;        // O = <Xi, Xi>
  SparseMatrix derivative;  // T = <Phi', Xi>, rows = test index
  SparseMatrix mass;        // N = <Phi, Xi>
  std::vector<double> gram_inverse_diagonal;
};

TemporalMatrices assemble_temporal_trial(int level);
TestMatrices assemble_temporal_test(int level);

/// Nodal trace vector Phi(t) for t in {0, 1}.
std::vector<double> evaluate_trace(int level, double t);

/// Value of hat function `index` at time t.
double hat_function(int level, std::size_t index, double t);
/// Value of test function `index` at time t (zero outside its element).
double test_function(int level, std::size_t index, double t);

}  // namespace spacetime
