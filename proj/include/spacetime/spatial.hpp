#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "spacetime/linalg.hpp"

namespace spacetime {

using Point = std::array<double, 3>;
using GridIndex = std::array<long, 3>;

inline constexpr std::size_t kBoundary = std::numeric_limits<std::size_t>::max();

/// One simplex of a structured mesh: d+1 vertices and their interior DOF
/// numbers (kBoundary for Dirichlet vertices).
struct Simplex {
  int dim = 0;
  std::array<Point, 4> vertex{};
  std::array<std::size_t, 4> dof{};
};

/// Quadrature on the reference simplex {xi >= 0, sum xi <= 1}. `bary` holds
/// all d+1 barycentric coordinates of each point (entry 0 = 1 - sum xi).
struct SimplexQuadrature {
  int dim = 0;
  std::vector<std::array<double, 4>> bary;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed (Duffy) tensor Gauss rule with n points per direction.
SimplexQuadrature simplex_quadrature(int dim, int points_per_direction);

/// Number of points per direction used for load vectors; integrates the
/// polynomial products of P1 data against P1 basis functions exactly.
inline constexpr int kLoadQuadraturePoints = 3;

/// Uniform mesh of [0,1]^d with 2^k cells per direction, each cube split into
/// d! Kuhn simplices sharing the main diagonal. In 2D every square is cut
/// along the lower-left to upper-right diagonal. Interior vertices are
/// numbered lexicographically with x fastest.
class MeshLevel {
 public:
  MeshLevel(int dim, int level);

  int dim() const { return dim_; }
  int level() const { return level_; }
  long cells_per_dim() const { return n_; }
  double mesh_width() const { return 1.0 / static_cast<double>(n_); }
  std::size_t n_interior() const { return n_interior_; }
  std::size_t n_simplices() const;

  std::optional<std::size_t> interior_index(const GridIndex& g) const;
  GridIndex interior_grid(std::size_t idx) const;
  Point interior_vertex(std::size_t idx) const;

  void for_each_simplex(const std::function<void(const Simplex&)>& fn) const;
  /// Simplices of one cube, identified by its lower corner.
  void cell_simplices(const GridIndex& corner, const std::function<void(const Simplex&)>& fn) const;

 private:
  int dim_;
  int level_;
  long n_;
  std::size_t n_interior_;
};

/// Nested levels 1..K (level k has (2^k - 1)^d interior vertices) with
/// interpolation operators between consecutive levels.
class MeshHierarchy {
 public:
  MeshHierarchy(int dim, int finest_level);

  int dim() const { return dim_; }
  int finest_level() const { return finest_; }
  const MeshLevel& level(int k) const { return levels_.at(static_cast<std::size_t>(k - 1)); }
  const MeshLevel& finest() const { return levels_.back(); }
  /// Level k-1 -> k, 2 <= k <= K.
  const SparseMatrix& prolongation(int k) const;
  const SparseMatrix& restriction(int k) const;

 private:
  int dim_;
  int finest_;
  std::vector<MeshLevel> levels_;
  std::vector<SparseMatrix> prolongations_;
  std::vector<SparseMatrix> restrictions_;
};

MeshHierarchy build_mesh_hierarchy(int dim, int finest_level);

/// Linear interpolation from level k-1 to level k. For k = 1 the coarse space
/// is empty and the result has zero columns.
SparseMatrix build_prolongation(const MeshHierarchy& hierarchy, int k);

/// Constant coefficients of a(eta, zeta) = int D grad eta . grad zeta + c eta zeta.
struct Coefficients {
  int dim = 2;
  std::array<double, 9> diffusion{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major d x d in the leading block
  double reaction = 0.0;

  static Coefficients heat(int dim);
  double d(int i, int j) const { return diffusion[static_cast<std::size_t>(i * dim + j)]; }
};

using InitialDatum = std::function<double(const Point&)>;
using SpaceTimeFunction = std::function<double(double, const Point&)>;

struct ProblemData {
  Coefficients coefficients;
  InitialDatum initial;         // u0; empty means zero
  SpaceTimeFunction forcing;    // g; empty means zero
  SpaceTimeFunction exact;      // optional exact solution
};

struct SpatialMatrices {
  SparseMatrix mass;       // M_x
  SparseMatrix stiffness;  // A_x = <D grad Phi, grad Phi> + c M_x
};

/// P1 assembly restricted to interior vertices. Throws for non-SPD D or c < 0.
SpatialMatrices assemble_spatial(const MeshLevel& mesh, const Coefficients& coeffs);

void validate_coefficients(const Coefficients& coeffs);

/// Element mass and stiffness matrices of one simplex, (d+1) x (d+1).
void element_matrices(const Simplex& s, const Coefficients& coeffs, DenseMatrix& mass, DenseMatrix& stiffness);

/// <u0, phi_i> for every interior hat phi_i.
std::vector<double> project_initial(const MeshLevel& mesh, const InitialDatum& u0,
                                    int points_per_direction = kLoadQuadraturePoints);

/// Nodal values at interior vertices.
std::vector<double> interpolate(const MeshLevel& mesh, const InitialDatum& f);

/// <g, xi_i (x) phi_k> over the test basis in time: result is N_x x 2^{J+1}.
SpaceTimeVector assemble_load(const MeshLevel& mesh, int time_level, const SpaceTimeFunction& g,
                              int points_per_direction = kLoadQuadraturePoints);

/// L2(Omega) norm of (sum_i c_i phi_i) - f.
double l2_error(const MeshLevel& mesh, std::span<const double> coeffs, const InitialDatum& f,
                int points_per_direction = 4);

}  // namespace spacetime
