#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fvdg/basis.hpp"
#include "fvdg/geometry.hpp"
#include "fvdg/problem.hpp"

namespace fvdg {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How the epsilon term of the Dirichlet data enters the right-hand side.
enum class DirichletTerm {
  corrected,  // eps * int (K grad v . n) g_D
  literal,    // eps * int (sigma/h) (grad v . n) g_D
};

enum class InterfaceConvection {
  pointwise,      // upwinding and jumps evaluated at every facet quadrature point
  at_projection,  // total facet flux, DG trace taken at y_gamma
};

enum class BoundaryConvection {
  outflow,         // int_{beta.n >= 0} (beta.n) u v in a, inflow data in l
  literal_inflow,  // int_{inflow} (beta.n) u v in a, inflow data in l
};

struct DGParams {
  int degree = 1;
  double epsilon = -1.0;
  double sigma = 14.0;
  std::optional<double> sigma_boundary;
  DirichletTerm dirichlet_term = DirichletTerm::corrected;
  InterfaceConvection interface_convection = InterfaceConvection::pointwise;
  BoundaryConvection boundary_convection = BoundaryConvection::outflow;

  /// Nonsymmetric variant: epsilon = 1, sigma = 0 inside, 1 on the boundary.
  static DGParams obb(int degree = 1);
  double boundary_sigma() const { return sigma_boundary.value_or(sigma); }
  void validate() const;
};

struct DofMap {
  std::vector<std::size_t> offset;
  std::vector<int> dim;
  std::size_t total = 0;

  static DofMap build(const Partition& partition, int degree);
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

/// u_h over the mixed space: one constant per FV cell, monomial coefficients
/// about the centroid on DG cells.
struct DiscreteSolution {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const std::vector<CellBasis>> bases;
  Partition partition;
  int degree = 1;
  std::vector<std::vector<double>> coefficients;  // per cell; size 1 on FV cells

  double evaluate(std::size_t cell, const Point& p) const;
  Vec2 gradient(std::size_t cell, const Point& p) const;
  double cell_average(std::size_t cell) const;
  std::vector<double> cell_averages() const;
};

/// K_gamma = |b - a| / int_{[a,b]} ds / K, via 8-point Gauss quadrature.
double harmonic_face_diffusivity(const ScalarField& K, const Point& a, const Point& b);
/// Uses L_gamma = [x_V, x_W] (FV interior) or [x_V, y_gamma] (FV boundary, interface).
double harmonic_face_diffusivity(const ScalarField& K, const Mesh& mesh, const Facet& facet);

inline double upwind_trace(double beta_dot_n, double u_v, double u_w) { return beta_dot_n >= 0.0 ? u_v : u_w; }

/// Everything needed to interpret the solution vector of one assembled system.
struct AssembledProblem {
  std::shared_ptr<const Mesh> mesh;  // classified under `partition`
  std::shared_ptr<const std::vector<CellBasis>> bases;
  Partition partition;
  DofMap dofs;
  DGParams params;
  SparseSystem system;
};

/// Classifies `mesh` under `partition` and assembles a(u, v) = l(v).
AssembledProblem assemble_system(const Mesh& mesh, const Partition& partition, const ProblemSpec& spec,
                                 const DGParams& params,
                                 std::shared_ptr<const std::vector<CellBasis>> bases = nullptr);

/// Lower-level entry: `mesh` must already be classified under `partition`.
SparseSystem assemble(const Mesh& mesh, const Partition& partition, const ProblemSpec& spec,
                      const DGParams& params, const std::vector<CellBasis>& bases, const DofMap& dofs);

DiscreteSolution make_solution(const AssembledProblem& problem, const Eigen::VectorXd& x);

/// Coefficient vector of the interpolant: cell value at x_V on FV cells,
/// L2 projection on DG cells.
Eigen::VectorXd interpolate(const AssembledProblem& problem, const ScalarField& u);

void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path);
void write_vector(const Eigen::VectorXd& v, const std::filesystem::path& path);

}  // namespace fvdg
