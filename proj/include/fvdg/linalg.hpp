#pragma once

#include <stdexcept>

#include "fvdg/assembly.hpp"

namespace fvdg {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveStats {
  double relative_residual = 0.0;
  int iterations = 0;  // Krylov iterations, or refinement steps for the direct solver
};

/// Sparse LU with COLAMD ordering and partial pivoting, followed by iterative
/// refinement until the relative residual is <= 1e-10.
Eigen::VectorXd solve_direct(const SparseSystem& system, SolveStats* stats = nullptr);

/// Restarted GMRES preconditioned with incomplete LU (threshold dropping).
Eigen::VectorXd solve_iterative(const SparseSystem& system, double tol, int max_iter, SolveStats* stats = nullptr,
                                int restart = 50);

double relative_residual(const SparseSystem& system, const Eigen::VectorXd& x);

}  // namespace fvdg
