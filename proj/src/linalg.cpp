#include "fvdg/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

namespace fvdg {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

void check_shape(const SparseSystem& s) {
  if (s.matrix.rows() != s.matrix.cols()) throw SolverError("matrix is not square");
  if (s.rhs.size() != s.matrix.rows()) throw SolverError("right-hand side length does not match the matrix");
}

std::string pivot_report(const ColMatrix& A) {
  // Rows and columns without any nonzero are the usual culprits.
  Eigen::VectorXd row_norm = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd col_norm = Eigen::VectorXd::Zero(A.cols());
  for (Eigen::Index c = 0; c < A.outerSize(); ++c)
    for (ColMatrix::InnerIterator it(A, c); it; ++it) {
      row_norm[it.row()] = std::max(row_norm[it.row()], std::abs(it.value()));
      col_norm[c] = std::max(col_norm[c], std::abs(it.value()));
    }
  Eigen::Index r = 0, c = 0;
  const double rmin = row_norm.minCoeff(&r);
  const double cmin = col_norm.minCoeff(&c);
  char buf[160];
  std::snprintf(buf, sizeof buf, "smallest row max %.3g at row %lld, smallest column max %.3g at column %lld", rmin,
                static_cast<long long>(r), cmin, static_cast<long long>(c));
  return buf;
}

}  // namespace

double relative_residual(const SparseSystem& system, const Eigen::VectorXd& x) {
  const double bn = system.rhs.norm();
  const double rn = (system.rhs - system.matrix * x).norm();
  return bn > 0.0 ? rn / bn : rn;
}

Eigen::VectorXd solve_direct(const SparseSystem& system, SolveStats* stats) {
  check_shape(system);
  const Eigen::Index n = system.matrix.rows();
  if (n == 0) return {};
  ColMatrix A = system.matrix;
  A.makeCompressed();

  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SolverError("sparse LU failed: " + lu.lastErrorMessage() + " (" + pivot_report(A) + ")");

  Eigen::VectorXd x = lu.solve(system.rhs);
  if (!x.allFinite()) throw SolverError("sparse LU produced non-finite values (" + pivot_report(A) + ")");
  double res = relative_residual(system, x);
  int steps = 0;
  while (res > 1e-10 && steps < 5) {
    const Eigen::VectorXd r = system.rhs - system.matrix * x;
    x += lu.solve(r);
    res = relative_residual(system, x);
    ++steps;
  }
  if (!(res <= 1e-10)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "relative residual %.3g", res);
    throw SolverError("matrix is numerically singular: " + std::string(buf) + " after refinement (" +
                      pivot_report(A) + ")");
  }
  if (stats) *stats = {res, steps};
  return x;
}

Eigen::VectorXd solve_iterative(const SparseSystem& system, double tol, int max_iter, SolveStats* stats,
                                int restart) {
  check_shape(system);
  const Eigen::Index n = system.matrix.rows();
  if (system.rhs.norm() == 0.0) {
    if (stats) *stats = {0.0, 0};
    return Eigen::VectorXd::Zero(n);
  }
  if (max_iter <= 0) throw SolverError("GMRES did not converge: max_iter is 0");

  ColMatrix A = system.matrix;
  A.makeCompressed();
  Eigen::GMRES<ColMatrix, Eigen::IncompleteLUT<double>> gmres;
  gmres.preconditioner().setDroptol(1e-6);
  gmres.preconditioner().setFillfactor(20);
  gmres.set_restart(restart);
  gmres.setTolerance(tol);
  gmres.setMaxIterations(max_iter);
  gmres.compute(A);
  if (gmres.info() != Eigen::Success) throw SolverError("incomplete LU preconditioner failed");
  Eigen::VectorXd x = gmres.solve(system.rhs);
  const double res = relative_residual(system, x);
  if (gmres.info() != Eigen::Success || !(res <= tol * 10.0)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "GMRES did not converge: %ld iterations, relative residual %.3g",
                  static_cast<long>(gmres.iterations()), res);
    throw SolverError(buf);
  }
  if (stats) *stats = {res, static_cast<int>(gmres.iterations())};
  return x;
}

}  // namespace fvdg
