#pragma once

#include <vector>

#include "fvdg/assembly.hpp"
#include "fvdg/problem.hpp"

namespace fvdg {

struct VertexBounds {
  std::vector<double> u_min;  // per mesh vertex
  std::vector<double> u_max;
};

struct LimiterFactors {
  double alpha_x = 1.0;
  double alpha_y = 1.0;
  bool limited = false;  // false when the cell already met its vertex bounds
};

/// Patch min/max of cell averages around every vertex, widened by g_D(v) for
/// vertices on Dirichlet facets.
VertexBounds compute_vertex_bounds(const Mesh& mesh, const std::vector<double>& averages, const ProblemSpec& spec);

/// Limits the linear part of a DG cell in place (x first, then y). Modes of
/// degree >= 2 are dropped on cells that violate their vertex bounds.
LimiterFactors limit_cell(std::size_t cell, DiscreteSolution& u, const VertexBounds& bounds);

struct LimitedSolution {
  DiscreteSolution solution;
  std::vector<LimiterFactors> factors;  // per cell; FV cells keep alpha = 1
  std::size_t limited_cells = 0;
};

LimitedSolution limit_solution(const DiscreteSolution& u, const VertexBounds& bounds, const CellSet& dg_cells);

/// Convenience: bounds from the current averages, then limit every DG cell.
LimitedSolution limit_solution(const DiscreteSolution& u, const ProblemSpec& spec);

}  // namespace fvdg
