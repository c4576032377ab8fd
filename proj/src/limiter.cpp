#include "fvdg/limiter.hpp"

#include <algorithm>
#include <cmath>

namespace fvdg {

namespace {

// Largest alpha in [0, 1] with lo <= base + alpha * delta <= hi.
double directional_factor(double base, double delta, double lo, double hi, double guard) {
  double a = 1.0;
  if (delta > guard) a = std::min(1.0, (hi - base) / delta);
  else if (delta < -guard) a = std::min(1.0, (lo - base) / delta);
  return std::clamp(a, 0.0, 1.0);
}

}  // namespace

VertexBounds compute_vertex_bounds(const Mesh& mesh, const std::vector<double>& averages, const ProblemSpec& spec) {
  const std::size_t nv = mesh.vertices.size();
  VertexBounds b;
  b.u_min.assign(nv, std::numeric_limits<double>::infinity());
  b.u_max.assign(nv, -std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t c : mesh.vertex_cells[v]) {
      b.u_min[v] = std::min(b.u_min[v], averages[c]);
      b.u_max[v] = std::max(b.u_max[v], averages[c]);
    }
  }
  for (const Facet& f : mesh.facets) {
    if (!f.is_boundary() || !spec.dirichlet.count(f.tag)) continue;
    for (std::size_t v : f.vertices) {
      const double g = spec.dirichlet_value(f.tag, mesh.vertices[v]);
      b.u_min[v] = std::min(b.u_min[v], g);
      b.u_max[v] = std::max(b.u_max[v], g);
    }
  }
  return b;
}

LimiterFactors limit_cell(std::size_t cell, DiscreteSolution& u, const VertexBounds& bounds) {
  LimiterFactors out;
  if (u.partition.is_fv(cell)) return out;
  const Mesh& mesh = *u.mesh;
  const auto& loop = mesh.cells[cell];
  auto& a = u.coefficients[cell];
  const CellBasis& basis = (*u.bases)[cell];
  const double mean = u.cell_average(cell);
  const double scale = std::max(1.0, std::abs(mean));
  const double tol = 1e-13 * scale;

  bool flagged = false;
  for (std::size_t v : loop) {
    const double val = u.evaluate(cell, mesh.vertices[v]);
    if (val < bounds.u_min[v] - tol || val > bounds.u_max[v] + tol) {
      flagged = true;
      break;
    }
  }
  if (!flagged) return out;
  out.limited = true;

  const double h = basis.scale();
  const Point& x0 = basis.center();
  const double ux = a[1] / h;
  const double uy = a[2] / h;
  const double guard = 1e-300 * scale;

  std::vector<double> pre(loop.size());
  double ax = 1.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const std::size_t v = loop[k];
    ax = std::min(ax, directional_factor(mean, ux * (mesh.vertices[v].x - x0.x), bounds.u_min[v], bounds.u_max[v], guard));
  }
  for (std::size_t k = 0; k < loop.size(); ++k) pre[k] = mean + ax * ux * (mesh.vertices[loop[k]].x - x0.x);
  double ay = 1.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const std::size_t v = loop[k];
    ay = std::min(ay, directional_factor(pre[k], uy * (mesh.vertices[v].y - x0.y), bounds.u_min[v], bounds.u_max[v], guard));
  }

  // Keep the cell average: the linear modes have tiny but nonzero means.
  const double a1 = ax * a[1];
  const double a2 = ay * a[2];
  std::fill(a.begin(), a.end(), 0.0);
  a[1] = a1;
  a[2] = a2;
  a[0] = mean - (a1 * basis.moment(1) + a2 * basis.moment(2));
  out.alpha_x = ax;
  out.alpha_y = ay;
  return out;
}

LimitedSolution limit_solution(const DiscreteSolution& u, const VertexBounds& bounds, const CellSet& dg_cells) {
  LimitedSolution out{u, std::vector<LimiterFactors>(u.coefficients.size()), 0};
  for (std::size_t c : dg_cells) {
    if (u.partition.is_fv(c)) continue;
    out.factors[c] = limit_cell(c, out.solution, bounds);
    if (out.factors[c].limited) ++out.limited_cells;
  }
  return out;
}

LimitedSolution limit_solution(const DiscreteSolution& u, const ProblemSpec& spec) {
  const VertexBounds bounds = compute_vertex_bounds(*u.mesh, u.cell_averages(), spec);
  CellSet dg;
  for (std::size_t c = 0; c < u.partition.size(); ++c)
    if (u.partition.is_dg(c)) dg.push_back(c);
  return limit_solution(u, bounds, dg);
}

}  // namespace fvdg
