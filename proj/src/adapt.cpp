#include "fvdg/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fvdg/linalg.hpp"
#include "fvdg/quadrature.hpp"

namespace fvdg {

void AdmissibleInterval::validate() const {
  if (!(delta_under >= 0.0) || !(delta_over >= 0.0)) throw AdaptError("slack must be non-negative");
  if (!(lower() <= upper())) throw AdaptError("admissible interval is empty");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::none: return "none";
    case Termination::tolerance: return "tolerance";
    case Termination::all_fv_fallback: return "all_fv_fallback";
    case Termination::cap: return "cap";
  }
  return "?";
}

void AdaptiveConfig::validate() const {
  if (!(delta >= 0.0)) throw AdaptError("delta must be non-negative");
  if (!(bp_tolerance() > 0.0)) throw AdaptError("eps_bp must be positive");
  if (!(eps_h > 0.0)) throw AdaptError("eps_h must be positive");
  if (max_bp_iters < 1) throw AdaptError("max_bp_iters must be at least 1");
  if (max_h_iters < 0) throw AdaptError("max_h_iters must be non-negative");
  if (!(mark_fraction > 0.0 && mark_fraction <= 1.0)) throw AdaptError("mark_fraction must lie in (0, 1]");
  if (sites_per_cell < 1) throw AdaptError("sites_per_cell must be at least 1");
}

Screening eta_bp_cell(const DiscreteSolution& u, const AdmissibleInterval& I) {
  Screening s;
  for (std::size_t c = 0; c < u.coefficients.size(); ++c) {
    const double d = I.dist(u.cell_average(c));
    if (d > 0.0) s.violations.push_back(c);
    s.eta = std::max(s.eta, d);
  }
  return s;
}

Screening eta_bp_node(const DiscreteSolution& u, const AdmissibleInterval& I,
                      const std::vector<std::vector<Point>>& nodes) {
  Screening s;
  for (std::size_t c = 0; c < u.coefficients.size(); ++c) {
    double worst = 0.0;
    for (const Point& p : nodes[c]) worst = std::max(worst, I.dist(u.evaluate(c, p)));
    if (worst > 0.0) s.violations.push_back(c);
    s.eta = std::max(s.eta, worst);
  }
  return s;
}

std::vector<std::vector<Point>> screening_nodes(const Mesh& mesh, NodeSet set, int degree) {
  std::vector<std::vector<Point>> nodes(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (set == NodeSet::vertices) {
      for (std::size_t v : mesh.cells[c]) nodes[c].push_back(mesh.vertices[v]);
    } else {
      nodes[c] = polygon_rule(mesh, c, 2 * degree + 2).points;
    }
  }
  return nodes;
}

Partition partition_step(const Mesh& mesh, const Partition& current, const CellSet& violations, bool accumulate) {
  if (violations.empty()) return current;
  const CellSet demote = vertex_neighborhood(mesh, violations);
  Partition next = accumulate ? current : Partition::uniform(current.size(), Region::dg);
  for (std::size_t c : demote) next.tags[c] = Region::fv;
  return next;
}

JumpIndicator jump_indicator(const DiscreteSolution& u) {
  const Mesh& mesh = *u.mesh;
  JumpIndicator j;
  j.eta_cell.assign(mesh.num_cells(), 0.0);
  const int npts = u.degree + 2;
  for (const Facet& f : mesh.facets) {
    if (f.is_boundary()) continue;
    const double h = f.h_gamma > 0.0 ? f.h_gamma : std::max(mesh.diameters[f.owner], mesh.diameters[f.neighbor]);
    const QuadratureRule rule = segment_rule(mesh.vertices[f.vertices[0]], mesh.vertices[f.vertices[1]], npts);
    double e = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double jump = u.evaluate(f.owner, rule.points[q]) - u.evaluate(f.neighbor, rule.points[q]);
      e += rule.weights[q] * jump * jump / h;
    }
    j.eta_cell[f.owner] += e;
    j.eta_cell[f.neighbor] += e;
  }
  double sum = 0.0;
  for (auto& v : j.eta_cell) {
    sum += v;
    v = std::sqrt(v);
  }
  j.eta = std::sqrt(sum);
  return j;
}

DiscreteSolution solve_partition(const Mesh& mesh, const Partition& partition, const ProblemSpec& spec,
                                 const DGParams& params, bool iterative,
                                 std::shared_ptr<const std::vector<CellBasis>> bases) {
  const AssembledProblem ap = assemble_system(mesh, partition, spec, params, std::move(bases));
  const Eigen::VectorXd x = iterative ? solve_iterative(ap.system, 1e-10, 5000) : solve_direct(ap.system);
  return make_solution(ap, x);
}

AdaptiveResult run_adaptive(const Mesh& mesh0, const ProblemSpec& spec, const DGParams& params,
                            const AdaptiveConfig& config) {
  config.validate();
  params.validate();
  const AdmissibleInterval I = AdmissibleInterval::from(spec, config.delta);
  I.validate();
  const double eps_bp = config.bp_tolerance();

  AdaptiveReport report;
  auto mesh = std::make_shared<const Mesh>(mesh0);
  auto bases = std::make_shared<const std::vector<CellBasis>>(build_bases(*mesh, params.degree));
  std::optional<DiscreteSolution> all_dg;

  // Accuracy phase on an all-DG partition.
  if (std::isfinite(config.eps_h)) {
    for (int it = 0;; ++it) {
      all_dg = solve_partition(*mesh, Partition::uniform(mesh->num_cells(), Region::dg), spec, params,
                               config.iterative_solver, bases);
      const JumpIndicator ind = jump_indicator(*all_dg);
      report.eta_h.push_back(ind.eta);
      if (ind.eta <= config.eps_h || it >= config.max_h_iters) break;

      std::vector<std::size_t> order(mesh->num_cells());
      std::iota(order.begin(), order.end(), 0);
      const auto n_mark = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(config.mark_fraction * static_cast<double>(order.size()))));
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return ind.eta_cell[a] > ind.eta_cell[b]; });
      CellSet marked(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_mark));
      std::sort(marked.begin(), marked.end());
      const auto sites = refine_sites(*mesh, marked, config.seed + static_cast<std::uint64_t>(it), config.sites_per_cell);
      mesh = std::make_shared<const Mesh>(generate_voronoi_mesh_adding_sites(sites, mesh->domain));
      bases = std::make_shared<const std::vector<CellBasis>>(build_bases(*mesh, params.degree));
      all_dg.reset();
      ++report.h_iterations;
    }
  }

  // Bound-screened partitioning.
  const std::size_t n = mesh->num_cells();
  Partition partition = Partition::uniform(n, Region::dg);
  std::vector<std::vector<Point>> nodes;
  if (config.variant == Variant::nodal) nodes = screening_nodes(*mesh, config.node_set, params.degree);
  DiscreteSolution u;
  for (int iter = 0;; ++iter) {
    if (iter == 0 && all_dg) u = std::move(*all_dg);
    else u = solve_partition(*mesh, partition, spec, params, config.iterative_solver, bases);
    const Screening s = config.variant == Variant::cell_average ? eta_bp_cell(u, I) : eta_bp_node(u, I, nodes);
    report.records.push_back({iter, s.eta, s.violations.size(), partition.fraction(Region::fv),
                              partition.fraction(Region::dg)});
    report.final_eta_bp = s.eta;
    if (s.eta <= eps_bp) {
      report.terminated_by = partition.count(Region::dg) == 0 ? Termination::all_fv_fallback : Termination::tolerance;
      break;
    }
    if (partition.count(Region::dg) == 0) {
      report.terminated_by = Termination::all_fv_fallback;
      break;
    }
    if (iter >= config.max_bp_iters) {
      report.terminated_by = Termination::cap;
      break;
    }
    const Partition next = partition_step(*mesh, partition, s.violations, config.accumulate);
    if (next == partition) {
      // Only possible without accumulation; treat as stagnation.
      report.terminated_by = Termination::cap;
      break;
    }
    partition = next;
    ++report.bp_iterations;
  }

  AdaptiveResult result{u, u, partition, {}, mesh};
  if (!config.skip_limiter && partition.count(Region::dg) > 0) {
    LimitedSolution lim = limit_solution(u, spec);
    report.limited_cells = lim.limited_cells;
    result.solution = std::move(lim.solution);
  }
  report.osc = osc_metric(result.solution, spec.u_min, spec.u_max).osc;
  result.report = std::move(report);
  return result;
}

void write_report_csv(const AdaptiveReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iter,eta_bp,n_violations,fv_fraction,dg_fraction\n";
  for (const auto& r : report.records)
    out << r.iter << ',' << format_sci(r.eta_bp) << ',' << r.n_violations << ',' << format_sci(r.fv_fraction) << ','
        << format_sci(r.dg_fraction) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

SummaryRow summary_row(const AdaptiveReport& report, const OscReport& osc, const std::string& problem,
                       std::size_t cells, double delta, const Partition& partition) {
  if (report.records.empty() || report.terminated_by == Termination::none)
    throw AdaptError("adaptive report is empty; no summary row written");
  SummaryRow row;
  row.problem = problem;
  row.scheme = "fv-dg";
  row.cells = cells;
  row.osc = osc.osc;
  row.iters = report.bp_iterations;
  row.delta = delta;
  row.fv_fraction = partition.fraction(Region::fv);
  row.dg_fraction = partition.fraction(Region::dg);
  row.status = report.terminated_by == Termination::cap ? "cap" : "ok";
  return row;
}

}  // namespace fvdg
