#include "fvdg/driver.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "fvdg/config.hpp"
#include "fvdg/quadrature.hpp"

namespace fvdg {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

template <typename T>
T get(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_fail(field, "has the wrong type");
  }
}

double get_eps_h(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "off" || s == "inf") return std::numeric_limits<double>::infinity();
    config_fail("eps_h", "expected a number or \"off\"");
  }
  return get<double>(j, "eps_h");
}

void apply_key(RunConfig& c, const std::string& key, const json& v) {
  if (key == "problem") c.problem = get<std::string>(v, key);
  else if (key == "cells") c.cells = get<std::size_t>(v, key);
  else if (key == "lloyd" || key == "lloyd_iterations") c.lloyd_iterations = get<int>(v, key);
  else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
  else if (key == "degree") c.dg.degree = get<int>(v, key);
  else if (key == "epsilon") c.dg.epsilon = get<double>(v, key);
  else if (key == "sigma") c.dg.sigma = get<double>(v, key);
  else if (key == "sigma_boundary") c.dg.sigma_boundary = get<double>(v, key);
  else if (key == "delta") c.delta = get<double>(v, key);
  else if (key == "eps_bp") c.eps_bp = get<double>(v, key);
  else if (key == "eps_h") c.eps_h = get_eps_h(v);
  else if (key == "variant") c.variant = parse_variant(get<std::string>(v, key));
  else if (key == "node_set") {
    const auto s = get<std::string>(v, key);
    if (s == "vertices") c.node_set = NodeSet::vertices;
    else if (s == "quadrature_points") c.node_set = NodeSet::quadrature_points;
    else config_fail(key, "expected vertices or quadrature_points");
  } else if (key == "skip_limiter") c.skip_limiter = get<bool>(v, key);
  else if (key == "iterative") c.iterative_solver = get<bool>(v, key);
  else if (key == "scheme") c.scheme = parse_scheme(get<std::string>(v, key));
  else if (key == "out") c.out = get<std::string>(v, key);
  else config_fail(key, "unknown key");
}

// Vertical cuts through the layers, as (file, endpoints).
std::vector<std::pair<std::string, std::array<Point, 2>>> profile_lines(const std::string& label) {
  if (label == "triple_layer") return {{"profile_x1.csv", {Point{1.0, 0.0}, Point{1.0, 2.0}}}};
  if (label == "hemker") return {{"profile_x2.csv", {Point{2.0, -3.0}, Point{2.0, 3.0}}}};
  return {};
}

std::string scheme_label(Scheme s, int degree) {
  const std::string k = std::to_string(degree);
  switch (s) {
    case Scheme::fv: return "fv";
    case Scheme::dg: return "dg" + k;
    case Scheme::coupled_adaptive: return "fv-dg" + k;
  }
  return "?";
}

}  // namespace

Scheme parse_scheme(const std::string& s) {
  if (s == "fv") return Scheme::fv;
  if (s == "dg") return Scheme::dg;
  if (s == "coupled-adaptive" || s == "coupled") return Scheme::coupled_adaptive;
  config_fail("scheme", "expected fv, dg or coupled-adaptive, got '" + s + "'");
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::fv: return "fv";
    case Scheme::dg: return "dg";
    case Scheme::coupled_adaptive: return "coupled-adaptive";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "cell_average" || s == "1") return Variant::cell_average;
  if (s == "nodal" || s == "2") return Variant::nodal;
  config_fail("variant", "expected cell_average or nodal, got '" + s + "'");
}

const char* to_string(Variant v) { return v == Variant::cell_average ? "cell_average" : "nodal"; }

void RunConfig::validate() const {
  if (problem.empty()) config_fail("problem", "must not be empty");
  if (cells < 3) config_fail("cells", "must be at least 3");
  if (lloyd_iterations < 0) config_fail("lloyd", "must be non-negative");
  try {
    dg.validate();
  } catch (const AssemblyError& e) {
    throw ConfigError(e.what());
  }
  try {
    adaptive().validate();
  } catch (const AdaptError& e) {
    throw ConfigError(e.what());
  }
}

AdaptiveConfig RunConfig::adaptive() const {
  AdaptiveConfig a;
  a.delta = delta;
  a.eps_bp = eps_bp;
  a.eps_h = eps_h;
  a.variant = variant;
  a.node_set = node_set;
  a.skip_limiter = skip_limiter;
  a.iterative_solver = iterative_solver;
  a.seed = seed;
  return a;
}

json RunConfig::to_json() const {
  json j;
  j["problem"] = problem;
  j["scheme"] = to_string(scheme);
  j["mesh"] = {{"cells", cells}, {"lloyd", lloyd_iterations}, {"seed", seed}};
  j["dg"] = {{"degree", dg.degree}, {"epsilon", dg.epsilon}, {"sigma", dg.sigma},
             {"sigma_boundary", dg.boundary_sigma()}};
  j["adapt"] = {{"delta", delta},
                {"eps_bp", eps_bp.value_or(delta)},
                {"eps_h", std::isfinite(eps_h) ? json(eps_h) : json("off")},
                {"variant", to_string(variant)},
                {"node_set", node_set == NodeSet::vertices ? "vertices" : "quadrature_points"},
                {"skip_limiter", skip_limiter},
                {"iterative", iterative_solver}};
  j["out"] = out.string();
  return j;
}

RunConfig apply_config(const json& doc, RunConfig base) {
  if (!doc.is_object()) throw ConfigError("config: top level must be a table");
  for (const auto& [key, value] : doc.items()) {
    if (key == "mesh" || key == "dg" || key == "adapt") {
      if (!value.is_object()) config_fail(key, "must be a table");
      for (const auto& [k, v] : value.items()) apply_key(base, k, v);
    } else {
      apply_key(base, key, value);
    }
  }
  return base;
}

std::filesystem::path resolve_output_root(const std::optional<std::filesystem::path>& explicit_out) {
  if (explicit_out) return *explicit_out;
  if (const char* env = std::getenv("FVDG_OUT"); env && *env) return env;
  return "out";
}

ProblemSpec resolve_problem(const std::string& name_or_path) {
  try {
    return make_benchmark(name_or_path);
  } catch (const ProblemError&) {
    if (!std::filesystem::exists(name_or_path))
      throw ConfigError("problem: '" + name_or_path + "' is neither a benchmark nor a file");
  }
  return load_problem(name_or_path);
}

std::string problem_label(const std::string& name_or_path) {
  try {
    return to_string(parse_benchmark(name_or_path));
  } catch (const ProblemError&) {
    return std::filesystem::path(name_or_path).stem().string();
  }
}

Mesh make_run_mesh(const ProblemSpec& spec, const RunConfig& config) {
  return make_voronoi_mesh(spec.domain, config.cells, config.seed, config.lloyd_iterations);
}

RunOutcome run_scheme(const Mesh& mesh, const ProblemSpec& spec, const RunConfig& config,
                      DiscreteSolution* solution_out) {
  RunOutcome out;
  const std::string label = problem_label(config.problem);
  std::optional<DiscreteSolution> u;
  if (config.scheme == Scheme::coupled_adaptive) {
    AdaptiveResult r = run_adaptive(mesh, spec, config.dg, config.adaptive());
    out.osc = osc_metric(r.solution, spec.u_min, spec.u_max);
    out.partition = r.partition;
    out.cells = r.mesh->num_cells();
    out.row = summary_row(r.report, out.osc, label, out.cells, config.delta, r.partition);
    out.row.scheme = scheme_label(config.scheme, config.dg.degree);
    out.report = std::move(r.report);
    u = std::move(r.solution);
  } else {
    out.partition = Partition::uniform(mesh.num_cells(), config.scheme == Scheme::fv ? Region::fv : Region::dg);
    u = solve_partition(mesh, out.partition, spec, config.dg, config.iterative_solver);
    out.osc = osc_metric(*u, spec.u_min, spec.u_max);
    out.cells = mesh.num_cells();
    out.row.problem = label;
    out.row.scheme = scheme_label(config.scheme, config.dg.degree);
    out.row.cells = out.cells;
    out.row.osc = out.osc.osc;
    out.row.fv_fraction = out.partition.fraction(Region::fv);
    out.row.dg_fraction = out.partition.fraction(Region::dg);
  }
  if (solution_out) *solution_out = std::move(*u);
  return out;
}

RunOutcome cmd_solve(const RunConfig& config) {
  config.validate();
  const ProblemSpec spec = resolve_problem(config.problem);
  const Mesh mesh = make_run_mesh(spec, config);
  DiscreteSolution u;
  RunOutcome out = run_scheme(mesh, spec, config, &u);

  std::filesystem::create_directories(config.out);
  {
    std::ofstream echo(config.out / "config.json");
    if (!echo) throw IoError("cannot write " + (config.out / "config.json").string());
    echo << config.to_json().dump(2) << '\n';
  }
  write_vtk(u, out.partition, spec.u_min, spec.u_max, config.out / "solution.vtk");
  for (const auto& [file, line] : profile_lines(problem_label(config.problem)))
    write_profile_csv(line_profile(u, line[0], line[1], 401), config.out / file);
  if (out.report) write_report_csv(*out.report, config.out / "adapt_report.csv");
  append_summary_row(out.row, config.out / "summary.csv");
  return out;
}

BenchResult cmd_bench(const BenchOptions& options) {
  BenchResult result;
  const std::filesystem::path root = options.base.out;
  std::filesystem::create_directories(root);
  const auto summary = root / "summary.csv";
  const auto done = read_summary_rows(summary);

  for (const auto& problem : options.problems) {
    for (std::size_t size : options.sizes) {
      RunConfig base = options.base;
      base.problem = problem;
      base.cells = size;
      base.validate();
      const ProblemSpec spec = resolve_problem(problem);
      std::optional<Mesh> mesh;
      std::string mesh_error;
      try {
        mesh = make_run_mesh(spec, base);
      } catch (const std::exception& e) {
        mesh_error = e.what();
      }

      std::vector<RunConfig> runs;
      for (Scheme s : {Scheme::fv, Scheme::dg}) {
        RunConfig c = base;
        c.scheme = s;
        runs.push_back(c);
      }
      for (double d : options.deltas) {
        RunConfig c = base;
        c.scheme = Scheme::coupled_adaptive;
        c.delta = d;
        runs.push_back(c);
      }

      for (const auto& c : runs) {
        SummaryRow key;
        key.problem = problem_label(problem);
        key.scheme = scheme_label(c.scheme, c.dg.degree);
        key.cells = mesh ? mesh->num_cells() : size;
        if (c.scheme == Scheme::coupled_adaptive) key.delta = c.delta;
        if (done.count(summary_key(key))) {
          ++result.skipped;
          continue;
        }
        SummaryRow row;
        try {
          if (!mesh) throw GeometryError(mesh_error);
          row = run_scheme(*mesh, spec, c).row;
        } catch (const std::exception& e) {
          std::cerr << "bench: " << key.problem << ' ' << key.scheme << ' ' << size << ": " << e.what() << '\n';
          row = key;
          row.osc = std::numeric_limits<double>::quiet_NaN();
          row.status = "failed";
          ++result.failed;
        }
        append_summary_row(row, summary);
        ++result.written;
      }
    }
  }
  return result;
}

double ConvergenceResult::observed_order() const {
  const double n = static_cast<double>(levels.size());
  if (levels.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& l : levels) {
    const double x = std::log(l.h), y = std::log(l.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double cell_average_error(const DiscreteSolution& u, const ScalarField& exact) {
  const Mesh& mesh = *u.mesh;
  double e2 = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = polygon_rule(mesh, c, 2 * u.degree + 4);
    double avg = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) avg += rule.weights[q] * exact(rule.points[q]);
    avg /= mesh.areas[c];
    const double d = u.cell_average(c) - avg;
    e2 += d * d * mesh.areas[c];
  }
  return std::sqrt(e2);
}

ConvergenceResult run_convergence(const ProblemSpec& spec, Region scheme, const DGParams& params,
                                  const std::vector<std::size_t>& sizes, std::uint64_t seed, int lloyd_iterations) {
  if (!spec.exact) throw ConfigError("problem: convergence needs an exact solution");
  if (sizes.size() < 2) throw ConfigError("levels: need at least two mesh sizes");
  ConvergenceResult r;
  for (std::size_t n : sizes) {
    const Mesh mesh = make_voronoi_mesh(spec.domain, n, seed, lloyd_iterations);
    const DiscreteSolution u = solve_partition(mesh, Partition::uniform(mesh.num_cells(), scheme), spec, params);
    const double h = std::sqrt(mesh.total_area() / static_cast<double>(mesh.num_cells()));
    r.levels.push_back({mesh.num_cells(), h, cell_average_error(u, *spec.exact)});
  }
  for (std::size_t l = 1; l < r.levels.size(); ++l) {
    const auto& a = r.levels[l - 1];
    const auto& b = r.levels[l];
    r.orders.push_back(std::log(a.error / b.error) / std::log(a.h / b.h));
  }
  return r;
}

}  // namespace fvdg
