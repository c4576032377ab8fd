#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fvdg/config.hpp"
#include "fvdg/driver.hpp"
#include "fvdg/expression.hpp"
#include "fvdg/linalg.hpp"

using namespace fvdg;

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;

// Command-line values; unset ones leave the config file (or default) alone.
struct Overrides {
  std::optional<std::string> config, problem, eps_h, variant, node_set, scheme;
  std::optional<std::size_t> cells;
  std::optional<int> degree, lloyd;
  std::optional<double> epsilon, sigma, sigma_boundary, delta, eps_bp;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool skip_limiter = false, iterative = false;

  void add(CLI::App& app) {
    app.add_option("--config", config, "TOML or JSON run configuration");
    app.add_option("--problem", problem, "benchmark name or problem file");
    app.add_option("--cells", cells, "target number of Voronoi cells");
    app.add_option("--lloyd", lloyd, "Lloyd iterations");
    app.add_option("--degree", degree, "DG polynomial degree k");
    app.add_option("--epsilon", epsilon, "IPDG symmetry parameter (-1, 0, 1)");
    app.add_option("--sigma", sigma, "interior penalty");
    app.add_option("--sigma-boundary", sigma_boundary, "boundary penalty");
    app.add_option("--delta", delta, "bound slack");
    app.add_option("--eps-bp", eps_bp, "screening tolerance (default delta)");
    app.add_option("--eps-h", eps_h, "accuracy tolerance or 'off'");
    app.add_option("--variant", variant, "cell_average or nodal");
    app.add_option("--node-set", node_set, "vertices or quadrature_points");
    app.add_option("--scheme", scheme, "fv, dg or coupled-adaptive");
    app.add_option("--seed", seed, "mesh seed");
    app.add_option("--out", out, "output directory (default $FVDG_OUT or ./out)");
    app.add_flag("--skip-limiter", skip_limiter, "do not limit the DG region");
    app.add_flag("--iterative", iterative, "GMRES instead of sparse LU");
  }

  RunConfig resolve() const {
    RunConfig c;
    if (config) c = apply_config(load_config_file(*config));
    nlohmann::json j = nlohmann::json::object();
    if (problem) j["problem"] = *problem;
    if (cells) j["cells"] = *cells;
    if (lloyd) j["lloyd"] = *lloyd;
    if (degree) j["degree"] = *degree;
    if (epsilon) j["epsilon"] = *epsilon;
    if (sigma) j["sigma"] = *sigma;
    if (sigma_boundary) j["sigma_boundary"] = *sigma_boundary;
    if (delta) j["delta"] = *delta;
    if (eps_bp) j["eps_bp"] = *eps_bp;
    if (eps_h) {
      if (*eps_h == "off" || *eps_h == "inf") j["eps_h"] = "off";
      else {
        try {
          j["eps_h"] = std::stod(*eps_h);
        } catch (const std::exception&) {
          throw ConfigError("eps_h: expected a number or \"off\"");
        }
      }
    }
    if (variant) j["variant"] = *variant;
    if (node_set) j["node_set"] = *node_set;
    if (scheme) j["scheme"] = *scheme;
    if (seed) j["seed"] = *seed;
    if (skip_limiter) j["skip_limiter"] = true;
    if (iterative) j["iterative"] = true;
    c = apply_config(j, c);
    c.out = resolve_output_root(out ? std::optional<std::filesystem::path>(*out)
                                    : (c.out.empty() ? std::nullopt : std::optional<std::filesystem::path>(c.out)));
    return c;
  }
};

int solve(const Overrides& o) {
  const RunConfig c = o.resolve();
  const RunOutcome r = cmd_solve(c);
  std::cout << summary_header() << '\n' << format_summary_row(r.row) << '\n';
  if (r.report && r.report->terminated_by == Termination::cap)
    std::cerr << "warning: iteration cap reached with eta_bp = " << format_sci(r.report->final_eta_bp) << '\n';
  return 0;
}

int bench(const Overrides& o, const std::vector<std::string>& suite, const std::vector<std::size_t>& sizes,
          const std::vector<double>& deltas) {
  BenchOptions b;
  b.base = o.resolve();
  for (const auto& s : suite) {
    if (s == "all") {
      for (const char* p : {"triple_layer", "l_shaped", "internal_layer", "hemker"}) b.problems.emplace_back(p);
    } else {
      b.problems.push_back(s);
    }
  }
  b.sizes = sizes;
  b.deltas = deltas;
  const BenchResult r = cmd_bench(b);
  std::cout << "rows written " << r.written << ", skipped " << r.skipped << ", failed " << r.failed << '\n';
  return 0;
}

int convergence(const Overrides& o, int levels, std::size_t base_cells, const std::string& which, double a, double b) {
  if (levels < 3) throw ConfigError("levels: need at least 3");
  if (base_cells < 3) throw ConfigError("base-cells: must be at least 3");
  const RunConfig c = o.resolve();
  c.validate();
  const ProblemSpec spec = o.problem ? resolve_problem(c.problem) : manufactured_problem(a, b);
  std::vector<std::size_t> sizes;
  for (int l = 0; l < levels; ++l) sizes.push_back(base_cells << (2 * l));

  std::filesystem::create_directories(c.out);
  std::ofstream csv(c.out / "convergence.csv");
  if (!csv) throw IoError("cannot write " + (c.out / "convergence.csv").string());
  csv << "scheme,level,cells,h,error,order\n";
  std::vector<std::pair<std::string, Region>> schemes;
  if (which == "fv" || which == "both") schemes.emplace_back("fv", Region::fv);
  if (which == "dg" || which == "both") schemes.emplace_back("dg" + std::to_string(c.dg.degree), Region::dg);
  if (schemes.empty()) throw ConfigError("scheme: expected fv, dg or both");

  for (const auto& [name, region] : schemes) {
    const ConvergenceResult r = run_convergence(spec, region, c.dg, sizes, c.seed, c.lloyd_iterations);
    std::printf("%-4s %8s %12s %12s %8s\n", name.c_str(), "cells", "h", "error", "order");
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
      const auto& lv = r.levels[l];
      const std::string order = l == 0 ? "--" : format_sci(r.orders[l - 1]);
      if (l == 0) std::printf("%-4zu %8zu %12.4e %12.4e %8s\n", l, lv.cells, lv.h, lv.error, "--");
      else std::printf("%-4zu %8zu %12.4e %12.4e %8.3f\n", l, lv.cells, lv.h, lv.error, r.orders[l - 1]);
      csv << name << ',' << l << ',' << lv.cells << ',' << format_sci(lv.h) << ',' << format_sci(lv.error) << ','
          << order << '\n';
    }
    std::printf("observed order %.3f\n", r.observed_order());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled finite-volume / discontinuous Galerkin solver"};
  app.require_subcommand(1);

  Overrides solve_o, bench_o, conv_o;
  auto* s = app.add_subcommand("solve", "solve one problem and write artifacts");
  solve_o.add(*s);

  auto* b = app.add_subcommand("bench", "sweep problems, sizes and schemes into summary.csv");
  bench_o.add(*b);
  std::vector<std::string> suite{"all"};
  std::vector<std::size_t> sizes{2000, 10000, 65000};
  std::vector<double> deltas{1e-6, 1e-9};
  b->add_option("--suite", suite, "all or benchmark names")->delimiter(',');
  b->add_option("--sizes", sizes, "cell counts")->delimiter(',');
  b->add_option("--deltas", deltas, "slack values for the adaptive scheme")->delimiter(',');

  auto* cv = app.add_subcommand("convergence", "mesh convergence study on a problem with exact solution");
  conv_o.add(*cv);
  int levels = 3;
  std::size_t base_cells = 1000;
  std::string which = "both";
  double off_a = 0.0, off_b = 0.0;
  cv->add_option("--levels", levels, "number of meshes (cells x4 per level)");
  cv->add_option("--base-cells", base_cells, "cells on the coarsest mesh");
  cv->add_option("--schemes", which, "fv, dg or both");
  cv->add_option("--offset-x", off_a, "linear term a*x added to the manufactured solution");
  cv->add_option("--offset-y", off_b, "linear term b*y added to the manufactured solution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*s) return solve(solve_o);
    if (*b) return bench(bench_o, suite, sizes, deltas);
    return convergence(conv_o, levels, base_cells, which, off_a, off_b);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const ProblemError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const ExpressionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solver;
  }
}
