#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvdg/adapt.hpp"

namespace fvdg {

enum class Scheme { fv, dg, coupled_adaptive };

Scheme parse_scheme(const std::string& s);
const char* to_string(Scheme s);
Variant parse_variant(const std::string& s);
const char* to_string(Variant v);

struct RunConfig {
  std::string problem = "triple_layer";  // benchmark name or problem file
  std::size_t cells = 2000;
  int lloyd_iterations = 5;
  DGParams dg;
  double delta = 1e-9;
  std::optional<double> eps_bp;
  double eps_h = std::numeric_limits<double>::infinity();
  Variant variant = Variant::cell_average;
  NodeSet node_set = NodeSet::vertices;
  bool skip_limiter = false;
  bool iterative_solver = false;
  Scheme scheme = Scheme::coupled_adaptive;
  std::uint64_t seed = 1;
  std::filesystem::path out;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  AdaptiveConfig adaptive() const;
  nlohmann::json to_json() const;
};

/// Applies keys from a parsed config document (flat keys or [mesh], [dg],
/// [adapt] tables) on top of `base`.
RunConfig apply_config(const nlohmann::json& doc, RunConfig base = {});

/// Output root: `explicit_out` when given, else $FVDG_OUT, else "out".
std::filesystem::path resolve_output_root(const std::optional<std::filesystem::path>& explicit_out);

ProblemSpec resolve_problem(const std::string& name_or_path);
/// Short name used in summary rows.
std::string problem_label(const std::string& name_or_path);

struct RunOutcome {
  SummaryRow row;
  OscReport osc;
  std::optional<AdaptiveReport> report;
  Partition partition;
  std::size_t cells = 0;
};

Mesh make_run_mesh(const ProblemSpec& spec, const RunConfig& config);

/// Runs one scheme on a prepared mesh without writing anything.
RunOutcome run_scheme(const Mesh& mesh, const ProblemSpec& spec, const RunConfig& config,
                      DiscreteSolution* solution_out = nullptr);

/// Solves, writes solution.vtk, profile CSVs, config.json, the adaptive report
/// and appends to summary.csv in config.out.
RunOutcome cmd_solve(const RunConfig& config);

struct BenchOptions {
  std::vector<std::string> problems;
  std::vector<std::size_t> sizes;
  std::vector<double> deltas;
  RunConfig base;
};

struct BenchResult {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

/// Sweep over problems x sizes x schemes (x deltas for the adaptive scheme).
/// Rows already present in summary.csv are skipped.
BenchResult cmd_bench(const BenchOptions& options);

struct ConvergenceLevel {
  std::size_t cells = 0;
  double h = 0.0;
  double error = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;
  std::vector<double> orders;  // between consecutive levels
  /// Least-squares slope of log(error) against log(h) over all levels.
  double observed_order() const;
};

/// L2 norm of the cell-average error against spec.exact.
double cell_average_error(const DiscreteSolution& u, const ScalarField& exact);

ConvergenceResult run_convergence(const ProblemSpec& spec, Region scheme, const DGParams& params,
                                  const std::vector<std::size_t>& sizes, std::uint64_t seed, int lloyd_iterations);

}  // namespace fvdg
