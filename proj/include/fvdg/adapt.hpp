#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fvdg/assembly.hpp"
#include "fvdg/limiter.hpp"
#include "fvdg/metrics_io.hpp"
#include "fvdg/problem.hpp"

namespace fvdg {

class AdaptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdmissibleInterval {
  double u_star = 0.0;
  double u_upper = 1.0;
  double delta_under = 0.0;
  double delta_over = 0.0;

  static AdmissibleInterval from(const ProblemSpec& spec, double delta) {
    return {spec.u_min, spec.u_max, delta, delta};
  }
  double lower() const { return u_star - delta_under; }
  double upper() const { return u_upper + delta_over; }
  /// Distance of x to [lower(), upper()].
  double dist(double x) const { return std::max({lower() - x, 0.0, x - upper()}); }
  void validate() const;
};

enum class Variant { cell_average, nodal };
enum class NodeSet { vertices, quadrature_points };
enum class Termination { none, tolerance, all_fv_fallback, cap };

const char* to_string(Termination t);

struct AdaptiveConfig {
  double delta = 1e-9;
  std::optional<double> eps_bp;  // defaults to delta
  double eps_h = std::numeric_limits<double>::infinity();
  int max_bp_iters = 50;
  int max_h_iters = 8;
  double mark_fraction = 0.2;
  int sites_per_cell = 3;
  Variant variant = Variant::cell_average;
  NodeSet node_set = NodeSet::vertices;
  bool skip_limiter = false;
  bool accumulate = true;
  bool iterative_solver = false;
  std::uint64_t seed = 1;

  double bp_tolerance() const { return eps_bp.value_or(delta); }
  void validate() const;
};

struct AdaptiveRecord {
  int iter = 0;
  double eta_bp = 0.0;
  std::size_t n_violations = 0;
  double fv_fraction = 0.0;
  double dg_fraction = 0.0;
};

struct AdaptiveReport {
  std::vector<AdaptiveRecord> records;
  std::vector<double> eta_h;  // accuracy-phase history
  int h_iterations = 0;
  int bp_iterations = 0;  // number of repartitions
  Termination terminated_by = Termination::none;
  double final_eta_bp = 0.0;
  std::size_t limited_cells = 0;
  std::optional<double> osc;
};

struct Screening {
  double eta = 0.0;
  CellSet violations;
};

Screening eta_bp_cell(const DiscreteSolution& u, const AdmissibleInterval& I);
/// nodes[c] are the screening points of cell c.
Screening eta_bp_node(const DiscreteSolution& u, const AdmissibleInterval& I,
                      const std::vector<std::vector<Point>>& nodes);
std::vector<std::vector<Point>> screening_nodes(const Mesh& mesh, NodeSet set, int degree);

/// Demotes violations and their vertex neighborhoods to FV. With
/// `accumulate`, cells already FV stay FV; otherwise the FV set is rebuilt.
Partition partition_step(const Mesh& mesh, const Partition& current, const CellSet& violations,
                         bool accumulate = true);

struct JumpIndicator {
  std::vector<double> eta_cell;  // eta_E
  double eta = 0.0;              // (sum eta_E^2)^(1/2)
};

JumpIndicator jump_indicator(const DiscreteSolution& u);

struct AdaptiveResult {
  DiscreteSolution solution;  // limited unless skipped
  DiscreteSolution unlimited;
  Partition partition;
  AdaptiveReport report;
  std::shared_ptr<const Mesh> mesh;
};

/// Solves once on a fixed partition.
DiscreteSolution solve_partition(const Mesh& mesh, const Partition& partition, const ProblemSpec& spec,
                                 const DGParams& params, bool iterative = false,
                                 std::shared_ptr<const std::vector<CellBasis>> bases = nullptr);

AdaptiveResult run_adaptive(const Mesh& mesh0, const ProblemSpec& spec, const DGParams& params,
                            const AdaptiveConfig& config);

void write_report_csv(const AdaptiveReport& report, const std::filesystem::path& path);

/// Table row for an adaptive run; throws on a report without iterations.
SummaryRow summary_row(const AdaptiveReport& report, const OscReport& osc, const std::string& problem,
                       std::size_t cells, double delta, const Partition& partition);

}  // namespace fvdg
