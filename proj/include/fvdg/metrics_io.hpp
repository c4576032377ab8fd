#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvdg/assembly.hpp"

namespace fvdg {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class UndershootForm {
  corrected,  // max{0, u_min - min_E u_h}
  literal,    // max{0, u_min - max_E u_h}
};

struct OscReport {
  double osc = 0.0;
  std::vector<double> overshoot;   // per cell
  std::vector<double> undershoot;  // per cell
  double u_min = 0.0;
  double u_max = 0.0;
};

/// Per-cell extremes sampled at vertices, centroid and volume quadrature points.
std::vector<Point> sample_points(const Mesh& mesh, std::size_t cell, int degree);

OscReport osc_metric(const DiscreteSolution& u, double u_min, double u_max,
                     UndershootForm form = UndershootForm::corrected);

/// Point location over a uniform grid of cell bounding boxes; ties go to the
/// lowest cell index.
class CellLocator {
 public:
  explicit CellLocator(const Mesh& mesh);
  std::size_t locate(const Point& p) const;

 private:
  const Mesh* mesh_;
  Point lo_;
  double cell_ = 1.0;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

struct LineProfile {
  std::vector<double> s;  // parameter in [0, 1]
  std::vector<Point> points;
  std::vector<std::size_t> cells;
  std::vector<double> values;
};

LineProfile line_profile(const DiscreteSolution& u, const Point& p0, const Point& p1, std::size_t n);
void write_profile_csv(const LineProfile& profile, const std::filesystem::path& path);

/// Legacy ASCII VTK with cell data u_avg, region, violation and point data u.
/// `violation` is the distance of each cell average to [lower, upper].
void write_vtk(const DiscreteSolution& u, const Partition& partition, double lower, double upper,
               const std::filesystem::path& path);

struct VtkData {
  std::vector<Point> points;
  std::vector<std::vector<std::size_t>> cells;
  std::vector<int> cell_types;
  std::map<std::string, std::vector<double>> cell_data;
  std::map<std::string, std::vector<double>> point_data;
};

VtkData read_vtk(const std::filesystem::path& path);

struct SummaryRow {
  std::string problem;
  std::string scheme;
  std::size_t cells = 0;
  double osc = 0.0;
  std::optional<int> iters;  // "--" when absent
  std::optional<double> delta;
  double fv_fraction = 0.0;
  double dg_fraction = 0.0;
  std::string status = "ok";
};

std::string summary_header();
std::string format_summary_row(const SummaryRow& row);
/// Appends the row, writing the header first when the file is new or empty.
void append_summary_row(const SummaryRow& row, const std::filesystem::path& path);
/// Existing rows keyed by problem,scheme,cells,delta (for resumable sweeps).
std::map<std::string, std::string> read_summary_rows(const std::filesystem::path& path);
std::string summary_key(const SummaryRow& row);

/// Mesh exchange format: vertices, cells, sites and boundary_tags (boundary
/// facet index, in facet order, to tag).
void write_mesh_json(const Mesh& mesh, const std::filesystem::path& path);
Mesh read_mesh_json(const std::filesystem::path& path);

/// %.17g, or inf / -inf / nan spelled out.
std::string format_double(double v);
/// Scientific notation with 6 significant digits.
std::string format_sci(double v);

}  // namespace fvdg
