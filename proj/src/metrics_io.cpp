#include "fvdg/metrics_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fvdg/quadrature.hpp"

namespace fvdg {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

std::vector<Point> sample_points(const Mesh& mesh, std::size_t cell, int degree) {
  std::vector<Point> pts;
  for (std::size_t v : mesh.cells[cell]) pts.push_back(mesh.vertices[v]);
  pts.push_back(mesh.centroids[cell]);
  const QuadratureRule rule = polygon_rule(mesh, cell, 2 * degree + 2);
  pts.insert(pts.end(), rule.points.begin(), rule.points.end());
  return pts;
}

OscReport osc_metric(const DiscreteSolution& u, double u_min, double u_max, UndershootForm form) {
  const Mesh& mesh = *u.mesh;
  const std::size_t n = mesh.num_cells();
  OscReport r;
  r.u_min = u_min;
  r.u_max = u_max;
  r.overshoot.assign(n, 0.0);
  r.undershoot.assign(n, 0.0);
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double hi, lo;
    if (u.partition.is_fv(c)) {
      hi = lo = u.coefficients[c][0];
    } else {
      hi = -std::numeric_limits<double>::infinity();
      lo = std::numeric_limits<double>::infinity();
      for (const Point& p : sample_points(mesh, c, u.degree)) {
        const double v = u.evaluate(c, p);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
    }
    r.overshoot[c] = std::max(0.0, hi - u_max);
    r.undershoot[c] = std::max(0.0, u_min - (form == UndershootForm::corrected ? lo : hi));
    sum += r.overshoot[c] + r.undershoot[c];
  }
  r.osc = n > 0 ? sum / static_cast<double>(n) : 0.0;
  return r;
}

CellLocator::CellLocator(const Mesh& mesh) : mesh_(&mesh) {
  if (mesh.num_cells() == 0) return;
  Point lo = mesh.vertices.front(), hi = lo;
  for (const Point& p : mesh.vertices) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  lo_ = lo;
  const double w = std::max(hi.x - lo.x, 1e-300), h = std::max(hi.y - lo.y, 1e-300);
  cell_ = std::sqrt(w * h / static_cast<double>(mesh.num_cells()));
  nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(w / cell_)));
  ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(h / cell_)));
  buckets_.resize(nx_ * ny_);
  auto clampi = [](double v, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(std::max(0.0, v)));
  };
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    Point a = mesh.vertices[mesh.cells[c][0]], b = a;
    for (std::size_t v : mesh.cells[c]) {
      a = {std::min(a.x, mesh.vertices[v].x), std::min(a.y, mesh.vertices[v].y)};
      b = {std::max(b.x, mesh.vertices[v].x), std::max(b.y, mesh.vertices[v].y)};
    }
    const double pad = 1e-9 * mesh.diameters[c];
    const std::size_t x0 = clampi((a.x - pad - lo_.x) / cell_, nx_), x1 = clampi((b.x + pad - lo_.x) / cell_, nx_);
    const std::size_t y0 = clampi((a.y - pad - lo_.y) / cell_, ny_), y1 = clampi((b.y + pad - lo_.y) / cell_, ny_);
    for (std::size_t y = y0; y <= y1; ++y)
      for (std::size_t x = x0; x <= x1; ++x) buckets_[y * nx_ + x].push_back(c);
  }
}

std::size_t CellLocator::locate(const Point& p) const {
  if (buckets_.empty()) return no_cell;
  const double fx = (p.x - lo_.x) / cell_, fy = (p.y - lo_.y) / cell_;
  if (fx < -1.0 || fy < -1.0 || fx > static_cast<double>(nx_) + 1.0 || fy > static_cast<double>(ny_) + 1.0) return no_cell;
  const auto x = std::min(nx_ - 1, static_cast<std::size_t>(std::max(0.0, fx)));
  const auto y = std::min(ny_ - 1, static_cast<std::size_t>(std::max(0.0, fy)));
  std::size_t best = no_cell;
  for (std::size_t c : buckets_[y * nx_ + x]) {
    if (c >= best) continue;
    const auto poly = mesh_->cell_polygon(c);
    if (point_in_polygon(p, poly, 1e-10 * mesh_->diameters[c])) best = c;
  }
  return best;
}

LineProfile line_profile(const DiscreteSolution& u, const Point& p0, const Point& p1, std::size_t n) {
  if (n < 2) throw IoError("line profile needs at least 2 samples");
  CellLocator locator(*u.mesh);
  LineProfile prof;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    const Point p = p0 + (p1 - p0) * s;
    const std::size_t c = locator.locate(p);
    if (c == no_cell) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "profile sample (%.6g, %.6g) lies outside the mesh", p.x, p.y);
      throw IoError(buf);
    }
    prof.s.push_back(s);
    prof.points.push_back(p);
    prof.cells.push_back(c);
    prof.values.push_back(u.evaluate(c, p));
  }
  return prof;
}

void write_profile_csv(const LineProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "s,x,y,u,cell\n";
  for (std::size_t i = 0; i < profile.s.size(); ++i)
    out << format_double(profile.s[i]) << ',' << format_double(profile.points[i].x) << ','
        << format_double(profile.points[i].y) << ',' << format_double(profile.values[i]) << ',' << profile.cells[i]
        << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

void write_vtk(const DiscreteSolution& u, const Partition& partition, double lower, double upper,
               const std::filesystem::path& path) {
  const Mesh& mesh = *u.mesh;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# vtk DataFile Version 3.0\nfvdg solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Point& p : mesh.vertices) out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  std::size_t size = 0;
  for (const auto& c : mesh.cells) size += c.size() + 1;
  out << "CELLS " << mesh.num_cells() << ' ' << size << '\n';
  for (const auto& c : mesh.cells) {
    out << c.size();
    for (std::size_t v : c) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) out << "7\n";

  const auto avg = u.cell_averages();
  out << "CELL_DATA " << mesh.num_cells() << '\n';
  out << "SCALARS u_avg double 1\nLOOKUP_TABLE default\n";
  for (double a : avg) out << format_double(a) << '\n';
  out << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) out << (partition.is_dg(c) ? 1 : 0) << '\n';
  out << "SCALARS violation double 1\nLOOKUP_TABLE default\n";
  for (double a : avg) out << format_double(std::max({lower - a, 0.0, a - upper})) << '\n';

  out << "POINT_DATA " << mesh.vertices.size() << '\n';
  out << "SCALARS u double 1\nLOOKUP_TABLE default\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto& cells = mesh.vertex_cells[v];
    const double val = cells.empty() ? 0.0 : u.evaluate(*std::min_element(cells.begin(), cells.end()), mesh.vertices[v]);
    out << format_double(val) << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

VtkData read_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  VtkData d;
  std::string line, word;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw IoError(path.string() + ": not a legacy VTK file");
  std::getline(in, line);  // title
  in >> word;
  if (word != "ASCII") throw IoError(path.string() + ": only ASCII VTK is supported");
  std::map<std::string, std::vector<double>>* section = nullptr;
  std::size_t section_size = 0;
  while (in >> word) {
    if (word == "DATASET") {
      in >> word;
      if (word != "UNSTRUCTURED_GRID") throw IoError(path.string() + ": expected UNSTRUCTURED_GRID");
    } else if (word == "POINTS") {
      std::size_t n;
      in >> n >> word;
      d.points.resize(n);
      for (auto& p : d.points) {
        double z;
        in >> p.x >> p.y >> z;
      }
    } else if (word == "CELLS") {
      std::size_t n, total;
      in >> n >> total;
      d.cells.resize(n);
      for (auto& c : d.cells) {
        std::size_t k;
        in >> k;
        c.resize(k);
        for (auto& v : c) in >> v;
      }
    } else if (word == "CELL_TYPES") {
      std::size_t n;
      in >> n;
      d.cell_types.resize(n);
      for (auto& t : d.cell_types) in >> t;
    } else if (word == "CELL_DATA") {
      in >> section_size;
      section = &d.cell_data;
    } else if (word == "POINT_DATA") {
      in >> section_size;
      section = &d.point_data;
    } else if (word == "SCALARS") {
      std::string name, type;
      in >> name >> type;
      std::getline(in, line);
      in >> word >> line;  // LOOKUP_TABLE default
      if (!section) throw IoError(path.string() + ": SCALARS outside a data section");
      auto& arr = (*section)[name];
      arr.resize(section_size);
      for (auto& v : arr) {
        in >> word;
        v = std::stod(word);
      }
    } else {
      throw IoError(path.string() + ": unexpected keyword " + word);
    }
    if (!in) throw IoError(path.string() + ": truncated file");
  }
  return d;
}

std::string summary_header() { return "problem,scheme,cells,osc,iters,delta,fv_fraction,dg_fraction,status"; }

std::string format_summary_row(const SummaryRow& r) {
  std::ostringstream s;
  s << r.problem << ',' << r.scheme << ',' << r.cells << ',' << format_sci(r.osc) << ','
    << (r.iters ? std::to_string(*r.iters) : "--") << ',' << (r.delta ? format_sci(*r.delta) : "--") << ','
    << format_sci(r.fv_fraction) << ',' << format_sci(r.dg_fraction) << ',' << r.status;
  return s.str();
}

std::string summary_key(const SummaryRow& r) {
  return r.problem + ',' + r.scheme + ',' + std::to_string(r.cells) + ',' + (r.delta ? format_sci(*r.delta) : "--");
}

void append_summary_row(const SummaryRow& row, const std::filesystem::path& path) {
  const std::string text = format_summary_row(row);
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write " + path.string());
  if (fresh) out << summary_header() << '\n';
  out << text << '\n';
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

std::map<std::string, std::string> read_summary_rows(const std::filesystem::path& path) {
  std::map<std::string, std::string> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("problem,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() < 6) continue;
    rows[f[0] + ',' + f[1] + ',' + f[2] + ',' + f[5]] = line;
  }
  return rows;
}

void write_mesh_json(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  auto pt = [&](const Point& p) { out << '[' << format_double(p.x) << ", " << format_double(p.y) << ']'; };
  out << "{\n  \"vertices\": [";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    out << (i ? ", " : "");
    pt(mesh.vertices[i]);
  }
  out << "],\n  \"cells\": [";
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    out << (c ? ", " : "") << '[';
    for (std::size_t k = 0; k < mesh.cells[c].size(); ++k) out << (k ? ", " : "") << mesh.cells[c][k];
    out << ']';
  }
  out << "],\n  \"sites\": [";
  for (std::size_t i = 0; i < mesh.sites.size(); ++i) {
    out << (i ? ", " : "");
    pt(mesh.sites[i]);
  }
  out << "],\n  \"boundary_tags\": {";
  std::size_t b = 0;
  bool first = true;
  for (const Facet& f : mesh.facets) {
    if (!f.is_boundary()) continue;
    out << (first ? "" : ", ") << '"' << b++ << "\": " << nlohmann::json(f.tag).dump();
    first = false;
  }
  out << "}\n}\n";
  if (!out) throw IoError("error writing " + path.string());
}

Mesh read_mesh_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    std::vector<Point> vertices, sites;
    std::vector<std::vector<std::size_t>> cells;
    for (const auto& p : j.at("vertices")) vertices.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& p : j.at("sites")) sites.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& c : j.at("cells")) cells.push_back(c.get<std::vector<std::size_t>>());
    Mesh mesh = build_mesh(std::move(vertices), std::move(cells), std::move(sites), Domain{});
    std::vector<std::size_t> boundary;
    for (std::size_t f = 0; f < mesh.facets.size(); ++f)
      if (mesh.facets[f].is_boundary()) boundary.push_back(f);
    if (j.contains("boundary_tags")) {
      for (const auto& [key, tag] : j.at("boundary_tags").items()) {
        const std::size_t b = std::stoul(key);
        if (b >= boundary.size()) throw IoError(path.string() + ": boundary tag index " + key + " out of range");
        mesh.facets[boundary[b]].tag = tag.get<std::string>();
      }
    }
    return mesh;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace fvdg
