#include "fvdg/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <unordered_map>

namespace fvdg {

Point project_to_line(const Point& p, const Point& a, const Point& b) {
  const Vec2 t = b - a;
  const double s = dot(p - a, t) / dot(t, t);
  return a + t * s;
}

double distance_to_segment(const Point& p, const Point& a, const Point& b) {
  const Vec2 t = b - a;
  const double len2 = dot(t, t);
  if (len2 == 0.0) return distance(p, a);
  const double s = std::clamp(dot(p - a, t) / len2, 0.0, 1.0);
  return distance(p, a + t * s);
}

double signed_area(std::span<const Point> poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

Point polygon_centroid(std::span<const Point> poly) {
  // Shifted to the first vertex to limit cancellation on small cells far from the origin.
  const std::size_t n = poly.size();
  const Point o = poly[0];
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i] - o;
    const Vec2 q = poly[(i + 1) % n] - o;
    const double w = cross(p, q);
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return o + Vec2{cx, cy} / (3.0 * a);
}

double polygon_diameter(std::span<const Point> poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, distance(poly[i], poly[j]));
  return d;
}

bool polygon_is_convex(std::span<const Point> poly, double rel_tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  const double scale = polygon_diameter(poly);
  const double sign = signed_area(poly) >= 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[(i + n - 1) % n];
    const Point& b = poly[i];
    const Point& c = poly[(i + 1) % n];
    if (sign * cross(b - a, c - b) < -rel_tol * scale * scale) return false;
  }
  return true;
}

bool point_in_polygon(const Point& p, std::span<const Point> poly, double tol) {
  const std::size_t n = poly.size();
  if (tol > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      if (distance_to_segment(p, poly[i], poly[(i + 1) % n]) <= tol) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<std::array<std::size_t, 3>> triangulate_polygon(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  std::vector<std::array<std::size_t, 3>> tris;
  if (n < 3) return tris;
  if (polygon_is_convex(poly)) {
    for (std::size_t i = 1; i + 1 < n; ++i) tris.push_back({0, i, i + 1});
    return tris;
  }
  // Ear clipping on a CCW copy of the index loop.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (signed_area(poly) < 0.0) std::reverse(idx.begin(), idx.end());
  auto is_ear = [&](std::size_t k) {
    const std::size_t m = idx.size();
    const Point& a = poly[idx[(k + m - 1) % m]];
    const Point& b = poly[idx[k]];
    const Point& c = poly[idx[(k + 1) % m]];
    if (cross(b - a, c - b) <= 0.0) return false;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k || j == (k + 1) % m || j == (k + m - 1) % m) continue;
      const Point& p = poly[idx[j]];
      if (p == a || p == b || p == c) continue;
      if (cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0)
        return false;
    }
    return true;
  };
  while (idx.size() > 3) {
    const std::size_t m = idx.size();
    std::size_t ear = m;
    for (std::size_t k = 0; k < m; ++k) {
      if (is_ear(k)) {
        ear = k;
        break;
      }
    }
    if (ear == m) {
      // Collinear runs can leave no strict ear; clip the least-degenerate corner.
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < m; ++k) {
        const Point& a = poly[idx[(k + m - 1) % m]];
        const Point& b = poly[idx[k]];
        const Point& c = poly[idx[(k + 1) % m]];
        const double cr = cross(b - a, c - b);
        if (cr > best) {
          best = cr;
          ear = k;
        }
      }
    }
    tris.push_back({idx[(ear + m - 1) % m], idx[ear], idx[(ear + 1) % m]});
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(ear));
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

double Domain::area() const {
  double a = std::abs(signed_area(outer.points));
  for (const auto& h : holes) a -= std::abs(signed_area(h.points));
  return a;
}

std::array<Point, 2> Domain::bounding_box() const {
  Point lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point hi{-lo.x, -lo.y};
  for (const auto& p : outer.points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return {lo, hi};
}

bool Domain::is_convex() const { return holes.empty() && polygon_is_convex(outer.points); }

bool Domain::contains(const Point& p, double tol) const {
  if (!point_in_polygon(p, outer.points)) return false;
  for (const auto& h : holes)
    if (point_in_polygon(p, h.points)) return false;
  return distance_to_boundary(p) > tol;
}

namespace {

template <typename F>
void for_each_boundary_edge(const Domain& d, F&& f) {
  auto loop = [&](const TaggedPolygon& poly) {
    const std::size_t n = poly.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& tag = i < poly.edge_tags.size() ? poly.edge_tags[i] : std::string{};
      f(poly.points[i], poly.points[(i + 1) % n], tag);
    }
  };
  loop(d.outer);
  for (const auto& h : d.holes) loop(h);
}

}  // namespace

double Domain::distance_to_boundary(const Point& p) const {
  double best = std::numeric_limits<double>::infinity();
  for_each_boundary_edge(*this, [&](const Point& a, const Point& b, const std::string&) {
    best = std::min(best, distance_to_segment(p, a, b));
  });
  return best;
}

std::string Domain::boundary_tag(const Point& p) const {
  double best = std::numeric_limits<double>::infinity();
  std::string tag;
  for_each_boundary_edge(*this, [&](const Point& a, const Point& b, const std::string& t) {
    const double d = distance_to_segment(p, a, b);
    if (d < best) {
      best = d;
      tag = t;
    }
  });
  return tag;
}

double Domain::length_scale() const {
  const auto [lo, hi] = bounding_box();
  return distance(lo, hi);
}

Domain rectangle_domain(double x0, double y0, double x1, double y1,
                        const std::array<std::string, 4>& tags) {
  Domain d;
  d.outer.points = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  d.outer.edge_tags = {tags[0], tags[1], tags[2], tags[3]};
  return d;
}

TaggedPolygon circle_polygon(Point center, double radius, int edges, const std::string& tag) {
  if (edges < 3) throw GeometryError("circle polygon needs at least 3 edges");
  TaggedPolygon poly;
  for (int i = 0; i < edges; ++i) {
    const double t = 2.0 * std::numbers::pi * i / edges;
    poly.points.push_back(center + Vec2{radius * std::cos(t), radius * std::sin(t)});
    poly.edge_tags.push_back(tag);
  }
  return poly;
}

// ---------------------------------------------------------------------------
// Partition / facets
// ---------------------------------------------------------------------------

std::size_t Partition::count(Region r) const {
  return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), r));
}

double Partition::fraction(Region r) const {
  return tags.empty() ? 0.0 : static_cast<double>(count(r)) / static_cast<double>(tags.size());
}

const char* to_string(FacetKind k) {
  switch (k) {
    case FacetKind::unclassified: return "unclassified";
    case FacetKind::fv_interior: return "FV-interior";
    case FacetKind::fv_boundary: return "FV-boundary";
    case FacetKind::dg_interior: return "DG-interior";
    case FacetKind::dg_boundary: return "DG-boundary";
    case FacetKind::interface: return "FV-DG-interface";
  }
  return "?";
}

std::vector<Point> Mesh::cell_polygon(std::size_t c) const {
  std::vector<Point> poly;
  poly.reserve(cells[c].size());
  for (std::size_t v : cells[c]) poly.push_back(vertices[v]);
  return poly;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (double x : areas) a += x;
  return a;
}

Mesh build_mesh(std::vector<Point> vertices, std::vector<std::vector<std::size_t>> cells,
                std::vector<Point> sites, Domain domain) {
  if (cells.size() != sites.size())
    throw GeometryError("mesh needs exactly one site per cell");
  Mesh m;
  m.vertices = std::move(vertices);
  m.cells = std::move(cells);
  m.sites = std::move(sites);
  m.domain = std::move(domain);

  const std::size_t nc = m.cells.size();
  const std::size_t nv = m.vertices.size();
  m.areas.resize(nc);
  m.centroids.resize(nc);
  m.diameters.resize(nc);
  m.convex.resize(nc);
  m.cell_facets.assign(nc, {});
  m.vertex_cells.assign(nv, {});

  for (std::size_t c = 0; c < nc; ++c) {
    auto& loop = m.cells[c];
    if (loop.size() < 3) throw GeometryError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    for (std::size_t v : loop)
      if (v >= nv) throw GeometryError("cell " + std::to_string(c) + " references a missing vertex");
    auto poly = m.cell_polygon(c);
    double a = signed_area(poly);
    if (a < 0.0) {
      std::reverse(loop.begin(), loop.end());
      poly = m.cell_polygon(c);
      a = -a;
    }
    if (!(a > 0.0)) throw GeometryError("cell " + std::to_string(c) + " has zero area");
    m.areas[c] = a;
    m.centroids[c] = polygon_centroid(poly);
    m.diameters[c] = polygon_diameter(poly);
    m.convex[c] = polygon_is_convex(poly);
    if (!point_in_polygon(m.sites[c], poly)) {
      throw GeometryError("site of cell " + std::to_string(c) + " does not lie inside the cell");
    }
    for (std::size_t v : loop) m.vertex_cells[v].push_back(c);
  }

  std::unordered_map<std::uint64_t, std::size_t> edge_to_facet;
  edge_to_facet.reserve(nc * 8);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& loop = m.cells[c];
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const std::size_t a = loop[k];
      const std::size_t b = loop[(k + 1) % loop.size()];
      if (a == b) throw GeometryError("cell " + std::to_string(c) + " has a repeated vertex");
      const std::uint64_t key = static_cast<std::uint64_t>(std::min(a, b)) * nv + std::max(a, b);
      auto it = edge_to_facet.find(key);
      if (it == edge_to_facet.end()) {
        Facet f;
        f.vertices = {a, b};
        f.owner = c;
        const Vec2 t = m.vertices[b] - m.vertices[a];
        f.measure = norm(t);
        f.normal = Vec2{t.y, -t.x} / f.measure;
        f.midpoint = (m.vertices[a] + m.vertices[b]) * 0.5;
        edge_to_facet.emplace(key, m.facets.size());
        m.cell_facets[c].push_back(m.facets.size());
        m.facets.push_back(f);
      } else {
        Facet& f = m.facets[it->second];
        if (f.neighbor != no_cell || f.vertices[0] != b || f.vertices[1] != a) {
          throw GeometryError("inconsistent adjacency at edge (" + std::to_string(a) + "," +
                              std::to_string(b) + ")");
        }
        f.neighbor = c;
        m.cell_facets[c].push_back(it->second);
      }
    }
  }

  if (!m.domain.empty()) {
    for (auto& f : m.facets)
      if (f.is_boundary()) f.tag = m.domain.boundary_tag(f.midpoint);
  }
  return m;
}

Mesh structured_quad_mesh(std::size_t nx, std::size_t ny, double x0, double y0, double x1,
                          double y1) {
  if (nx == 0 || ny == 0) throw GeometryError("structured mesh needs nx, ny >= 1");
  std::vector<Point> verts;
  const double hx = (x1 - x0) / static_cast<double>(nx);
  const double hy = (y1 - y0) / static_cast<double>(ny);
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      verts.push_back({x0 + static_cast<double>(i) * hx, y0 + static_cast<double>(j) * hy});
  std::vector<std::vector<std::size_t>> cells;
  std::vector<Point> sites;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t v0 = j * (nx + 1) + i;
      cells.push_back({v0, v0 + 1, v0 + nx + 2, v0 + nx + 1});
      sites.push_back({x0 + (static_cast<double>(i) + 0.5) * hx, y0 + (static_cast<double>(j) + 0.5) * hy});
    }
  }
  return build_mesh(std::move(verts), std::move(cells), std::move(sites),
                    rectangle_domain(x0, y0, x1, y1));
}

AdmissibilityReport check_tpfa_admissible(const Mesh& mesh, double tol) {
  AdmissibilityReport rep;
  rep.projections.assign(mesh.facets.size(), std::nullopt);
  for (std::size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    const Facet& f = mesh.facets[fi];
    const Point& a = mesh.vertices[f.vertices[0]];
    const Point& b = mesh.vertices[f.vertices[1]];
    if (f.is_boundary() || f.kind == FacetKind::interface) {
      const std::size_t cell =
          f.kind == FacetKind::interface ? f.neighbor : f.owner;  // FV side of an interface
      const Point& x = mesh.sites[cell];
      rep.projections[fi] = project_to_line(x, a, b);
      if (distance_to_segment(x, a, b) <= 1e-12 * mesh.diameters[cell]) {
        rep.ok = false;
        rep.offending_facets.push_back(fi);
      }
      if (f.is_boundary()) continue;
    }
    const Vec2 t = b - a;
    const Vec2 d = mesh.sites[f.neighbor] - mesh.sites[f.owner];
    const double c = std::min(1.0, std::abs(dot(t, d)) / (norm(t) * norm(d)));
    const double defect = std::asin(c);
    rep.worst_orthogonality_defect = std::max(rep.worst_orthogonality_defect, defect);
    if (defect > tol) {
      rep.ok = false;
      rep.offending_facets.push_back(fi);
    }
  }
  std::sort(rep.offending_facets.begin(), rep.offending_facets.end());
  rep.offending_facets.erase(std::unique(rep.offending_facets.begin(), rep.offending_facets.end()),
                             rep.offending_facets.end());
  return rep;
}

double shape_regularity(const Mesh& mesh) {
  double theta = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.facets) {
    if (f.kind == FacetKind::unclassified) continue;
    double h = mesh.diameters[f.owner];
    if (!f.is_boundary()) h = std::max(h, mesh.diameters[f.neighbor]);
    theta = std::min(theta, f.d_gamma / h);
  }
  return theta;
}

Mesh classify_facets(const Mesh& mesh, const Partition& partition, const BoundaryMap& bcs) {
  if (partition.size() != mesh.num_cells())
    throw GeometryError("partition size does not match the number of cells");
  Mesh out = mesh;
  for (std::size_t fi = 0; fi < out.facets.size(); ++fi) {
    Facet& f = out.facets[fi];
    if (f.owner >= out.num_cells() || (f.neighbor != no_cell && f.neighbor >= out.num_cells()))
      throw GeometryError("facet " + std::to_string(fi) + " references a missing cell");
    const Point& a = out.vertices[f.vertices[0]];
    const Point& b = out.vertices[f.vertices[1]];
    f.y_gamma.reset();
    if (f.is_boundary()) {
      f.kind = partition.is_fv(f.owner) ? FacetKind::fv_boundary : FacetKind::dg_boundary;
      f.boundary = bcs.kind ? bcs.kind(f.tag) : BoundaryKind::none;
      if (f.boundary == BoundaryKind::none)
        throw GeometryError("boundary facet " + std::to_string(fi) + " with tag '" + f.tag +
                            "' has no boundary condition");
      f.inflow = bcs.beta ? dot(bcs.beta(f.midpoint), f.normal) < -1e-14 : false;
      const Point y = project_to_line(out.sites[f.owner], a, b);
      f.y_gamma = y;
      f.d_gamma = norm(out.sites[f.owner] - y);
      f.h_gamma = out.diameters[f.owner];
      continue;
    }
    f.boundary = BoundaryKind::none;
    f.inflow = false;
    const bool fv_o = partition.is_fv(f.owner);
    const bool fv_n = partition.is_fv(f.neighbor);
    f.h_gamma = std::max(out.diameters[f.owner], out.diameters[f.neighbor]);
    if (fv_o == fv_n) {
      f.kind = fv_o ? FacetKind::fv_interior : FacetKind::dg_interior;
      f.d_gamma = norm(out.sites[f.neighbor] - out.sites[f.owner]);
      continue;
    }
    f.kind = FacetKind::interface;
    if (fv_o) {
      std::swap(f.owner, f.neighbor);
      std::swap(f.vertices[0], f.vertices[1]);
      f.normal = -f.normal;
    }
    const Point& x_fv = out.sites[f.neighbor];
    const Point y = project_to_line(x_fv, out.vertices[f.vertices[0]], out.vertices[f.vertices[1]]);
    f.y_gamma = y;
    f.d_gamma = norm(x_fv - y);
  }
  return out;
}

CellSet vertex_neighborhood(const Mesh& mesh, const CellSet& cells) {
  std::vector<char> mark(mesh.num_cells(), 0);
  for (std::size_t c : cells) {
    mark[c] = 1;
    for (std::size_t v : mesh.cells[c])
      for (std::size_t n : mesh.vertex_cells[v]) mark[n] = 1;
  }
  CellSet out;
  for (std::size_t c = 0; c < mark.size(); ++c)
    if (mark[c]) out.push_back(c);
  return out;
}

double min_interior_angle(const Mesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& loop : mesh.cells) {
    const std::size_t n = loop.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Point& prev = mesh.vertices[loop[(k + n - 1) % n]];
      const Point& v = mesh.vertices[loop[k]];
      const Point& next = mesh.vertices[loop[(k + 1) % n]];
      double ang = std::atan2(cross(next - v, prev - v), dot(next - v, prev - v));
      if (ang < 0.0) ang += 2.0 * std::numbers::pi;
      best = std::min(best, ang);
    }
  }
  return best;
}

std::size_t locate_cell(const Mesh& mesh, const Point& p, double rel_tol) {
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double r = mesh.diameters[c];
    if (distance(p, mesh.centroids[c]) > r * (1.0 + 1e-9)) continue;
    if (point_in_polygon(p, mesh.cell_polygon(c), rel_tol * r)) return c;
  }
  return no_cell;
}

}  // namespace fvdg
