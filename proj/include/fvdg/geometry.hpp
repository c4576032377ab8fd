#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fvdg {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

using Point = Vec2;

inline constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point& a, const Point& b) { return norm(b - a); }

inline constexpr std::size_t no_cell = std::numeric_limits<std::size_t>::max();

/// Orthogonal projection of p onto the infinite line through a and b.
Point project_to_line(const Point& p, const Point& a, const Point& b);
double distance_to_segment(const Point& p, const Point& a, const Point& b);

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

double signed_area(std::span<const Point> poly);
Point polygon_centroid(std::span<const Point> poly);
double polygon_diameter(std::span<const Point> poly);
bool polygon_is_convex(std::span<const Point> poly, double rel_tol = 1e-12);
/// Even-odd containment test; points within `tol` of the boundary count as inside.
bool point_in_polygon(const Point& p, std::span<const Point> poly, double tol = 0.0);
/// Triangulation as index triples into `poly`. Convex polygons are fanned from
/// vertex 0; non-convex ones are ear-clipped.
std::vector<std::array<std::size_t, 3>> triangulate_polygon(std::span<const Point> poly);

/// Closed polygon whose edge i runs from points[i] to points[i+1] and carries
/// edge_tags[i] (boundary-condition label).
struct TaggedPolygon {
  std::vector<Point> points;
  std::vector<std::string> edge_tags;
};

/// Polygonal domain with optional polygonal holes. Outer loop is CCW, hole
/// loops are stored CCW as well.
struct Domain {
  TaggedPolygon outer;
  std::vector<TaggedPolygon> holes;

  bool empty() const { return outer.points.empty(); }
  double area() const;
  std::array<Point, 2> bounding_box() const;
  bool is_convex() const;
  /// Strict interior test (points on the boundary are outside).
  bool contains(const Point& p, double tol = 0.0) const;
  double distance_to_boundary(const Point& p) const;
  /// Tag of the boundary edge closest to p.
  std::string boundary_tag(const Point& p) const;
  double length_scale() const;
};

Domain rectangle_domain(double x0, double y0, double x1, double y1,
                        const std::array<std::string, 4>& tags = {"bottom", "right", "top", "left"});
/// Regular n-gon approximating a circle, CCW.
TaggedPolygon circle_polygon(Point center, double radius, int edges, const std::string& tag);

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

enum class Region : std::uint8_t { fv = 0, dg = 1 };

struct Partition {
  std::vector<Region> tags;

  static Partition uniform(std::size_t cells, Region r) { return {std::vector<Region>(cells, r)}; }
  std::size_t size() const { return tags.size(); }
  bool is_fv(std::size_t c) const { return tags[c] == Region::fv; }
  bool is_dg(std::size_t c) const { return tags[c] == Region::dg; }
  std::size_t count(Region r) const;
  double fraction(Region r) const;
  bool operator==(const Partition&) const = default;
};

enum class FacetKind : std::uint8_t {
  unclassified,
  fv_interior,
  fv_boundary,
  dg_interior,
  dg_boundary,
  interface,
};

enum class BoundaryKind : std::uint8_t { none, dirichlet, neumann };

const char* to_string(FacetKind k);

struct Facet {
  std::array<std::size_t, 2> vertices{};
  std::size_t owner = no_cell;
  std::size_t neighbor = no_cell;  // no_cell on the domain boundary
  Vec2 normal;                     // unit, owner -> neighbor (outward on boundary)
  double measure = 0.0;
  Point midpoint;
  double d_gamma = 0.0;
  double h_gamma = 0.0;
  FacetKind kind = FacetKind::unclassified;
  std::string tag;
  BoundaryKind boundary = BoundaryKind::none;
  bool inflow = false;
  std::optional<Point> y_gamma;

  bool is_boundary() const { return neighbor == no_cell; }
};

using CellSet = std::vector<std::size_t>;  // sorted, unique

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::vector<std::size_t>> cells;
  std::vector<Point> sites;
  std::vector<Facet> facets;
  Domain domain;

  // Derived data, filled by build_mesh.
  std::vector<double> areas;
  std::vector<Point> centroids;
  std::vector<double> diameters;
  std::vector<bool> convex;
  std::vector<std::vector<std::size_t>> cell_facets;
  std::vector<std::vector<std::size_t>> vertex_cells;

  std::size_t num_cells() const { return cells.size(); }
  std::vector<Point> cell_polygon(std::size_t c) const;
  double total_area() const;
};

/// Assembles a mesh from raw arrays: orients cells CCW, builds facets and
/// adjacency, tags boundary facets from the domain (when non-empty) and
/// validates the mesh invariants.
Mesh build_mesh(std::vector<Point> vertices, std::vector<std::vector<std::size_t>> cells,
                std::vector<Point> sites, Domain domain);

/// Axis-aligned nx-by-ny grid with cell centers as sites.
Mesh structured_quad_mesh(std::size_t nx, std::size_t ny, double x0, double y0, double x1,
                          double y1);

/// Clipped Voronoi diagram of `sites` restricted to `domain`.
Mesh generate_voronoi_mesh(std::span<const Point> sites, const Domain& domain);

/// As generate_voronoi_mesh, except that a cell cut in pieces by a non-convex
/// boundary gets an extra site in each detached piece. The mesh may therefore
/// have more cells than `sites`.
Mesh generate_voronoi_mesh_adding_sites(std::vector<Point> sites, const Domain& domain, int max_rounds = 8);

/// Moves every site to its cell centroid and regenerates, `iterations` times.
/// A centroid that falls outside its (non-convex) cell leaves the site in place.
Mesh lloyd_relax(const Mesh& mesh, int iterations);

/// Uniformly random sites strictly inside the domain.
std::vector<Point> random_sites(const Domain& domain, std::size_t count, std::uint64_t seed);

/// Random sites followed by Lloyd relaxation.
Mesh make_voronoi_mesh(const Domain& domain, std::size_t cells, std::uint64_t seed,
                       int lloyd_iterations);

struct AdmissibilityReport {
  bool ok = true;
  double worst_orthogonality_defect = 0.0;  // radians
  std::vector<std::size_t> offending_facets;
  std::vector<std::optional<Point>> projections;  // y_gamma per facet (boundary facets only)
};

AdmissibilityReport check_tpfa_admissible(const Mesh& mesh, double tol = 1e-8);

/// Smallest d_gamma / max(h) ratio over facets of a classified mesh.
double shape_regularity(const Mesh& mesh);

struct BoundaryMap {
  std::function<BoundaryKind(const std::string& tag)> kind;
  std::function<Vec2(const Point&)> beta;
};

/// Returns a copy of `mesh` with facet kinds, interface orientation (DG -> FV),
/// d_gamma, h_gamma, y_gamma, boundary kinds and inflow flags filled in.
Mesh classify_facets(const Mesh& mesh, const Partition& partition, const BoundaryMap& bcs);

/// cells plus every cell sharing at least one vertex with a member.
CellSet vertex_neighborhood(const Mesh& mesh, const CellSet& cells);

/// Existing sites plus `count_per_cell` new sites per marked cell, drawn
/// uniformly from a disk of radius radius_factor * h_E around the centroid and
/// kept only if they fall inside the cell.
std::vector<Point> refine_sites(const Mesh& mesh, const CellSet& marked, std::uint64_t seed,
                                int count_per_cell, double radius_factor = 0.25);

/// Smallest interior angle over all cell corners (radians).
double min_interior_angle(const Mesh& mesh);

/// First cell (lowest index) containing p within a relative tolerance, or no_cell.
std::size_t locate_cell(const Mesh& mesh, const Point& p, double rel_tol = 1e-10);

}  // namespace fvdg
