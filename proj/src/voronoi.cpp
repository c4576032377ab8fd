#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "fvdg/geometry.hpp"

namespace fvdg {

namespace {

// Edge labels: >= 0 is the bisector with that site, < 0 is -(line+1) into the
// starting polygon's boundary lines.
struct LabeledVertex {
  Point p;
  std::int64_t label;  // label of the edge leaving p
};

struct Line {
  Point a, b;
};

class SiteGrid {
 public:
  SiteGrid(std::span<const Point> sites, Point lo, Point hi) : sites_(sites), lo_(lo) {
    const double w = hi.x - lo.x, h = hi.y - lo.y;
    const double cs = std::sqrt(w * h / std::max<std::size_t>(sites.size(), 1));
    cell_ = cs > 0.0 ? cs : 1.0;
    nx_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(w / cell_)));
    ny_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(h / cell_)));
    buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
    for (std::size_t i = 0; i < sites.size(); ++i) {
      auto [gx, gy] = coords(sites[i]);
      buckets_[static_cast<std::size_t>(gy * nx_ + gx)].push_back(i);
    }
  }

  std::pair<std::int64_t, std::int64_t> coords(const Point& p) const {
    auto gx = static_cast<std::int64_t>(std::floor((p.x - lo_.x) / cell_));
    auto gy = static_cast<std::int64_t>(std::floor((p.y - lo_.y) / cell_));
    return {std::clamp<std::int64_t>(gx, 0, nx_ - 1), std::clamp<std::int64_t>(gy, 0, ny_ - 1)};
  }

  /// Calls f(j) for every site in the Chebyshev ring r around (gx, gy).
  /// Returns false once the ring lies completely outside the grid.
  template <typename F>
  bool ring(std::int64_t gx, std::int64_t gy, std::int64_t r, F&& f) const {
    bool any = false;
    for (std::int64_t y = gy - r; y <= gy + r; ++y) {
      if (y < 0 || y >= ny_) continue;
      const bool edge_row = (y == gy - r || y == gy + r);
      for (std::int64_t x = gx - r; x <= gx + r; x += (edge_row || r == 0) ? 1 : 2 * r) {
        if (x < 0 || x >= nx_) continue;
        any = true;
        for (std::size_t j : buckets_[static_cast<std::size_t>(y * nx_ + x)]) f(j);
      }
    }
    return any;
  }

  double cell_size() const { return cell_; }

 private:
  std::span<const Point> sites_;
  Point lo_;
  double cell_ = 1.0;
  std::int64_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

void clip_halfplane(std::vector<LabeledVertex>& poly, const Point& si, const Point& sj,
                    std::int64_t label, std::vector<LabeledVertex>& scratch) {
  const Vec2 d = sj - si;
  const Point m = (si + sj) * 0.5;
  scratch.clear();
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const LabeledVertex& cur = poly[k];
    const LabeledVertex& nxt = poly[(k + 1) % n];
    const double fc = dot(cur.p - m, d);
    const double fn = dot(nxt.p - m, d);
    const bool in_c = fc <= 0.0;
    const bool in_n = fn <= 0.0;
    if (in_c) scratch.push_back(cur);
    if (in_c != in_n) {
      const double t = fc / (fc - fn);
      const Point ip = cur.p + (nxt.p - cur.p) * t;
      scratch.push_back({ip, in_c ? label : cur.label});
    }
  }
  // Drop repeated points; the later label describes the surviving edge.
  poly.clear();
  for (const auto& v : scratch) {
    if (!poly.empty() && poly.back().p == v.p) {
      poly.back().label = v.label;
      continue;
    }
    poly.push_back(v);
  }
  while (poly.size() > 1 && poly.front().p == poly.back().p) {
    poly.front().label = poly.front().label;
    poly.pop_back();
  }
}

Point circumcenter(Point a, Point b, Point c) {
  const Vec2 bp = b - a, cp = c - a;
  const double dd = 2.0 * cross(bp, cp);
  const double b2 = dot(bp, bp), c2 = dot(cp, cp);
  return a + Vec2{(cp.y * b2 - bp.y * c2) / dd, (bp.x * c2 - cp.x * b2) / dd};
}

Point bisector_line_intersection(const Point& sa, const Point& sb, const Line& line) {
  const Point m = (sa + sb) * 0.5;
  const Vec2 d = sb - sa;
  const Vec2 t = line.b - line.a;
  const double s = dot(m - line.a, d) / dot(t, d);
  return line.a + t * s;
}

// Recomputes each vertex from the two generators of its incident edges so that
// neighboring cells reproduce bit-identical coordinates.
void canonicalize(std::vector<LabeledVertex>& poly, std::size_t i, std::span<const Point> sites,
                  std::span<const Line> lines, double tol) {
  const std::size_t n = poly.size();
  std::vector<Point> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t in = poly[(k + n - 1) % n].label;
    const std::int64_t outl = poly[k].label;
    Point q = poly[k].p;
    if (in >= 0 && outl >= 0 && in != outl) {
      std::array<std::size_t, 3> t{i, static_cast<std::size_t>(in), static_cast<std::size_t>(outl)};
      std::sort(t.begin(), t.end());
      q = circumcenter(sites[t[0]], sites[t[1]], sites[t[2]]);
    } else if ((in >= 0) != (outl >= 0)) {
      const auto j = static_cast<std::size_t>(in >= 0 ? in : outl);
      const Line& l = lines[static_cast<std::size_t>(-(in >= 0 ? outl : in) - 1)];
      q = bisector_line_intersection(sites[std::min(i, j)], sites[std::max(i, j)], l);
    }
    out[k] = (std::isfinite(q.x) && std::isfinite(q.y) && distance(q, poly[k].p) <= tol) ? q : poly[k].p;
  }
  for (std::size_t k = 0; k < n; ++k) poly[k].p = out[k];
}

// Convex pieces of a non-convex domain: trapezoids between consecutive vertex
// heights. Horizontal piece edges are split at every boundary crossing so that
// pieces on either side of a cut share identical vertices.
struct DomainPieces {
  std::vector<std::vector<LabeledVertex>> pieces;
  std::vector<std::array<Point, 2>> boxes;
  std::vector<bool> is_cut;  // per line label
};

DomainPieces decompose_domain(const Domain& domain, std::vector<Line>& lines) {
  struct Edge {
    Point lo, hi;  // lo.y <= hi.y
    std::int64_t label;
  };
  std::vector<Edge> edges;
  std::vector<double> ys;
  DomainPieces out;
  out.is_cut.assign(lines.size(), false);
  auto add_loop = [&](const TaggedPolygon& poly) {
    const std::size_t n = poly.points.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Point a = poly.points[k], b = poly.points[(k + 1) % n];
      lines.push_back({a, b});
      out.is_cut.push_back(false);
      const auto label = -static_cast<std::int64_t>(lines.size());
      edges.push_back(a.y <= b.y ? Edge{a, b, label} : Edge{b, a, label});
      ys.push_back(a.y);
    }
  };
  add_loop(domain.outer);
  for (const auto& h : domain.holes) add_loop(h);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  const auto [lo, hi] = domain.bounding_box();
  std::map<double, std::int64_t> cut_label;
  for (double y : ys) {
    lines.push_back({Point{lo.x, y}, Point{hi.x, y}});
    out.is_cut.push_back(true);
    cut_label[y] = -static_cast<std::int64_t>(lines.size());
  }

  auto edge_x = [](const Edge& e, double y) {
    if (y == e.lo.y) return e.lo.x;
    if (y == e.hi.y) return e.hi.x;
    return e.lo.x + (e.hi.x - e.lo.x) * ((y - e.lo.y) / (e.hi.y - e.lo.y));
  };
  // Sorted split abscissae on each height.
  std::map<double, std::vector<double>> splits;
  for (double y : ys) {
    auto& xs = splits[y];
    for (const auto& e : edges)
      if (e.lo.y <= y && y <= e.hi.y) {
        if (e.lo.y == e.hi.y) {
          xs.push_back(e.lo.x);
          xs.push_back(e.hi.x);
        } else {
          xs.push_back(edge_x(e, y));
        }
      }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
  auto horizontal_label = [&](double y, double xm) {
    for (const auto& e : edges)
      if (e.lo.y == y && e.hi.y == y && std::min(e.lo.x, e.hi.x) < xm && xm < std::max(e.lo.x, e.hi.x))
        return e.label;
    return cut_label.at(y);
  };
  // Appends the horizontal run from x0 to x1 at height y, split at crossings.
  auto run = [&](std::vector<LabeledVertex>& poly, double y, double x0, double x1) {
    const auto& xs = splits.at(y);
    std::vector<double> pts{x0};
    if (x0 < x1) {
      for (double x : xs)
        if (x0 < x && x < x1) pts.push_back(x);
    } else {
      for (auto it = xs.rbegin(); it != xs.rend(); ++it)
        if (x1 < *it && *it < x0) pts.push_back(*it);
    }
    pts.push_back(x1);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      poly.push_back({Point{pts[k], y}, horizontal_label(y, 0.5 * (pts[k] + pts[k + 1]))});
  };

  for (std::size_t s = 0; s + 1 < ys.size(); ++s) {
    const double y0 = ys[s], y1 = ys[s + 1], ym = 0.5 * (y0 + y1);
    std::vector<std::pair<double, const Edge*>> crossing;
    for (const auto& e : edges)
      if (e.lo.y <= y0 && e.hi.y >= y1 && e.lo.y < e.hi.y) crossing.emplace_back(edge_x(e, ym), &e);
    std::sort(crossing.begin(), crossing.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (crossing.size() % 2 != 0) throw GeometryError("domain boundary is not closed");
    for (std::size_t k = 0; k < crossing.size(); k += 2) {
      const Edge& l = *crossing[k].second;
      const Edge& r = *crossing[k + 1].second;
      std::vector<LabeledVertex> raw;
      run(raw, y0, edge_x(l, y0), edge_x(r, y0));
      raw.push_back({Point{edge_x(r, y0), y0}, r.label});
      run(raw, y1, edge_x(r, y1), edge_x(l, y1));
      raw.push_back({Point{edge_x(l, y1), y1}, l.label});
      // Drop repeated corners (triangular pieces); the later label survives.
      std::vector<LabeledVertex> poly;
      for (const auto& v : raw) {
        if (!poly.empty() && poly.back().p == v.p) {
          poly.back().label = v.label;
          continue;
        }
        poly.push_back(v);
      }
      while (poly.size() > 1 && poly.front().p == poly.back().p) poly.pop_back();
      if (poly.size() < 3) continue;
      Point plo{std::min(edge_x(l, y0), edge_x(l, y1)), y0};
      Point phi{std::max(edge_x(r, y0), edge_x(r, y1)), y1};
      out.pieces.push_back(std::move(poly));
      out.boxes.push_back({plo, phi});
    }
  }
  return out;
}

class SplitCells : public GeometryError {
 public:
  explicit SplitCells(std::vector<Point> strays)
      : GeometryError("Voronoi cells are split by the domain boundary"), strays(std::move(strays)) {}
  std::vector<Point> strays;
};

// A point strictly inside a simple CCW polygon.
Point interior_point(std::span<const Point> poly) {
  const Point c = polygon_centroid(poly);
  if (point_in_polygon(c, poly)) return c;
  double best = -1.0;
  Point p = c;
  for (const auto& t : triangulate_polygon(poly)) {
    const std::array<Point, 3> tri{poly[t[0]], poly[t[1]], poly[t[2]]};
    const double a = signed_area(tri);
    if (a > best) {
      best = a;
      p = (tri[0] + tri[1] + tri[2]) / 3.0;
    }
  }
  return p;
}

// Intersection of the convex cell `cell` of site i with the domain, assembled
// from its intersections with the convex pieces. Returns the loop holding the
// site; detached loops are appended to `strays`.
std::vector<Point> clip_to_domain(const std::vector<LabeledVertex>& cell, std::size_t i, std::span<const Point> sites,
                                  std::span<const Line> lines, const DomainPieces& dp, double scale,
                                  std::vector<Point>& strays) {
  Point clo = cell[0].p, chi = cell[0].p;
  for (const auto& v : cell) {
    clo = {std::min(clo.x, v.p.x), std::min(clo.y, v.p.y)};
    chi = {std::max(chi.x, v.p.x), std::max(chi.y, v.p.y)};
  }
  struct Seg {
    Point a, b;
    std::int64_t label;
  };
  std::vector<Seg> segs;
  std::vector<LabeledVertex> r, scratch;
  for (std::size_t k = 0; k < dp.pieces.size(); ++k) {
    const auto& box = dp.boxes[k];
    if (box[1].x < clo.x || box[0].x > chi.x || box[1].y < clo.y || box[0].y > chi.y) continue;
    r = dp.pieces[k];
    for (const auto& v : cell) {
      if (v.label < 0) continue;
      clip_halfplane(r, sites[i], sites[static_cast<std::size_t>(v.label)], v.label, scratch);
      if (r.size() < 3) break;
    }
    if (r.size() < 3) continue;
    canonicalize(r, i, sites, lines, 1e-6 * scale);
    std::vector<Point> pts;
    for (const auto& v : r) pts.push_back(v.p);
    if (!(signed_area(pts) > 0.0)) continue;
    for (std::size_t m = 0; m < r.size(); ++m) {
      const std::int64_t lab = r[m].label;
      if (lab < 0 && dp.is_cut[static_cast<std::size_t>(-lab - 1)]) continue;
      const Point& b = r[(m + 1) % r.size()].p;
      if (r[m].p == b) continue;
      segs.push_back({r[m].p, b, lab});
    }
  }
  if (segs.empty()) throw GeometryError("Voronoi cell of site " + std::to_string(i) + " is empty");

  std::multimap<std::pair<double, double>, std::size_t> starts;
  for (std::size_t k = 0; k < segs.size(); ++k) starts.emplace(std::make_pair(segs[k].a.x, segs[k].a.y), k);
  std::vector<char> used(segs.size(), 0);
  const double tol = 1e-9 * scale;
  auto next_of = [&](const Point& b) -> std::size_t {
    auto it = starts.find({b.x, b.y});
    if (it != starts.end()) {
      for (auto e = starts.equal_range({b.x, b.y}); e.first != e.second; ++e.first)
        if (!used[e.first->second]) return e.first->second;
    }
    std::size_t best = segs.size();
    double bd = tol;
    for (std::size_t k = 0; k < segs.size(); ++k)
      if (!used[k] && distance(segs[k].a, b) <= bd) {
        bd = distance(segs[k].a, b);
        best = k;
      }
    return best;
  };

  std::vector<std::vector<Point>> loops;
  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    std::vector<LabeledVertex> loop;
    std::size_t k = s0, last = s0;
    while (k < segs.size() && !used[k]) {
      used[k] = 1;
      loop.push_back({segs[k].a, segs[k].label});
      last = k;
      k = next_of(segs[k].b);
    }
    if (distance(segs[last].b, segs[s0].a) > tol)
      throw GeometryError("Voronoi cell of site " + std::to_string(i) + " does not close after trimming");
    // Drop vertices between collinear pieces of the same edge.
    std::vector<Point> pts;
    const std::size_t n = loop.size();
    for (std::size_t m = 0; m < n; ++m)
      if (loop[(m + n - 1) % n].label != loop[m].label) pts.push_back(loop[m].p);
    if (pts.size() < 3) continue;
    const double a = signed_area(pts);
    if (a < 0.0) throw GeometryError("Voronoi cell of site " + std::to_string(i) + " encloses a hole");
    if (a <= 1e-14 * scale * scale) continue;
    loops.push_back(std::move(pts));
  }
  if (loops.empty()) throw GeometryError("Voronoi cell of site " + std::to_string(i) + " is empty");
  std::size_t own = loops.size();
  for (std::size_t k = 0; k < loops.size() && own == loops.size(); ++k)
    if (point_in_polygon(sites[i], loops[k], tol)) own = k;
  if (own == loops.size()) throw GeometryError("Voronoi cell of site " + std::to_string(i) + " misses its site");
  for (std::size_t k = 0; k < loops.size(); ++k)
    if (k != own) strays.push_back(interior_point(loops[k]));
  return std::move(loops[own]);
}
// Merges coordinates that agree to within tol onto a single vertex index.
class VertexPool {
 public:
  explicit VertexPool(double tol) : tol_(tol) {}

  std::size_t insert(const Point& p) {
    const auto gx = static_cast<std::int64_t>(std::floor(p.x / tol_));
    const auto gy = static_cast<std::int64_t>(std::floor(p.y / tol_));
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        auto it = grid_.find(key(gx + dx, gy + dy));
        if (it == grid_.end()) continue;
        for (std::size_t v : it->second)
          if (distance(points_[v], p) <= tol_) return v;
      }
    points_.push_back(p);
    grid_[key(gx, gy)].push_back(points_.size() - 1);
    return points_.size() - 1;
  }

  std::vector<Point>& points() { return points_; }

 private:
  static std::uint64_t key(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(y);
  }
  double tol_;
  std::vector<Point> points_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid_;
};

// Inserts vertices that lie on the interior of an unmatched, non-boundary edge
// (T-junctions left by independently trimmed cells).
void repair_t_junctions(std::vector<std::vector<std::size_t>>& cells, const std::vector<Point>& verts,
                        const Domain& domain, double tol) {
  const std::size_t nv = verts.size();
  auto key = [nv](std::size_t a, std::size_t b) {
    return static_cast<std::uint64_t>(std::min(a, b)) * nv + std::max(a, b);
  };
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& loop : cells)
    for (std::size_t k = 0; k < loop.size(); ++k) ++count[key(loop[k], loop[(k + 1) % loop.size()])];

  std::vector<std::size_t> loose;
  std::vector<char> seen(nv, 0);
  for (const auto& loop : cells) {
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const std::size_t a = loop[k], b = loop[(k + 1) % loop.size()];
      if (count[key(a, b)] != 1) continue;
      if (domain.distance_to_boundary((verts[a] + verts[b]) * 0.5) <= tol) continue;
      for (std::size_t v : {a, b})
        if (!seen[v]) {
          seen[v] = 1;
          loose.push_back(v);
        }
    }
  }
  if (loose.empty()) return;

  for (auto& loop : cells) {
    std::vector<std::size_t> fixed;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const std::size_t a = loop[k], b = loop[(k + 1) % loop.size()];
      fixed.push_back(a);
      if (count[key(a, b)] != 1) continue;
      const Vec2 t = verts[b] - verts[a];
      const double len2 = dot(t, t);
      std::vector<std::pair<double, std::size_t>> inserts;
      for (std::size_t v : loose) {
        if (v == a || v == b) continue;
        const double s = dot(verts[v] - verts[a], t) / len2;
        if (s <= 0.0 || s >= 1.0) continue;
        if (distance_to_segment(verts[v], verts[a], verts[b]) <= tol) inserts.emplace_back(s, v);
      }
      std::sort(inserts.begin(), inserts.end());
      for (const auto& [s, v] : inserts) fixed.push_back(v);
    }
    loop = std::move(fixed);
  }
}

void validate_sites(std::span<const Point> sites, const Domain& domain, double scale) {
  if (sites.empty()) throw GeometryError("no Voronoi sites given");
  std::unordered_set<std::uint64_t> seen;
  std::map<std::pair<double, double>, std::size_t> exact;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!std::isfinite(sites[i].x) || !std::isfinite(sites[i].y))
      throw GeometryError("site " + std::to_string(i) + " is not finite");
    if (!domain.contains(sites[i]))
      throw GeometryError("site " + std::to_string(i) + " lies outside the domain");
    auto [it, fresh] = exact.emplace(std::make_pair(sites[i].x, sites[i].y), i);
    if (!fresh)
      throw GeometryError("duplicate sites " + std::to_string(it->second) + " and " + std::to_string(i));
  }
  if (sites.size() >= 3) {
    const Point& a = sites[0];
    std::size_t b = 1;
    while (b < sites.size() && distance(sites[b], a) == 0.0) ++b;
    bool collinear = true;
    for (std::size_t k = 1; k < sites.size() && collinear; ++k) {
      const double c = cross(sites[b] - a, sites[k] - a);
      if (std::abs(c) > 1e-12 * scale * scale) collinear = false;
    }
    if (collinear) throw GeometryError("all sites are collinear; Voronoi diagram is degenerate");
  }
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

Mesh generate_voronoi_mesh(std::span<const Point> sites, const Domain& domain) {
  if (domain.empty()) throw GeometryError("Voronoi generation needs a domain");
  const double scale = domain.length_scale();
  validate_sites(sites, domain, scale);
  const auto [lo, hi] = domain.bounding_box();
  const bool convex = domain.is_convex();

  // Starting polygon: the domain itself when convex, its bounding box otherwise.
  std::vector<Line> lines;
  std::vector<LabeledVertex> start;
  if (convex) {
    const auto& pts = domain.outer.points;
    const bool ccw = signed_area(pts) > 0.0;
    const std::size_t n = pts.size();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t a = ccw ? k : n - 1 - k;
      const std::size_t b = ccw ? (k + 1) % n : (2 * n - 2 - k) % n;
      lines.push_back({pts[a], pts[b]});
      start.push_back({pts[a], -static_cast<std::int64_t>(k) - 1});
    }
  } else {
    const std::array<Point, 4> box{lo, Point{hi.x, lo.y}, hi, Point{lo.x, hi.y}};
    for (std::size_t k = 0; k < 4; ++k) {
      lines.push_back({box[k], box[(k + 1) % 4]});
      start.push_back({box[k], -static_cast<std::int64_t>(k) - 1});
    }
  }
  const DomainPieces pieces = convex ? DomainPieces{} : decompose_domain(domain, lines);
  std::vector<Point> strays;

  SiteGrid grid(sites, lo, hi);
  const double vertex_tol = 1e-10 * scale;
  VertexPool pool(vertex_tol);
  std::vector<std::vector<std::size_t>> cells(sites.size());
  std::vector<LabeledVertex> poly, scratch;

  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Point& si = sites[i];
    poly = start;
    auto [gx, gy] = grid.coords(si);
    for (std::int64_t r = 0;; ++r) {
      double radius = 0.0;
      for (const auto& v : poly) radius = std::max(radius, distance(v.p, si));
      if (static_cast<double>(r - 1) * grid.cell_size() > 2.0 * radius) break;
      const bool inside = grid.ring(gx, gy, r, [&](std::size_t j) {
        if (j == i) return;
        if (distance(sites[j], si) < 1e-12 * scale)
          throw GeometryError("sites " + std::to_string(i) + " and " + std::to_string(j) + " nearly coincide");
        if (distance(sites[j], si) > 2.0 * radius) return;
        clip_halfplane(poly, si, sites[j], static_cast<std::int64_t>(j), scratch);
        radius = 0.0;
        for (const auto& v : poly) radius = std::max(radius, distance(v.p, si));
      });
      if (!inside) break;
    }
    if (poly.size() < 3) throw GeometryError("Voronoi cell of site " + std::to_string(i) + " collapsed");
    canonicalize(poly, i, sites, lines, 1e-6 * scale);

    std::vector<Point> cell_pts;
    cell_pts.reserve(poly.size());
    for (const auto& v : poly) cell_pts.push_back(v.p);

    if (!convex) {
      double radius = 0.0;
      for (const auto& p : cell_pts) radius = std::max(radius, distance(p, si));
      if (domain.distance_to_boundary(si) <= radius * (1.0 + 1e-9)) {
        cell_pts = clip_to_domain(poly, i, sites, lines, pieces, scale, strays);
      }
    }

    auto& loop = cells[i];
    for (const auto& p : cell_pts) {
      const std::size_t v = pool.insert(p);
      if (!loop.empty() && loop.back() == v) continue;
      loop.push_back(v);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 3) throw GeometryError("Voronoi cell of site " + std::to_string(i) + " is degenerate");
  }

  if (!strays.empty()) throw SplitCells(std::move(strays));
  repair_t_junctions(cells, pool.points(), domain, vertex_tol * 10.0);
  Mesh mesh = build_mesh(std::move(pool.points()), std::move(cells),
                         std::vector<Point>(sites.begin(), sites.end()), domain);
  const double da = domain.area();
  if (std::abs(mesh.total_area() - da) > 1e-9 * da) {
    throw GeometryError("Voronoi cells do not cover the domain (area defect " +
                        format_g(mesh.total_area() - da) + ")");
  }
  return mesh;
}

Mesh generate_voronoi_mesh_adding_sites(std::vector<Point> sites, const Domain& domain, int max_rounds) {
  for (int round = 0;; ++round) {
    try {
      return generate_voronoi_mesh(sites, domain);
    } catch (const SplitCells& e) {
      if (round >= max_rounds) throw GeometryError(std::string(e.what()) + " after adding sites");
      sites.insert(sites.end(), e.strays.begin(), e.strays.end());
    }
  }
}

Mesh lloyd_relax(const Mesh& mesh, int iterations) {
  if (iterations <= 0) return mesh;
  if (mesh.domain.empty()) throw GeometryError("Lloyd relaxation needs the mesh domain");
  Mesh cur = mesh;
  for (int it = 0; it < iterations; ++it) {
    std::vector<Point> sites(cur.num_cells());
    for (std::size_t c = 0; c < cur.num_cells(); ++c) {
      const Point& g = cur.centroids[c];
      const auto poly = cur.cell_polygon(c);
      bool ok = point_in_polygon(g, poly);
      if (ok) {
        for (std::size_t k = 0; k < poly.size() && ok; ++k)
          if (distance_to_segment(g, poly[k], poly[(k + 1) % poly.size()]) <= 1e-9 * cur.diameters[c]) ok = false;
      }
      sites[c] = ok ? g : cur.sites[c];
    }
    cur = generate_voronoi_mesh_adding_sites(std::move(sites), cur.domain);
  }
  return cur;
}

std::vector<Point> random_sites(const Domain& domain, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto [lo, hi] = domain.bounding_box();
  std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
  const double tol = 1e-6 * domain.length_scale() / std::sqrt(static_cast<double>(std::max<std::size_t>(count, 1)));
  std::vector<Point> sites;
  sites.reserve(count);
  while (sites.size() < count) {
    const Point p{ux(rng), uy(rng)};
    if (domain.contains(p, tol)) sites.push_back(p);
  }
  return sites;
}

Mesh make_voronoi_mesh(const Domain& domain, std::size_t cells, std::uint64_t seed,
                       int lloyd_iterations) {
  auto sites = random_sites(domain, cells, seed);
  return lloyd_relax(generate_voronoi_mesh_adding_sites(std::move(sites), domain), lloyd_iterations);
}

std::vector<Point> refine_sites(const Mesh& mesh, const CellSet& marked, std::uint64_t seed,
                                int count_per_cell, double radius_factor) {
  std::vector<Point> out = mesh.sites;
  if (marked.empty()) return out;
  if (count_per_cell < 1) throw GeometryError("count_per_cell must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::size_t c : marked) {
    const auto poly = mesh.cell_polygon(c);
    const double h = mesh.diameters[c];
    const double radius = radius_factor * h;
    const auto tris = triangulate_polygon(poly);
    auto inside = [&](const Point& p) {
      if (!point_in_polygon(p, poly)) return false;
      for (std::size_t k = 0; k < poly.size(); ++k)
        if (distance_to_segment(p, poly[k], poly[(k + 1) % poly.size()]) <= 1e-6 * h) return false;
      return mesh.domain.empty() || mesh.domain.contains(p);
    };
    for (int n = 0; n < count_per_cell; ++n) {
      Point p;
      bool found = false;
      for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
        const double r = radius * std::sqrt(u01(rng));
        const double t = 2.0 * std::numbers::pi * u01(rng);
        p = mesh.centroids[c] + Vec2{r * std::cos(t), r * std::sin(t)};
        found = inside(p);
      }
      // Narrow or non-convex cells: fall back to uniform sampling of the cell.
      while (!found) {
        const auto& tri = tris[static_cast<std::size_t>(u01(rng) * static_cast<double>(tris.size())) % tris.size()];
        double a = u01(rng), b = u01(rng);
        if (a + b > 1.0) {
          a = 1.0 - a;
          b = 1.0 - b;
        }
        p = poly[tri[0]] + (poly[tri[1]] - poly[tri[0]]) * a + (poly[tri[2]] - poly[tri[0]]) * b;
        found = inside(p);
      }
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace fvdg
