#include "fvdg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fvdg {

namespace {

struct GaussTable {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussTable& cached_gauss(int n) {
  static std::mutex mutex;
  static std::map<int, GaussTable> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussTable t;
  t.nodes.resize(static_cast<std::size_t>(n));
  t.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    t.nodes[static_cast<std::size_t>(i)] = -x;
    t.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    t.weights[static_cast<std::size_t>(i)] = w;
    t.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) t.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return cache.emplace(n, std::move(t)).first->second;
}

void append_triangle(QuadratureRule& rule, const Point& a, const Point& b, const Point& c, int degree) {
  const double area2 = cross(b - a, c - a);
  if (area2 == 0.0) return;
  const int n = std::max(1, (degree + 2 + 1) / 2);
  const auto& g = cached_gauss(n);
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (g.nodes[static_cast<std::size_t>(i)] + 1.0);
    const double ws = 0.5 * g.weights[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double t = 0.5 * (g.nodes[static_cast<std::size_t>(j)] + 1.0);
      const double wt = 0.5 * g.weights[static_cast<std::size_t>(j)];
      // (s, t) in the unit square -> (s, t(1 - s)) in the reference triangle.
      const double xi = s;
      const double eta = t * (1.0 - s);
      rule.points.push_back(a + (b - a) * xi + (c - a) * eta);
      rule.weights.push_back(ws * wt * (1.0 - s) * std::abs(area2));
    }
  }
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one point");
  const auto& g = cached_gauss(n);
  nodes = g.nodes;
  weights = g.weights;
}

QuadratureRule triangle_rule(const Point& a, const Point& b, const Point& c, int degree) {
  QuadratureRule rule;
  append_triangle(rule, a, b, c, degree);
  return rule;
}

QuadratureRule polygon_rule(std::span<const Point> poly, int degree) {
  QuadratureRule rule;
  if (polygon_is_convex(poly)) {
    const Point g = polygon_centroid(poly);
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) append_triangle(rule, g, poly[i], poly[(i + 1) % n], degree);
  } else {
    for (const auto& t : triangulate_polygon(poly)) append_triangle(rule, poly[t[0]], poly[t[1]], poly[t[2]], degree);
  }
  return rule;
}

QuadratureRule polygon_rule(const Mesh& mesh, std::size_t cell, int degree) {
  const auto poly = mesh.cell_polygon(cell);
  QuadratureRule rule;
  if (mesh.convex[cell]) {
    const Point& g = mesh.centroids[cell];
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) append_triangle(rule, g, poly[i], poly[(i + 1) % n], degree);
  } else {
    for (const auto& t : triangulate_polygon(poly)) append_triangle(rule, poly[t[0]], poly[t[1]], poly[t[2]], degree);
  }
  return rule;
}

QuadratureRule segment_rule(const Point& a, const Point& b, int n) {
  const auto& g = cached_gauss(std::max(n, 1));
  const double len = distance(a, b);
  QuadratureRule rule;
  rule.points.reserve(g.nodes.size());
  rule.weights.reserve(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double s = 0.5 * (g.nodes[i] + 1.0);
    rule.points.push_back(a + (b - a) * s);
    rule.weights.push_back(0.5 * g.weights[i] * len);
  }
  return rule;
}

}  // namespace fvdg
