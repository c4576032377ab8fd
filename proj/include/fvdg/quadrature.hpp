#pragma once

#include <span>
#include <vector>

#include "fvdg/geometry.hpp"

namespace fvdg {

struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed (Duffy) Gauss rule on a triangle, exact for total degree `degree`.
QuadratureRule triangle_rule(const Point& a, const Point& b, const Point& c, int degree);

/// Rule exact for polynomials of total degree `degree` on a simple polygon.
/// Convex polygons are fanned from the centroid, others are ear-clipped.
QuadratureRule polygon_rule(std::span<const Point> poly, int degree);
QuadratureRule polygon_rule(const Mesh& mesh, std::size_t cell, int degree);

/// n-point Gauss-Legendre rule on the segment [a, b]; weights sum to |b - a|.
QuadratureRule segment_rule(const Point& a, const Point& b, int n);

}  // namespace fvdg
