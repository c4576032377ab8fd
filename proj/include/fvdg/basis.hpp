#pragma once

#include <vector>

#include "fvdg/geometry.hpp"
#include "fvdg/quadrature.hpp"

namespace fvdg {

/// dim P_k in two variables.
constexpr int dim_pk(int k) { return (k + 1) * (k + 2) / 2; }

/// Scaled monomials X^a Y^b with X = (x - x_c)/h, Y = (y - y_c)/h about the
/// cell centroid, ordered by total degree (1, X, Y, X^2, XY, Y^2, ...), and an
/// L2(E)-orthonormal basis phi_j = sum_m L(j, m) mu_m built from them.
class CellBasis {
 public:
  CellBasis() = default;
  CellBasis(const Point& center, double h, int degree, const QuadratureRule& rule);

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  const Point& center() const { return center_; }
  double scale() const { return h_; }
  double L(int j, int m) const { return L_[static_cast<std::size_t>(j * dim_ + m)]; }
  /// (1/|E|) * integral of mu_m over the cell.
  double moment(int m) const { return moments_[static_cast<std::size_t>(m)]; }

  void monomials(const Point& p, double* out) const;
  void monomial_gradients(const Point& p, Vec2* out) const;
  void values(const Point& p, double* out) const;
  void gradients(const Point& p, Vec2* out) const;

  /// Monomial coefficients a = L^T c of the expansion sum_j c_j phi_j.
  std::vector<double> to_monomial(const double* c) const;
  double evaluate_monomial(const std::vector<double>& a, const Point& p) const;
  Vec2 gradient_monomial(const std::vector<double>& a, const Point& p) const;

 private:
  Point center_;
  double h_ = 1.0;
  int degree_ = 0;
  int dim_ = 1;
  std::vector<double> L_;
  std::vector<double> moments_;
};

/// Basis for every cell of the mesh, using its centroid and diameter.
std::vector<CellBasis> build_bases(const Mesh& mesh, int degree);

}  // namespace fvdg
