#include "fvdg/basis.hpp"

#include <cmath>

namespace fvdg {

namespace {

double ipow(double v, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= v;
  return r;
}

}  // namespace

CellBasis::CellBasis(const Point& center, double h, int degree, const QuadratureRule& rule)
    : center_(center), h_(h), degree_(degree), dim_(dim_pk(degree)) {
  if (degree < 0) throw GeometryError("basis degree must be non-negative");
  if (!(h > 0.0)) throw GeometryError("basis scale must be positive");
  const auto n = static_cast<std::size_t>(dim_);

  std::vector<double> gram(n * n, 0.0);
  moments_.assign(n, 0.0);
  std::vector<double> mu(n);
  double area = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    monomials(rule.points[q], mu.data());
    const double w = rule.weights[q];
    area += w;
    for (std::size_t a = 0; a < n; ++a) {
      moments_[a] += w * mu[a];
      for (std::size_t b = 0; b < n; ++b) gram[a * n + b] += w * mu[a] * mu[b];
    }
  }
  if (!(area > 0.0)) throw GeometryError("basis quadrature has zero measure");
  for (auto& m : moments_) m /= area;

  // Modified Gram-Schmidt in the Gram inner product, applied twice.
  L_.assign(n * n, 0.0);
  auto inner = [&](const double* u, const double* v) {
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) s += u[a] * gram[a * n + b] * v[b];
    return s;
  };
  for (std::size_t j = 0; j < n; ++j) {
    double* v = &L_[j * n];
    v[j] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double* u = &L_[i * n];
        const double proj = inner(v, u);
        for (std::size_t a = 0; a < n; ++a) v[a] -= proj * u[a];
      }
    }
    const double nrm = std::sqrt(inner(v, v));
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw GeometryError("degenerate cell basis");
    for (std::size_t a = 0; a < n; ++a) v[a] /= nrm;
  }
}

void CellBasis::monomials(const Point& p, double* out) const {
  const double X = (p.x - center_.x) / h_;
  const double Y = (p.y - center_.y) / h_;
  int m = 0;
  for (int d = 0; d <= degree_; ++d)
    for (int j = 0; j <= d; ++j) out[m++] = ipow(X, d - j) * ipow(Y, j);
}

void CellBasis::monomial_gradients(const Point& p, Vec2* out) const {
  const double X = (p.x - center_.x) / h_;
  const double Y = (p.y - center_.y) / h_;
  int m = 0;
  for (int d = 0; d <= degree_; ++d) {
    for (int j = 0; j <= d; ++j) {
      const int a = d - j;
      const double gx = a > 0 ? a * ipow(X, a - 1) * ipow(Y, j) : 0.0;
      const double gy = j > 0 ? j * ipow(X, a) * ipow(Y, j - 1) : 0.0;
      out[m++] = {gx / h_, gy / h_};
    }
  }
}

void CellBasis::values(const Point& p, double* out) const {
  double mu[64];
  monomials(p, mu);
  for (int j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (int m = 0; m <= j; ++m) s += L(j, m) * mu[m];
    out[j] = s;
  }
}

void CellBasis::gradients(const Point& p, Vec2* out) const {
  Vec2 g[64];
  monomial_gradients(p, g);
  for (int j = 0; j < dim_; ++j) {
    Vec2 s;
    for (int m = 0; m <= j; ++m) s += g[m] * L(j, m);
    out[j] = s;
  }
}

std::vector<double> CellBasis::to_monomial(const double* c) const {
  std::vector<double> a(static_cast<std::size_t>(dim_), 0.0);
  for (int j = 0; j < dim_; ++j)
    for (int m = 0; m <= j; ++m) a[static_cast<std::size_t>(m)] += c[j] * L(j, m);
  return a;
}

double CellBasis::evaluate_monomial(const std::vector<double>& a, const Point& p) const {
  double mu[64];
  monomials(p, mu);
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) s += a[m] * mu[m];
  return s;
}

Vec2 CellBasis::gradient_monomial(const std::vector<double>& a, const Point& p) const {
  Vec2 g[64];
  monomial_gradients(p, g);
  Vec2 s;
  for (std::size_t m = 0; m < a.size(); ++m) s += g[m] * a[m];
  return s;
}

std::vector<CellBasis> build_bases(const Mesh& mesh, int degree) {
  if (dim_pk(degree) > 64) throw GeometryError("basis degree too large");
  std::vector<CellBasis> out;
  out.reserve(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    out.emplace_back(mesh.centroids[c], mesh.diameters[c], degree, polygon_rule(mesh, c, 2 * degree));
  return out;
}

}  // namespace fvdg
