#include "fvdg/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fvdg/quadrature.hpp"

namespace fvdg {

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr int max_dim = 64;

int volume_degree(const DGParams& p) { return 2 * p.degree + 2; }
int facet_points(const DGParams& p) { return p.degree + 2; }

struct FacetSide {
  double phi[max_dim];
  double gn[max_dim];  // grad phi . n
};

void eval_side(const CellBasis& basis, const Point& q, const Vec2& n, FacetSide& side) {
  Vec2 g[max_dim];
  basis.values(q, side.phi);
  basis.gradients(q, g);
  for (int i = 0; i < basis.dim(); ++i) side.gn[i] = dot(g[i], n);
}

void check_fv_geometry(const Mesh& mesh, std::size_t f) {
  const Facet& facet = mesh.facets[f];
  if (!(facet.d_gamma > 0.0))
    throw AssemblyError("facet " + std::to_string(f) + " has d_gamma <= 0 (site on the facet)");
  if (facet.kind != FacetKind::fv_interior) return;
  const Vec2 t = mesh.vertices[facet.vertices[1]] - mesh.vertices[facet.vertices[0]];
  const Vec2 d = mesh.sites[facet.neighbor] - mesh.sites[facet.owner];
  const double defect = std::asin(std::min(1.0, std::abs(dot(t, d)) / (norm(t) * norm(d))));
  if (defect > 1e-8)
    throw AssemblyError("FV region is not TPFA admissible: facet " + std::to_string(f) +
                        " orthogonality defect " + std::to_string(defect) + " rad");
}

}  // namespace

DGParams DGParams::obb(int degree) {
  DGParams p;
  p.degree = degree;
  p.epsilon = 1.0;
  p.sigma = 0.0;
  p.sigma_boundary = 1.0;
  return p;
}

void DGParams::validate() const {
  if (degree < 1 || dim_pk(degree) > max_dim) throw AssemblyError("degree must be between 1 and 9");
  if (epsilon != -1.0 && epsilon != 0.0 && epsilon != 1.0) throw AssemblyError("epsilon must be -1, 0 or 1");
  if (!(sigma >= 0.0)) throw AssemblyError("sigma must be non-negative");
  if (sigma_boundary && !(*sigma_boundary >= 0.0)) throw AssemblyError("sigma_boundary must be non-negative");
}

DofMap DofMap::build(const Partition& partition, int degree) {
  DofMap m;
  m.offset.resize(partition.size());
  m.dim.resize(partition.size());
  for (std::size_t c = 0; c < partition.size(); ++c) {
    m.offset[c] = m.total;
    m.dim[c] = partition.is_fv(c) ? 1 : dim_pk(degree);
    m.total += static_cast<std::size_t>(m.dim[c]);
  }
  return m;
}

double DiscreteSolution::evaluate(std::size_t cell, const Point& p) const {
  const auto& a = coefficients[cell];
  if (partition.is_fv(cell)) return a[0];
  return (*bases)[cell].evaluate_monomial(a, p);
}

Vec2 DiscreteSolution::gradient(std::size_t cell, const Point& p) const {
  if (partition.is_fv(cell)) return {};
  return (*bases)[cell].gradient_monomial(coefficients[cell], p);
}

double DiscreteSolution::cell_average(std::size_t cell) const {
  const auto& a = coefficients[cell];
  if (partition.is_fv(cell)) return a[0];
  const CellBasis& b = (*bases)[cell];
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) s += a[m] * b.moment(static_cast<int>(m));
  return s;
}

std::vector<double> DiscreteSolution::cell_averages() const {
  std::vector<double> out(coefficients.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = cell_average(c);
  return out;
}

double harmonic_face_diffusivity(const ScalarField& K, const Point& a, const Point& b) {
  if (K.constant) {
    if (!(*K.constant > 0.0)) throw AssemblyError("diffusion coefficient must be positive");
    return *K.constant;
  }
  std::vector<double> nodes, weights;
  gauss_legendre(8, nodes, weights);
  double inv = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double s = 0.5 * (nodes[i] + 1.0);
    const double k = K(a + (b - a) * s);
    if (!(k > 0.0)) throw AssemblyError("diffusion coefficient must be positive along L_gamma");
    inv += 0.5 * weights[i] / k;
  }
  return 1.0 / inv;
}

double harmonic_face_diffusivity(const ScalarField& K, const Mesh& mesh, const Facet& facet) {
  switch (facet.kind) {
    case FacetKind::fv_interior:
      return harmonic_face_diffusivity(K, mesh.sites[facet.owner], mesh.sites[facet.neighbor]);
    case FacetKind::fv_boundary:
      return harmonic_face_diffusivity(K, mesh.sites[facet.owner], *facet.y_gamma);
    case FacetKind::interface:
      return harmonic_face_diffusivity(K, mesh.sites[facet.neighbor], *facet.y_gamma);
    default:
      throw AssemblyError("K_gamma is only defined on FV and interface facets");
  }
}

SparseSystem assemble(const Mesh& mesh, const Partition& partition, const ProblemSpec& spec,
                      const DGParams& params, const std::vector<CellBasis>& bases, const DofMap& dofs) {
  params.validate();
  if (partition.size() != mesh.num_cells()) throw AssemblyError("partition size does not match the mesh");
  if (bases.size() != mesh.num_cells()) throw AssemblyError("basis count does not match the mesh");

  const int vdeg = volume_degree(params);
  const int fpts = facet_points(params);
  const double eps = params.epsilon;
  const bool literal_inflow = params.boundary_convection == BoundaryConvection::literal_inflow;

  std::vector<Triplet> trip;
  trip.reserve(dofs.total * 8);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.total));
  auto add = [&](std::size_t r, std::size_t c, double v) {
    trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  };

  // Cell terms.
  std::vector<double> local;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule rule = polygon_rule(mesh, c, vdeg);
    const std::size_t o = dofs.offset[c];
    if (partition.is_fv(c)) {
      double cm = 0.0, fm = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        cm += rule.weights[q] * spec.reaction(rule.points[q]);
        fm += rule.weights[q] * spec.source(rule.points[q]);
      }
      add(o, o, cm);
      rhs[static_cast<Eigen::Index>(o)] += fm;
      continue;
    }
    const CellBasis& basis = bases[c];
    const int n = basis.dim();
    local.assign(static_cast<std::size_t>(n * n), 0.0);
    double phi[max_dim];
    Vec2 grad[max_dim];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point& x = rule.points[q];
      const double w = rule.weights[q];
      const double K = spec.diffusion(x);
      const Vec2 beta = spec.convection(x);
      const double cr = spec.reaction(x);
      const double f = spec.source(x);
      basis.values(x, phi);
      basis.gradients(x, grad);
      for (int i = 0; i < n; ++i) {
        const double bgi = dot(beta, grad[i]);
        for (int j = 0; j < n; ++j)
          local[static_cast<std::size_t>(i * n + j)] +=
              w * (K * dot(grad[j], grad[i]) - bgi * phi[j] + cr * phi[j] * phi[i]);
        rhs[static_cast<Eigen::Index>(o + static_cast<std::size_t>(i))] += w * f * phi[i];
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        add(o + static_cast<std::size_t>(i), o + static_cast<std::size_t>(j), local[static_cast<std::size_t>(i * n + j)]);
  }

  // Facet terms.
  FacetSide side[2];
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const Facet& facet = mesh.facets[f];
    const Point& a = mesh.vertices[facet.vertices[0]];
    const Point& b = mesh.vertices[facet.vertices[1]];
    const Vec2& nrm = facet.normal;
    const QuadratureRule rule = segment_rule(a, b, fpts);

    switch (facet.kind) {
      case FacetKind::fv_interior: {
        check_fv_geometry(mesh, f);
        const std::size_t V = dofs.offset[facet.owner];
        const std::size_t W = dofs.offset[facet.neighbor];
        const double T = facet.measure / facet.d_gamma * harmonic_face_diffusivity(spec.diffusion, mesh, facet);
        add(V, V, T);
        add(V, W, -T);
        add(W, V, -T);
        add(W, W, T);
        double F = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) F += rule.weights[q] * dot(spec.convection(rule.points[q]), nrm);
        if (F >= 0.0) {
          add(V, V, F);
          add(W, V, -F);
        } else {
          add(V, W, F);
          add(W, W, -F);
        }
        break;
      }

      case FacetKind::fv_boundary: {
        check_fv_geometry(mesh, f);
        const std::size_t V = dofs.offset[facet.owner];
        const bool dirichlet = facet.boundary == BoundaryKind::dirichlet;
        if (dirichlet) {
          const double T = facet.measure / facet.d_gamma * harmonic_face_diffusivity(spec.diffusion, mesh, facet);
          add(V, V, T);
          rhs[static_cast<Eigen::Index>(V)] += T * spec.dirichlet_value(facet.tag, *facet.y_gamma);
        }
        double F = 0.0, Fg = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double bn = dot(spec.convection(rule.points[q]), nrm);
          F += rule.weights[q] * bn;
          if (dirichlet) Fg += rule.weights[q] * bn * spec.dirichlet_value(facet.tag, rule.points[q]);
        }
        if (literal_inflow) {
          if (facet.inflow) {
            add(V, V, F);
            rhs[static_cast<Eigen::Index>(V)] -= Fg;
          }
        } else if (F >= 0.0) {
          add(V, V, F);
        } else if (dirichlet) {
          rhs[static_cast<Eigen::Index>(V)] -= Fg;
        }
        break;
      }

      case FacetKind::dg_interior: {
        const std::size_t cell[2] = {facet.owner, facet.neighbor};
        const CellBasis* basis[2] = {&bases[cell[0]], &bases[cell[1]]};
        const int dim[2] = {basis[0]->dim(), basis[1]->dim()};
        const double pen = params.sigma / facet.h_gamma;
        std::vector<double> blk[2][2];
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t) blk[s][t].assign(static_cast<std::size_t>(dim[s] * dim[t]), 0.0);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Point& x = rule.points[q];
          const double w = rule.weights[q];
          const double K = spec.diffusion(x);
          const double bn = dot(spec.convection(x), nrm);
          const int up = bn >= 0.0 ? 0 : 1;
          eval_side(*basis[0], x, nrm, side[0]);
          eval_side(*basis[1], x, nrm, side[1]);
          for (int s = 0; s < 2; ++s) {
            const double sv = s == 0 ? 1.0 : -1.0;
            for (int t = 0; t < 2; ++t) {
              const double su = t == 0 ? 1.0 : -1.0;
              auto& B = blk[s][t];
              for (int i = 0; i < dim[s]; ++i) {
                const double vi = sv * side[s].phi[i];
                for (int j = 0; j < dim[t]; ++j) {
                  double v = -0.5 * K * side[t].gn[j] * vi + eps * 0.5 * K * side[s].gn[i] * su * side[t].phi[j] +
                             pen * su * side[t].phi[j] * vi;
                  if (t == up) v += bn * side[t].phi[j] * vi;
                  B[static_cast<std::size_t>(i * dim[t] + j)] += w * v;
                }
              }
            }
          }
        }
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t)
            for (int i = 0; i < dim[s]; ++i)
              for (int j = 0; j < dim[t]; ++j)
                add(dofs.offset[cell[s]] + static_cast<std::size_t>(i), dofs.offset[cell[t]] + static_cast<std::size_t>(j),
                    blk[s][t][static_cast<std::size_t>(i * dim[t] + j)]);
        break;
      }

      case FacetKind::dg_boundary: {
        const std::size_t o = dofs.offset[facet.owner];
        const CellBasis& basis = bases[facet.owner];
        const int n = basis.dim();
        const bool dirichlet = facet.boundary == BoundaryKind::dirichlet;
        const double pen = params.boundary_sigma() / facet.h_gamma;
        local.assign(static_cast<std::size_t>(n * n), 0.0);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Point& x = rule.points[q];
          const double w = rule.weights[q];
          const double bn = dot(spec.convection(x), nrm);
          eval_side(basis, x, nrm, side[0]);
          const double* phi = side[0].phi;
          const double* gn = side[0].gn;
          const bool conv_lhs = literal_inflow ? facet.inflow : bn >= 0.0;
          const bool conv_rhs = literal_inflow ? facet.inflow : (dirichlet && bn < 0.0);
          double K = 0.0, g = 0.0;
          if (dirichlet) {
            K = spec.diffusion(x);
            g = spec.dirichlet_value(facet.tag, x);
          }
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              double v = 0.0;
              if (dirichlet) v = -K * gn[j] * phi[i] + eps * K * gn[i] * phi[j] + pen * phi[j] * phi[i];
              if (conv_lhs) v += bn * phi[j] * phi[i];
              local[static_cast<std::size_t>(i * n + j)] += w * v;
            }
            double r = 0.0;
            if (dirichlet) {
              const double consistency =
                  params.dirichlet_term == DirichletTerm::corrected ? K * gn[i] * g : pen * gn[i] * g;
              r = eps * consistency + pen * g * phi[i];
            }
            if (conv_rhs) r -= bn * g * phi[i];
            rhs[static_cast<Eigen::Index>(o + static_cast<std::size_t>(i))] += w * r;
          }
        }
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            add(o + static_cast<std::size_t>(i), o + static_cast<std::size_t>(j), local[static_cast<std::size_t>(i * n + j)]);
        break;
      }

      case FacetKind::interface: {
        check_fv_geometry(mesh, f);
        const std::size_t D = dofs.offset[facet.owner];
        const std::size_t V = dofs.offset[facet.neighbor];
        const CellBasis& basis = bases[facet.owner];
        const int n = basis.dim();
        const Point& y = *facet.y_gamma;
        double py[max_dim];
        basis.values(y, py);

        const double T = facet.measure / facet.d_gamma * harmonic_face_diffusivity(spec.diffusion, mesh, facet);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) add(D + static_cast<std::size_t>(i), D + static_cast<std::size_t>(j), T * py[j] * py[i]);
        for (int i = 0; i < n; ++i) add(D + static_cast<std::size_t>(i), V, -T * py[i]);
        for (int j = 0; j < n; ++j) add(V, D + static_cast<std::size_t>(j), -T * py[j]);
        add(V, V, T);

        // Convection, with [v] = v_DG - v_FV and upwinding along n (DG -> FV).
        local.assign(static_cast<std::size_t>(n * n), 0.0);
        std::vector<double> col(static_cast<std::size_t>(n), 0.0), row(static_cast<std::size_t>(n), 0.0);
        double vv = 0.0;
        if (params.interface_convection == InterfaceConvection::pointwise) {
          double phi[max_dim];
          for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point& x = rule.points[q];
            const double w = rule.weights[q];
            const double bn = dot(spec.convection(x), nrm);
            basis.values(x, phi);
            if (bn >= 0.0) {
              for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) local[static_cast<std::size_t>(i * n + j)] += w * bn * phi[j] * phi[i];
              for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] -= w * bn * phi[j];
            } else {
              for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] += w * bn * phi[i];
              vv -= w * bn;
            }
          }
        } else {
          double F = 0.0;
          for (std::size_t q = 0; q < rule.size(); ++q) F += rule.weights[q] * dot(spec.convection(rule.points[q]), nrm);
          if (F >= 0.0) {
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) local[static_cast<std::size_t>(i * n + j)] = F * py[j] * py[i];
            for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = -F * py[j];
          } else {
            for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = F * py[i];
            vv = -F;
          }
        }
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            add(D + static_cast<std::size_t>(i), D + static_cast<std::size_t>(j), local[static_cast<std::size_t>(i * n + j)]);
        for (int i = 0; i < n; ++i) add(D + static_cast<std::size_t>(i), V, col[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) add(V, D + static_cast<std::size_t>(j), row[static_cast<std::size_t>(j)]);
        add(V, V, vv);
        break;
      }

      case FacetKind::unclassified:
        throw AssemblyError("facet " + std::to_string(f) + " is unclassified; call classify_facets first");
    }
  }

  SparseSystem sys;
  const auto n = static_cast<Eigen::Index>(dofs.total);
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  return sys;
}

AssembledProblem assemble_system(const Mesh& mesh, const Partition& partition, const ProblemSpec& spec,
                                 const DGParams& params, std::shared_ptr<const std::vector<CellBasis>> bases) {
  params.validate();
  AssembledProblem out;
  out.mesh = std::make_shared<const Mesh>(classify_facets(mesh, partition, spec.boundary_map()));
  if (!bases || bases->size() != mesh.num_cells() || (!bases->empty() && bases->front().degree() != params.degree))
    bases = std::make_shared<const std::vector<CellBasis>>(build_bases(mesh, params.degree));
  out.bases = std::move(bases);
  out.partition = partition;
  out.dofs = DofMap::build(partition, params.degree);
  out.params = params;
  out.system = assemble(*out.mesh, partition, spec, params, *out.bases, out.dofs);
  return out;
}

DiscreteSolution make_solution(const AssembledProblem& problem, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != problem.dofs.total)
    throw AssemblyError("solution vector length does not match the dof map");
  DiscreteSolution u;
  u.mesh = problem.mesh;
  u.bases = problem.bases;
  u.partition = problem.partition;
  u.degree = problem.params.degree;
  u.coefficients.resize(problem.partition.size());
  for (std::size_t c = 0; c < problem.partition.size(); ++c) {
    const double* xc = x.data() + problem.dofs.offset[c];
    if (problem.partition.is_fv(c)) u.coefficients[c] = {xc[0]};
    else u.coefficients[c] = (*problem.bases)[c].to_monomial(xc);
  }
  return u;
}

Eigen::VectorXd interpolate(const AssembledProblem& problem, const ScalarField& u) {
  const Mesh& mesh = *problem.mesh;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.dofs.total));
  double phi[max_dim];
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const std::size_t o = problem.dofs.offset[c];
    if (problem.partition.is_fv(c)) {
      x[static_cast<Eigen::Index>(o)] = u(mesh.sites[c]);
      continue;
    }
    const CellBasis& basis = (*problem.bases)[c];
    const QuadratureRule rule = polygon_rule(mesh, c, volume_degree(problem.params));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double uq = u(rule.points[q]);
      basis.values(rule.points[q], phi);
      for (int i = 0; i < basis.dim(); ++i)
        x[static_cast<Eigen::Index>(o + static_cast<std::size_t>(i))] += rule.weights[q] * uq * phi[i];
    }
  }
  return x;
}

void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "w");
  if (!fp) throw AssemblyError("cannot write " + path.string());
  std::fprintf(fp, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(fp, "%lld %lld %lld\n", static_cast<long long>(m.rows()), static_cast<long long>(m.cols()),
               static_cast<long long>(m.nonZeros()));
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      std::fprintf(fp, "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1), static_cast<long long>(it.col() + 1),
                   it.value());
  if (std::fclose(fp) != 0) throw AssemblyError("error writing " + path.string());
}

void write_vector(const Eigen::VectorXd& v, const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "w");
  if (!fp) throw AssemblyError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < v.size(); ++i) std::fprintf(fp, "%.17g\n", v[i]);
  if (std::fclose(fp) != 0) throw AssemblyError("error writing " + path.string());
}

}  // namespace fvdg
