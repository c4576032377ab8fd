#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fvdg/geometry.hpp"
#include "fvdg/problem.hpp"

using namespace fvdg;

namespace {

// Brute-force Voronoi cell: clip the unit square by every bisector.
std::vector<Point> brute_cell(const std::vector<Point>& sites, std::size_t i) {
  std::vector<Point> poly{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (j == i) continue;
    const Vec2 d = sites[j] - sites[i];
    const Point m = (sites[i] + sites[j]) * 0.5;
    std::vector<Point> out;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Point& a = poly[k];
      const Point& b = poly[(k + 1) % poly.size()];
      const double fa = dot(a - m, d), fb = dot(b - m, d);
      if (fa <= 0) out.push_back(a);
      if ((fa <= 0) != (fb <= 0)) out.push_back(a + (b - a) * (fa / (fa - fb)));
    }
    poly = out;
  }
  return poly;
}

Partition six_by_six_pattern() {
  // DG cells (i, j) of the 6x6 example partition; everything else is FV.
  const int dg[][2] = {{1, 2}, {2, 2}, {3, 2}, {4, 2}, {2, 1}, {2, 3}, {2, 4}};
  Partition p = Partition::uniform(36, Region::fv);
  for (const auto& c : dg) p.tags[static_cast<std::size_t>(c[1] * 6 + c[0])] = Region::dg;
  return p;
}

BoundaryMap all_dirichlet() {
  return {[](const std::string&) { return BoundaryKind::dirichlet; }, [](const Point&) { return Vec2{1.0, 0.0}; }};
}

}  // namespace

TEST(Polygon, AreaCentroidDiameter) {
  const std::vector<Point> sq{{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  EXPECT_DOUBLE_EQ(signed_area(sq), 2.0);
  EXPECT_DOUBLE_EQ(polygon_centroid(sq).x, 1.0);
  EXPECT_DOUBLE_EQ(polygon_centroid(sq).y, 0.5);
  EXPECT_DOUBLE_EQ(polygon_diameter(sq), std::sqrt(5.0));
  EXPECT_TRUE(polygon_is_convex(sq));
  const std::vector<Point> ell{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  EXPECT_FALSE(polygon_is_convex(ell));
  double a = 0;
  for (const auto& t : triangulate_polygon(ell)) {
    const std::array<Point, 3> tri{ell[t[0]], ell[t[1]], ell[t[2]]};
    EXPECT_GT(signed_area(tri), 0.0);
    a += signed_area(tri);
  }
  EXPECT_NEAR(a, 3.0, 1e-14);
}

TEST(Polygon, ProjectionAndContainment) {
  const Point q = project_to_line({0.3, 5.0}, {0, 0}, {1, 0});
  EXPECT_DOUBLE_EQ(q.x, 0.3);
  EXPECT_DOUBLE_EQ(q.y, 0.0);
  const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_TRUE(point_in_polygon({0.5, 0.5}, sq));
  EXPECT_FALSE(point_in_polygon({1.5, 0.5}, sq));
  EXPECT_TRUE(point_in_polygon({1.0, 0.5}, sq, 1e-12));
}

TEST(Voronoi, FourSymmetricSitesGiveQuarters) {
  const std::vector<Point> sites{{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  const Mesh m = generate_voronoi_mesh(sites, rectangle_domain(0, 0, 1, 1));
  ASSERT_EQ(m.num_cells(), 4u);
  for (double a : m.areas) EXPECT_NEAR(a, 0.25, 1e-15);
  EXPECT_EQ(m.vertices.size(), 9u);
  const auto rep = check_tpfa_admissible(m, 1e-12);
  EXPECT_TRUE(rep.ok);
  EXPECT_LE(rep.worst_orthogonality_defect, 1e-14);
}

TEST(Voronoi, SingleSiteIsTheDomain) {
  const std::vector<Point> sites{{0.5, 0.5}};
  const Mesh m = generate_voronoi_mesh(sites, rectangle_domain(0, 0, 1, 1));
  ASSERT_EQ(m.num_cells(), 1u);
  EXPECT_DOUBLE_EQ(m.areas[0], 1.0);
  EXPECT_EQ(m.cells[0].size(), 4u);
}

TEST(Voronoi, MatchesBruteForceClipping) {
  const Domain dom = rectangle_domain(0, 0, 1, 1);
  const auto sites = random_sites(dom, 50, 7);
  const Mesh m = generate_voronoi_mesh(sites, dom);
  ASSERT_EQ(m.num_cells(), 50u);
  EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    auto ref = brute_cell(sites, i);
    // Drop near-duplicate points of the brute-force polygon.
    std::vector<Point> clean;
    for (const auto& p : ref)
      if (clean.empty() || distance(clean.back(), p) > 1e-12) clean.push_back(p);
    if (distance(clean.front(), clean.back()) <= 1e-12) clean.pop_back();
    EXPECT_NEAR(m.areas[i], signed_area(clean), 1e-13);
    const auto got = m.cell_polygon(i);
    ASSERT_EQ(got.size(), clean.size()) << "cell " << i;
    for (const auto& p : clean) {
      double best = 1e300;
      for (const auto& g : got) best = std::min(best, distance(p, g));
      EXPECT_LE(best, 1e-12);
    }
  }
  EXPECT_TRUE(check_tpfa_admissible(m, 1e-10).ok);
}

TEST(Voronoi, NonConvexDomainsCoverExactly) {
  for (const char* name : {"l_shaped", "hemker"}) {
    const ProblemSpec spec = make_benchmark(name);
    const Mesh m = make_voronoi_mesh(spec.domain, 800, 3, 2);
    EXPECT_NEAR(m.total_area(), spec.domain.area(), 1e-9 * spec.domain.area()) << name;
    EXPECT_TRUE(check_tpfa_admissible(m, 1e-8).ok) << name;
    for (std::size_t c = 0; c < m.num_cells(); ++c) EXPECT_TRUE(spec.domain.contains(m.centroids[c], 1e-12));
  }
}

TEST(Voronoi, RejectsBadSites) {
  const Domain dom = rectangle_domain(0, 0, 1, 1);
  EXPECT_THROW(generate_voronoi_mesh(std::vector<Point>{}, dom), GeometryError);
  EXPECT_THROW(generate_voronoi_mesh(std::vector<Point>{{0.5, 0.5}, {0.5, 0.5}}, dom), GeometryError);
  EXPECT_THROW(generate_voronoi_mesh(std::vector<Point>{{1.5, 0.5}}, dom), GeometryError);
  EXPECT_THROW(generate_voronoi_mesh(std::vector<Point>{{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}}, dom), GeometryError);
  EXPECT_THROW(generate_voronoi_mesh(std::vector<Point>{{NAN, 0.1}}, dom), GeometryError);
}

TEST(Lloyd, SymmetricSitesAreAFixedPoint) {
  const std::vector<Point> sites{{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  const Mesh m0 = generate_voronoi_mesh(sites, rectangle_domain(0, 0, 1, 1));
  const Mesh m5 = lloyd_relax(m0, 5);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(m5.sites[c].x, sites[c].x, 1e-15);
    EXPECT_NEAR(m5.sites[c].y, sites[c].y, 1e-15);
  }
  const Mesh same = lloyd_relax(m0, 0);
  EXPECT_EQ(same.sites, m0.sites);
}

TEST(Lloyd, ImprovesMinimumAngle) {
  const Domain dom = rectangle_domain(0, 0, 1, 1);
  const Mesh m0 = generate_voronoi_mesh(random_sites(dom, 50, 2), dom);
  const Mesh m20 = lloyd_relax(m0, 20);
  EXPECT_GE(min_interior_angle(m20), min_interior_angle(m0));
}

TEST(Admissibility, StructuredGridPasses) {
  const Mesh m = structured_quad_mesh(5, 4, 0, 0, 1, 1);
  const auto rep = check_tpfa_admissible(m, 1e-12);
  EXPECT_TRUE(rep.ok);
  EXPECT_EQ(rep.worst_orthogonality_defect, 0.0);
}

TEST(Admissibility, SkewedParallelogramsFail) {
  std::vector<Point> v{{0, 0}, {1, 0}, {1.5, 1}, {0.5, 1}, {2, 0}, {2.5, 1}};
  std::vector<std::vector<std::size_t>> cells{{0, 1, 2, 3}, {1, 4, 5, 2}};
  std::vector<Point> sites{{0.75, 0.5}, {1.75, 0.5}};
  const Mesh m = build_mesh(v, cells, sites, Domain{});
  const auto rep = check_tpfa_admissible(m, 1e-8);
  EXPECT_FALSE(rep.ok);
  ASSERT_EQ(rep.offending_facets.size(), 1u);
  const Facet& f = m.facets[rep.offending_facets[0]];
  EXPECT_FALSE(f.is_boundary());
  // Facet direction (0.5, 1) against site segment (1, 0).
  EXPECT_NEAR(rep.worst_orthogonality_defect, std::atan(0.5), 1e-12);
}

TEST(Classify, AllFvAndAllDg) {
  const Mesh m = structured_quad_mesh(3, 3, 0, 0, 1, 1);
  const Mesh fv = classify_facets(m, Partition::uniform(9, Region::fv), all_dirichlet());
  for (const auto& f : fv.facets)
    EXPECT_TRUE(f.kind == FacetKind::fv_interior || f.kind == FacetKind::fv_boundary);
  const Mesh dg = classify_facets(m, Partition::uniform(9, Region::dg), all_dirichlet());
  for (const auto& f : dg.facets)
    EXPECT_TRUE(f.kind == FacetKind::dg_interior || f.kind == FacetKind::dg_boundary);
}

TEST(Classify, SixBySixPatternInterfaceCount) {
  const Mesh m = structured_quad_mesh(6, 6, 0, 0, 1, 1);
  const Partition p = six_by_six_pattern();
  const Mesh c = classify_facets(m, p, all_dirichlet());
  std::size_t interfaces = 0;
  for (const auto& f : c.facets) {
    if (f.kind != FacetKind::interface) continue;
    ++interfaces;
    EXPECT_TRUE(p.is_dg(f.owner));
    EXPECT_TRUE(p.is_fv(f.neighbor));
    // Normal points from the DG cell into the FV cell.
    EXPECT_GT(dot(f.normal, m.centroids[f.neighbor] - m.centroids[f.owner]), 0.0);
    ASSERT_TRUE(f.y_gamma.has_value());
  }
  EXPECT_EQ(interfaces, 16u);  // counted by hand on the pattern
}

TEST(Classify, FacetDistances) {
  const Mesh m = structured_quad_mesh(2, 1, 0, 0, 2, 1);
  const Mesh c = classify_facets(m, Partition::uniform(2, Region::fv), all_dirichlet());
  for (const auto& f : c.facets) {
    EXPECT_DOUBLE_EQ(f.d_gamma, f.is_boundary() ? 0.5 : 1.0);
    EXPECT_DOUBLE_EQ(f.measure, 1.0);
  }
  // beta = (1, 0): only the left boundary facet is inflow.
  std::size_t inflow = 0;
  for (const auto& f : c.facets) inflow += f.inflow;
  EXPECT_EQ(inflow, 1u);
}

TEST(Neighborhood, InteriorAndCorner) {
  const Mesh m = structured_quad_mesh(8, 8, 0, 0, 1, 1);
  EXPECT_EQ(vertex_neighborhood(m, {4 * 8 + 4}).size(), 9u);
  EXPECT_EQ(vertex_neighborhood(m, {0}).size(), 4u);
  EXPECT_TRUE(vertex_neighborhood(m, {}).empty());
  const CellSet n = vertex_neighborhood(m, {4 * 8 + 4});
  for (std::size_t c : n) {
    const long i = static_cast<long>(c % 8), j = static_cast<long>(c / 8);
    EXPECT_LE(std::abs(i - 4), 1);
    EXPECT_LE(std::abs(j - 4), 1);
  }
}

TEST(RefineSites, CountsAndReproducibility) {
  const Mesh m = structured_quad_mesh(4, 4, 0, 0, 4, 4);
  EXPECT_EQ(refine_sites(m, {}, 1, 3), m.sites);
  const auto a = refine_sites(m, {5}, 42, 3);
  const auto b = refine_sites(m, {5}, 42, 3);
  ASSERT_EQ(a.size(), m.sites.size() + 3);
  EXPECT_EQ(a, b);
  const auto poly = m.cell_polygon(5);
  for (std::size_t k = m.sites.size(); k < a.size(); ++k) EXPECT_TRUE(point_in_polygon(a[k], poly));
  CellSet all(m.num_cells());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  EXPECT_EQ(refine_sites(m, all, 3, 1).size(), 2 * m.num_cells());
}

TEST(Locate, LowestIndexOnSharedEdge) {
  const Mesh m = structured_quad_mesh(2, 1, 0, 0, 2, 1);
  EXPECT_EQ(locate_cell(m, {0.5, 0.5}), 0u);
  EXPECT_EQ(locate_cell(m, {1.5, 0.5}), 1u);
  EXPECT_EQ(locate_cell(m, {1.0, 0.5}), 0u);
  EXPECT_EQ(locate_cell(m, {3.0, 0.5}), no_cell);
}

TEST(Voronoi, GenerationIsDeterministic) {
  const ProblemSpec spec = make_benchmark("hemker");
  const Mesh a = make_voronoi_mesh(spec.domain, 500, 9, 3);
  const Mesh b = make_voronoi_mesh(spec.domain, 500, 9, 3);
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(a.cells, b.cells);
}
