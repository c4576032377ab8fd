#include "fvdg/problem.hpp"

#include <cmath>
#include <numbers>

#include "fvdg/config.hpp"
#include "fvdg/expression.hpp"

namespace fvdg {

namespace {

constexpr double pi = std::numbers::pi;

std::vector<std::string> all_tags(const Domain& d) {
  std::vector<std::string> tags = d.outer.edge_tags;
  for (const auto& h : d.holes) tags.insert(tags.end(), h.edge_tags.begin(), h.edge_tags.end());
  return tags;
}

ProblemSpec triple_layer() {
  ProblemSpec p;
  p.name = "triple_layer";
  p.diffusion = ScalarField::uniform(1e-6);
  p.convection = {[](const Point& q) { return Vec2{q.y, (1.0 - q.x) * (1.0 - q.x)}; }};
  // The collinear vertex at (2, 1) splits the right edge into its Neumann and
  // Dirichlet parts.
  p.domain.outer.points = {{0, 0}, {2, 0}, {2, 1}, {2, 2}, {0, 2}};
  p.domain.outer.edge_tags = {"bottom", "right_lower", "right_upper", "top", "left"};
  const ScalarField g{[](const Point& q) {
                        if (q.y != 0.0) return 0.0;
                        if (q.x > 0.125 && q.x < 0.5) return 1.0;
                        if (q.x > 0.5 && q.x < 0.75) return 2.0;
                        return 0.0;
                      },
                      std::nullopt};
  p.dirichlet = {{"bottom", g},
                 {"right_upper", ScalarField::uniform(0.0)},
                 {"top", ScalarField::uniform(0.0)},
                 {"left", ScalarField::uniform(0.0)}};
  p.neumann_tags = {"right_lower"};
  p.u_min = 0.0;
  p.u_max = 2.0;
  return p;
}

ProblemSpec l_shaped() {
  ProblemSpec p;
  p.name = "l_shaped";
  p.diffusion = ScalarField::uniform(1e-6);
  p.convection = {[](const Point& q) { return Vec2{q.y, -q.x}; }};
  p.domain.outer.points = {{2, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 2}, {2, 2}};
  p.domain.outer.edge_tags = {"bottom", "right", "top", "left", "inner_top", "inner_right"};
  p.dirichlet = {{"top", ScalarField::uniform(0.0)},
                 {"left", ScalarField::uniform(1.0)},
                 {"inner_top", ScalarField::uniform(0.0)},
                 {"inner_right", ScalarField::uniform(0.0)}};
  p.neumann_tags = {"bottom", "right"};
  p.u_min = 0.0;
  p.u_max = 1.0;
  return p;
}

ProblemSpec internal_layer() {
  ProblemSpec p;
  p.name = "internal_layer";
  p.diffusion = ScalarField::uniform(1e-4);
  p.convection = VectorField::uniform({std::cos(pi / 3.0), -std::sin(pi / 3.0)});
  p.domain = rectangle_domain(0, 0, 1, 1);
  p.dirichlet = {{"bottom", ScalarField::uniform(0.0)},
                 {"top", ScalarField::uniform(1.0)},
                 {"left", {[](const Point& q) { return 0.5 + std::atan(1e4 * (q.y - 0.7)) / pi; }, std::nullopt}},
                 {"right", ScalarField::uniform(0.0)}};
  p.u_min = 0.0;
  p.u_max = 1.0;
  return p;
}

ProblemSpec hemker(int hole_edges) {
  if (hole_edges < 8) throw ProblemError("hemker hole needs at least 8 edges");
  ProblemSpec p;
  p.name = "hemker";
  p.diffusion = ScalarField::uniform(1e-8);
  p.convection = VectorField::uniform({1.0, 0.0});
  p.domain = rectangle_domain(-3, -3, 9, 3, {"wall_bottom", "outlet", "wall_top", "inlet"});
  p.domain.holes.push_back(circle_polygon({0, 0}, 1.0, hole_edges, "body"));
  p.dirichlet = {{"inlet", ScalarField::uniform(0.0)}, {"body", ScalarField::uniform(1.0)}};
  p.neumann_tags = {"wall_bottom", "wall_top", "outlet"};
  p.u_min = 0.0;
  p.u_max = 1.0;
  return p;
}

ScalarField scalar_from_json(const nlohmann::json& v, const std::string& what) {
  if (v.is_number()) return ScalarField::uniform(v.get<double>());
  if (!v.is_string()) throw ProblemError(what + " must be a number or an expression string");
  Expression e(v.get<std::string>());
  if (e.is_constant()) return ScalarField::uniform(e(0.0, 0.0));
  return {[e](const Point& q) { return e(q.x, q.y); }, std::nullopt};
}

TaggedPolygon polygon_from_json(const nlohmann::json& j, const std::string& what) {
  TaggedPolygon poly;
  for (const auto& pt : j.at("points")) poly.points.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
  for (const auto& t : j.at("tags")) poly.edge_tags.push_back(t.get<std::string>());
  if (poly.points.size() < 3 || poly.edge_tags.size() != poly.points.size())
    throw ProblemError(what + ": need >= 3 points and one tag per edge");
  if (signed_area(poly.points) < 0.0) {
    // Reverse to CCW; edge i (p_i -> p_{i+1}) becomes edge n-2-i.
    std::vector<Point> pts(poly.points.rbegin(), poly.points.rend());
    std::vector<std::string> tags(pts.size());
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) tags[(2 * n - 2 - i) % n] = poly.edge_tags[i];
    poly.points = std::move(pts);
    poly.edge_tags = std::move(tags);
  }
  return poly;
}

Domain domain_from_json(const nlohmann::json& j) {
  if (j.contains("benchmark")) return make_benchmark(j.at("benchmark").get<std::string>()).domain;
  if (j.contains("rectangle")) {
    const auto& r = j.at("rectangle");
    std::array<std::string, 4> tags{"bottom", "right", "top", "left"};
    if (j.contains("tags"))
      for (std::size_t i = 0; i < 4; ++i) tags[i] = j.at("tags").at(i).get<std::string>();
    return rectangle_domain(r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                            r.at(3).get<double>(), tags);
  }
  Domain d;
  d.outer = polygon_from_json(j, "domain");
  if (j.contains("holes"))
    for (const auto& h : j.at("holes")) d.holes.push_back(polygon_from_json(h, "domain hole"));
  return d;
}

}  // namespace

BoundaryMap ProblemSpec::boundary_map() const {
  BoundaryMap m;
  m.kind = [this](const std::string& tag) {
    if (dirichlet.count(tag)) return BoundaryKind::dirichlet;
    if (neumann_tags.count(tag)) return BoundaryKind::neumann;
    return BoundaryKind::none;
  };
  m.beta = [this](const Point& p) { return convection(p); };
  return m;
}

double ProblemSpec::dirichlet_value(const std::string& tag, const Point& p) const {
  auto it = dirichlet.find(tag);
  if (it == dirichlet.end()) throw ProblemError("boundary tag '" + tag + "' is not Dirichlet");
  return it->second(p);
}

void ProblemSpec::validate() const {
  if (domain.empty()) throw ProblemError(name + ": empty domain");
  for (const auto& tag : all_tags(domain)) {
    const bool d = dirichlet.count(tag) > 0;
    const bool n = neumann_tags.count(tag) > 0;
    if (d == n)
      throw ProblemError(name + ": boundary tag '" + tag + "' must be exactly one of Dirichlet or Neumann");
  }
  if (!(u_min <= u_max)) throw ProblemError(name + ": bounds must satisfy u_min <= u_max");
  if (diffusion.constant && !(*diffusion.constant > 0.0)) throw ProblemError(name + ": K must be positive");
}

Benchmark parse_benchmark(const std::string& name) {
  if (name == "triple_layer") return Benchmark::triple_layer;
  if (name == "l_shaped") return Benchmark::l_shaped;
  if (name == "internal_layer") return Benchmark::internal_layer;
  if (name == "hemker") return Benchmark::hemker;
  if (name == "manufactured") return Benchmark::manufactured;
  throw ProblemError("unknown benchmark '" + name +
                     "' (expected triple_layer, l_shaped, internal_layer, hemker or manufactured)");
}

const char* to_string(Benchmark b) {
  switch (b) {
    case Benchmark::triple_layer: return "triple_layer";
    case Benchmark::l_shaped: return "l_shaped";
    case Benchmark::internal_layer: return "internal_layer";
    case Benchmark::hemker: return "hemker";
    case Benchmark::manufactured: return "manufactured";
  }
  return "?";
}

ProblemSpec make_benchmark(Benchmark b, const BenchmarkOptions& opts) {
  switch (b) {
    case Benchmark::triple_layer: return triple_layer();
    case Benchmark::l_shaped: return l_shaped();
    case Benchmark::internal_layer: return internal_layer();
    case Benchmark::hemker: return hemker(opts.hemker_hole_edges);
    case Benchmark::manufactured: return manufactured_problem();
  }
  throw ProblemError("unknown benchmark");
}

ProblemSpec make_benchmark(const std::string& name, const BenchmarkOptions& opts) {
  return make_benchmark(parse_benchmark(name), opts);
}

ProblemSpec manufactured_problem(double a, double b) {
  ProblemSpec p;
  p.name = (a == 0.0 && b == 0.0) ? "manufactured" : "manufactured_offset";
  p.diffusion = ScalarField::uniform(1.0);
  p.convection = VectorField::uniform({1.0, 1.0});
  p.domain = rectangle_domain(0, 0, 1, 1);
  const ScalarField exact{[a, b](const Point& q) {
                            return std::sin(pi * q.x) * std::sin(pi * q.y) + a * q.x + b * q.y;
                          },
                          std::nullopt};
  p.source = {[a, b](const Point& q) {
                const double sx = std::sin(pi * q.x), sy = std::sin(pi * q.y);
                const double cx = std::cos(pi * q.x), cy = std::cos(pi * q.y);
                return 2.0 * pi * pi * sx * sy + pi * cx * sy + pi * sx * cy + a + b;
              },
              std::nullopt};
  for (const char* tag : {"bottom", "right", "top", "left"}) p.dirichlet[tag] = exact;
  p.exact = exact;
  p.u_min = std::min({0.0, a, b, a + b});
  p.u_max = 1.0 + std::max({0.0, a, b, a + b});
  return p;
}

std::vector<CoefficientSample> evaluate_coefficients(const ProblemSpec& spec, std::span<const Point> points) {
  std::vector<CoefficientSample> out;
  out.reserve(points.size());
  for (const auto& p : points)
    out.push_back({spec.diffusion(p), spec.convection(p), spec.reaction(p), spec.source(p)});
  return out;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  const nlohmann::json j = load_config_file(path);
  const nlohmann::json& root = j.contains("problem") ? j.at("problem") : j;
  try {
    ProblemSpec p;
    p.name = root.value("name", path.stem().string());
    p.domain = domain_from_json(root.at("domain"));
    if (root.contains("K")) p.diffusion = scalar_from_json(root.at("K"), "K");
    if (root.contains("beta")) {
      const auto& b = root.at("beta");
      if (!b.is_array() || b.size() != 2) throw ProblemError("beta must be a two-element array");
      const ScalarField bx = scalar_from_json(b.at(0), "beta[0]");
      const ScalarField by = scalar_from_json(b.at(1), "beta[1]");
      p.convection = {[bx, by](const Point& q) { return Vec2{bx(q), by(q)}; }};
    }
    if (root.contains("c")) p.reaction = scalar_from_json(root.at("c"), "c");
    if (root.contains("f")) p.source = scalar_from_json(root.at("f"), "f");
    if (root.contains("dirichlet"))
      for (const auto& [tag, v] : root.at("dirichlet").items()) p.dirichlet[tag] = scalar_from_json(v, "dirichlet." + tag);
    if (root.contains("neumann"))
      for (const auto& t : root.at("neumann")) p.neumann_tags.insert(t.get<std::string>());
    if (root.contains("bounds")) {
      p.u_min = root.at("bounds").at(0).get<double>();
      p.u_max = root.at("bounds").at(1).get<double>();
    }
    if (root.contains("exact")) p.exact = scalar_from_json(root.at("exact"), "exact");
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ProblemError(path.string() + ": " + e.what());
  } catch (const ExpressionError& e) {
    throw ProblemError(path.string() + ": " + e.what());
  }
}

}  // namespace fvdg
