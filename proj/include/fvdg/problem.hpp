#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvdg/geometry.hpp"

namespace fvdg {

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScalarField {
  std::function<double(const Point&)> fn;
  std::optional<double> constant;  // set when the field is spatially constant

  static ScalarField uniform(double v) {
    return {[v](const Point&) { return v; }, v};
  }
  double operator()(const Point& p) const { return constant ? *constant : fn(p); }
};

struct VectorField {
  std::function<Vec2(const Point&)> fn;

  static VectorField uniform(Vec2 v) {
    return {[v](const Point&) { return v; }};
  }
  Vec2 operator()(const Point& p) const { return fn(p); }
};

struct ProblemSpec {
  std::string name;
  ScalarField diffusion = ScalarField::uniform(1.0);
  VectorField convection = VectorField::uniform({0.0, 0.0});
  ScalarField reaction = ScalarField::uniform(0.0);
  ScalarField source = ScalarField::uniform(0.0);
  std::map<std::string, ScalarField> dirichlet;  // boundary tag -> g_D
  std::set<std::string> neumann_tags;            // homogeneous
  double u_min = 0.0;
  double u_max = 1.0;
  Domain domain;
  std::optional<ScalarField> exact;

  BoundaryMap boundary_map() const;
  /// g_D at p on the facet tagged `tag`; throws for non-Dirichlet tags.
  double dirichlet_value(const std::string& tag, const Point& p) const;
  /// Checks that every domain edge tag is Dirichlet xor Neumann.
  void validate() const;
};

enum class Benchmark { triple_layer, l_shaped, internal_layer, hemker, manufactured };

struct BenchmarkOptions {
  int hemker_hole_edges = 128;
};

Benchmark parse_benchmark(const std::string& name);
const char* to_string(Benchmark b);
ProblemSpec make_benchmark(Benchmark b, const BenchmarkOptions& opts = {});
ProblemSpec make_benchmark(const std::string& name, const BenchmarkOptions& opts = {});

/// Smooth problem on the unit square with exact solution
/// sin(pi x) sin(pi y) + a x + b y, K = 1, beta = (1, 1), c = 0, Dirichlet everywhere.
ProblemSpec manufactured_problem(double a = 0.0, double b = 0.0);

struct CoefficientSample {
  double K = 0.0;
  Vec2 beta;
  double c = 0.0;
  double f = 0.0;
};

std::vector<CoefficientSample> evaluate_coefficients(const ProblemSpec& spec, std::span<const Point> points);

/// Custom problem from a TOML or JSON file (see README for the schema).
ProblemSpec load_problem(const std::filesystem::path& path);

}  // namespace fvdg
