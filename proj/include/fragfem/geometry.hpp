#pragma once

#include <array>
#include <vector>

#include "fragfem/quadrature.hpp"

namespace fragfem {

/// Triangle (dim 2) or tetrahedron (dim 3); v[dim+1..3] unused.
struct Simplex {
  int dim = 2;
  std::array<Point, 4> v{};

  double measure() const;
  Point map(const std::array<double, 4>& lambda) const;
  /// Barycentric coordinates of x (not clamped).
  std::array<double, 4> barycentric(const Point& x) const;
};

/// Affine barycentric coordinate functions: lambda_k(x) = c[k] + g[k] . x.
struct BarycentricMap {
  int dim = 2;
  std::array<double, 4> c{};
  std::array<Point, 4> g{};

  explicit BarycentricMap(const Simplex& s);
  BarycentricMap() = default;
  std::array<double, 4> operator()(const Point& x) const;
};

/// Appends to out the pieces of s inside {x : normal . x <= offset}.
void clip_halfspace(const Simplex& s, const Point& normal, double offset, std::vector<Simplex>& out);

/// Clips s by every half-space; pieces of zero measure are dropped.
std::vector<Simplex> clip_all(const Simplex& s, const std::vector<std::pair<Point, double>>& planes);

/// Regular refinement: 4 children for triangles, 8 for tetrahedra.
void subdivide(const Simplex& s, std::vector<Simplex>& out);

/// Maps a rule on the unit simplex onto s, appending physical points and weights.
void map_rule(const Simplex& s, const QuadratureRule& rule, std::vector<Point>& points,
              std::vector<double>& weights);

}  // namespace fragfem
