#pragma once

#include <array>
#include <vector>

namespace fragfem {

/// Coordinates are always stored with three slots; unused slots stay zero.
using Point = std::array<double, 3>;

struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Highest exactness degree simplex_quadrature accepts.
inline constexpr int kMaxSimplexDegree = 40;

/// Rule on the ordered simplex 1 >= t0 >= t1 (>= t2) >= 0. Coordinate t_k of
/// every point only depends on the first k+1 collapsed Gauss coordinates, which
/// keeps the number of distinct coordinate values small.
QuadratureRule ordered_simplex_quadrature(int dim, int degree);

/// Rule on the unit simplex {xi >= 0, sum xi <= 1}; weights sum to 1/dim!.
QuadratureRule simplex_quadrature(int dim, int degree);

/// Tensor Gauss-Legendre rule on [0,1]^dim.
QuadratureRule box_quadrature(int dim, int points_per_axis);

}  // namespace fragfem
