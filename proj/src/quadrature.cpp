#include "fragfem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fragfem/errors.hpp"

namespace fragfem {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw UnsupportedDegree("Gauss-Legendre rule needs at least one point");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    // z is the i-th largest root on [-1,1]
    nodes[n - 1 - i] = 0.5 * (1.0 + z);
    nodes[i] = 0.5 * (1.0 - z);
    weights[n - 1 - i] = 0.5 * w;
    weights[i] = 0.5 * w;
  }
}

QuadratureRule ordered_simplex_quadrature(int dim, int degree) {
  if (dim < 1 || dim > 3) throw UnsupportedDegree("simplex rule dimension must be 1..3");
  if (degree < 0 || degree > kMaxSimplexDegree)
    throw UnsupportedDegree("simplex rule degree " + std::to_string(degree) + " not supported");
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = degree;
  // t0 = u, t1 = u v, t2 = u v w with Jacobian u^(dim-1) v^(dim-2)
  std::vector<double> xu, wu, xv, wv, xw, ww;
  if (dim == 1) {
    gauss_legendre((degree + 2) / 2, xu, wu);
    for (std::size_t a = 0; a < xu.size(); ++a) {
      rule.points.push_back({xu[a], 0.0, 0.0});
      rule.weights.push_back(wu[a]);
    }
    return rule;
  }
  auto count = [](int deg) { return (deg + 2) / 2; };  // ceil((deg+1)/2)
  gauss_legendre(count(degree + dim - 1), xu, wu);
  gauss_legendre(count(degree + dim - 2), xv, wv);
  if (dim == 2) {
    for (std::size_t a = 0; a < xu.size(); ++a)
      for (std::size_t b = 0; b < xv.size(); ++b) {
        double u = xu[a], v = xv[b];
        rule.points.push_back({u, u * v, 0.0});
        rule.weights.push_back(wu[a] * wv[b] * u);
      }
    return rule;
  }
  gauss_legendre(count(degree), xw, ww);
  for (std::size_t a = 0; a < xu.size(); ++a)
    for (std::size_t b = 0; b < xv.size(); ++b)
      for (std::size_t c = 0; c < xw.size(); ++c) {
        double u = xu[a], v = xv[b], w = xw[c];
        rule.points.push_back({u, u * v, u * v * w});
        rule.weights.push_back(wu[a] * wv[b] * ww[c] * u * u * v);
      }
  return rule;
}

QuadratureRule simplex_quadrature(int dim, int degree) {
  QuadratureRule rule = ordered_simplex_quadrature(dim, degree);
  // xi_1 = 1 - t0, xi_2 = t0 - t1, xi_3 = t1 - t2 maps the ordered simplex onto
  // the unit simplex with unit Jacobian.
  for (auto& p : rule.points) {
    Point t = p;
    if (dim == 1) {
      p = {t[0], 0.0, 0.0};
    } else if (dim == 2) {
      p = {1.0 - t[0], t[0] - t[1], 0.0};
    } else {
      p = {1.0 - t[0], t[0] - t[1], t[1] - t[2]};
    }
  }
  return rule;
}

QuadratureRule box_quadrature(int dim, int points_per_axis) {
  if (dim < 1 || dim > 3) throw UnsupportedDegree("box rule dimension must be 1..3");
  std::vector<double> x, w;
  gauss_legendre(points_per_axis, x, w);
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = 2 * points_per_axis - 1;
  const int n = points_per_axis;
  const int nz = dim == 3 ? n : 1;
  const int ny = dim >= 2 ? n : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < n; ++i) {
        Point p{x[i], dim >= 2 ? x[j] : 0.0, dim == 3 ? x[k] : 0.0};
        double wt = w[i] * (dim >= 2 ? w[j] : 1.0) * (dim == 3 ? w[k] : 1.0);
        rule.points.push_back(p);
        rule.weights.push_back(wt);
      }
  return rule;
}

}  // namespace fragfem
