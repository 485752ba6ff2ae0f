#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fragfem/errors.hpp"
#include "fragfem/quadrature.hpp"

using namespace fragfem;

namespace {

double integrate(const QuadratureRule& r, int a, int b, int c) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q)
    s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b) * std::pow(r.points[q][2], c);
  return s;
}

}  // namespace

TEST_CASE("triangle monomial x^2 y") {
  CHECK(integrate(simplex_quadrature(2, 3), 2, 1, 0) == doctest::Approx(1.0 / 60).epsilon(1e-14));
}

TEST_CASE("tetrahedron monomial xyz") {
  CHECK(integrate(simplex_quadrature(3, 3), 1, 1, 1) == doctest::Approx(1.0 / 720).epsilon(1e-14));
}

TEST_CASE("simplex weights sum to the reference volume") {
  for (int deg : {1, 5, 12, 25}) {
    const auto r2 = simplex_quadrature(2, deg);
    const auto r3 = simplex_quadrature(3, deg);
    CHECK(std::accumulate(r2.weights.begin(), r2.weights.end(), 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::accumulate(r3.weights.begin(), r3.weights.end(), 0.0) == doctest::Approx(1.0 / 6).epsilon(1e-14));
  }
}

TEST_CASE("simplex rules are exact to their degree and not beyond") {
  for (int deg : {2, 7, 14}) {
    const auto r = simplex_quadrature(2, deg);
    // x^deg over the triangle = deg! / (deg+2)! = 1 / ((deg+1)(deg+2))
    CHECK(integrate(r, deg, 0, 0) == doctest::Approx(1.0 / ((deg + 1.0) * (deg + 2.0))).epsilon(1e-13));
  }
  const auto low = simplex_quadrature(2, 1);
  CHECK(std::abs(integrate(low, 4, 0, 0) - 1.0 / 30) > 1e-6);
}

TEST_CASE("points of the unit simplex rule stay inside") {
  const auto r = simplex_quadrature(3, 10);
  for (const auto& p : r.points) {
    CHECK(p[0] >= 0.0);
    CHECK(p[1] >= 0.0);
    CHECK(p[2] >= 0.0);
    CHECK(p[0] + p[1] + p[2] <= 1.0 + 1e-15);
  }
}

TEST_CASE("ordered simplex rule integrates over t0 >= t1") {
  const auto r = ordered_simplex_quadrature(2, 6);
  // int_0^1 int_0^t0 t0^2 t1 = int t0^4 / 2 = 1/10
  CHECK(integrate(r, 2, 1, 0) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("box rules") {
  CHECK(integrate(box_quadrature(2, 2), 3, 3, 0) == doctest::Approx(1.0 / 16).epsilon(1e-15));
  CHECK(integrate(box_quadrature(3, 3), 5, 0, 0) == doctest::Approx(1.0 / 6).epsilon(1e-15));
}

TEST_CASE("gauss legendre on [0,1]") {
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  REQUIRE(x.size() == 5);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * std::pow(x[i], 9);
  CHECK(s == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("unsupported degree is rejected") {
  CHECK_THROWS_AS(simplex_quadrature(2, kMaxSimplexDegree + 1), UnsupportedDegree);
}
