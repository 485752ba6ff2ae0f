#include <doctest.h>

#include <cmath>
#include <random>

#include "fragfem/errors.hpp"
#include "fragfem/model.hpp"
#include "helpers.hpp"

using namespace fragfem;

namespace {

double exact_moment(const TestCase& c, const std::string& name, double t) {
  for (const auto& m : c.moments)
    if (m.name == name) return m.exact(point_variables(Point{}, t));
  FAIL("moment not found: " << name);
  return 0.0;
}

}  // namespace

TEST_CASE("bundled exact moments") {
  CHECK(exact_moment(bundled_test_case("1"), "m00", 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(exact_moment(bundled_test_case("1"), "m00", 1.0) == doctest::Approx(2.71828).epsilon(1e-6));
  CHECK(exact_moment(bundled_test_case("2"), "m00", 3.0) == doctest::Approx(7.0));
  CHECK(exact_moment(bundled_test_case("2"), "m10+m01", 3.0) == doctest::Approx(2.0));
  CHECK(exact_moment(bundled_test_case("5"), "m111", 2.3) == doctest::Approx(1.0));
  CHECK(exact_moment(bundled_test_case("5"), "m000", 1.0) == doctest::Approx(8.0));
}

TEST_CASE("case catalogue") {
  const auto ids = bundled_case_ids();
  CHECK(ids.size() == 8);
  for (const auto& id : ids) {
    const TestCase c = bundled_test_case(id);
    CHECK(c.dim == c.domain.dim);
    c.domain.validate();
    CHECK(!c.report_times.empty());
  }
  CHECK(bundled_test_case("5").dim == 3);
  CHECK(bundled_test_case("conv3").dim == 3);
  CHECK(bundled_test_case("3").kernel.kind == KernelKind::HalvingDelta);
  CHECK_THROWS_AS(bundled_test_case("6"), UnknownCase);
}

TEST_CASE("moment names") {
  const auto a = parse_moment_name("m10+m01", 2);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == Index3{1, 0, 0});
  CHECK(a[1] == Index3{0, 1, 0});
  CHECK(parse_moment_name("m111", 3).front() == Index3{1, 1, 1});
  CHECK_THROWS_AS(parse_moment_name("m1", 2), Error);
  CHECK_THROWS_AS(parse_moment_name("q00", 2), Error);
}

TEST_CASE("daughter count and mass ratio") {
  const auto q2 = box_quadrature(2, 8);
  const MassCheck c2 = kernel_mass_check(FragmentationKernel::smooth("2/(y1*y2)"), Point{1.0, 1.0, 0.0}, 2, q2);
  CHECK(c2.nu == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(c2.mass_ratio == doctest::Approx(1.0).epsilon(1e-13));
  const MassCheck c3 =
      kernel_mass_check(FragmentationKernel::smooth("8/(y1*y2*y3)"), Point{1.0, 1.0, 1.0}, 3, box_quadrature(3, 6));
  CHECK(c3.nu == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(std::abs(c3.mass_ratio - 1.0) > 0.5);
}

TEST_CASE("kernel support") {
  const FragmentationKernel k = FragmentationKernel::smooth("2/(y1*y2)");
  CHECK(k.parent_only());
  CHECK(k(Point{0.5, 0.5, 0}, Point{1, 1, 0}, 2) == doctest::Approx(2.0));
  CHECK(k(Point{1.5, 0.5, 0}, Point{1, 1, 0}, 2) == 0.0);
  CHECK_FALSE(FragmentationKernel::smooth("x1/y1").parent_only());
  CHECK_THROWS_AS(FragmentationKernel::halving()(Point{}, Point{}, 2), Error);
}

TEST_CASE("step-size bound estimates") {
  const TestCase c3 = bundled_test_case("3");
  CHECK(estimate_b0(c3.kernel, c3.selection, c3.domain) == doctest::Approx(4.0).epsilon(1e-9));
  const TestCase c4 = bundled_test_case("4");
  CHECK(estimate_b0(c4.kernel, c4.selection, c4.domain) == doctest::Approx(16.0).epsilon(1e-9));
  // 1/y kernels are unbounded near the lower corner
  const TestCase c1 = bundled_test_case("1");
  CHECK(estimate_b0(c1.kernel, c1.selection, c1.domain) > 1e6);
}

TEST_CASE("selection from an expression matches the bundled case") {
  const SelectionFn mine = SelectionFn::parse("x1 + x2");
  const TestCase c2 = bundled_test_case("2");
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(1e-9, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Point x{u(rng), u(rng), 0.0};
    CHECK(mine(x) == c2.selection(x));
  }
}
