#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fragfem/expression.hpp"
#include "fragfem/mesh.hpp"
#include "fragfem/quadrature.hpp"

namespace fragfem {

inline Variables point_variables(const Point& x, double t = 0.0) {
  return {x[0], x[1], x[2], 0.0, 0.0, 0.0, t};
}

inline Variables pair_variables(const Point& x, const Point& y, double t = 0.0) {
  return {x[0], x[1], x[2], y[0], y[1], y[2], t};
}

/// Selection rate Gamma(x).
struct SelectionFn {
  Expression expr = Expression::constant(1.0);
  std::optional<double> bound;

  static SelectionFn parse(std::string_view source, std::optional<double> bound = std::nullopt);
  double operator()(const Point& x) const { return expr(point_variables(x)); }
  bool is_constant() const { return expr.is_constant(); }
};

enum class KernelKind { SmoothDensity, HalvingDelta };

/// Daughter distribution beta(x|y). The halving variant stands for
/// 2 prod_k delta(x_k - y_k / 2) and is never sampled pointwise.
struct FragmentationKernel {
  KernelKind kind = KernelKind::SmoothDensity;
  Expression density;

  static FragmentationKernel smooth(std::string_view source);
  static FragmentationKernel halving();

  /// beta(x|y); zero whenever some x_k > y_k.
  double operator()(const Point& x, const Point& y, int dim) const;
  /// True when beta does not depend on the daughter coordinates.
  bool parent_only() const;
  std::string describe() const;
};

struct InitialCondition {
  enum class Kind { Dirac, Field } kind = Kind::Field;
  Point point{1.0, 1.0, 1.0};
  Expression field = Expression::constant(0.0);
};

/// Sum of mixed moments prod_k x_k^{q_k} with a closed form in t.
struct MomentSpec {
  std::string name;
  std::vector<Index3> orders;
  Expression exact;
};

struct TestCase {
  std::string id;
  int dim = 2;
  DomainBox domain;
  SelectionFn selection;
  FragmentationKernel kernel;
  InitialCondition initial;
  std::vector<MomentSpec> moments;
  std::optional<Expression> exact_solution;
  double final_time = 1.0;
  std::vector<double> report_times;
  std::optional<double> declared_b0;
};

/// Cases "1".."5" and "conv1".."conv3".
TestCase bundled_test_case(std::string_view id);
std::vector<std::string> bundled_case_ids();

/// Parses "m10", "m000", "m10+m01" into exponent lists.
std::vector<Index3> parse_moment_name(std::string_view name, int dim);

struct MassCheck {
  double nu = 0.0;
  double mass_ratio = 0.0;
};

/// Daughter count and mass ratio of beta(.|y) over the box (0, y), using the
/// given rule on [0,1]^dim.
MassCheck kernel_mass_check(const FragmentationKernel& kernel, const Point& y, int dim,
                            const QuadratureRule& quad);

/// Bound of beta*Gamma used by the step-size advisory: lattice maximum over
/// the domain for smooth kernels, 2^(1+dim/2) * max Gamma for the halving kernel.
double estimate_b0(const FragmentationKernel& kernel, const SelectionFn& selection, const DomainBox& domain,
                   int lattice = 32);

}  // namespace fragfem
