#include "fragfem/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "fragfem/errors.hpp"

namespace fragfem {

SelectionFn SelectionFn::parse(std::string_view source, std::optional<double> bound) {
  SelectionFn s;
  s.expr = Expression::parse(source);
  if (s.expr.depends_on_any({Variable::y1, Variable::y2, Variable::y3, Variable::t}))
    throw Error("selection rate may only depend on x1, x2, x3");
  s.bound = bound;
  return s;
}

FragmentationKernel FragmentationKernel::smooth(std::string_view source) {
  FragmentationKernel k;
  k.kind = KernelKind::SmoothDensity;
  k.density = Expression::parse(source);
  if (k.density.depends_on(Variable::t)) throw Error("fragmentation kernel may not depend on t");
  return k;
}

FragmentationKernel FragmentationKernel::halving() {
  FragmentationKernel k;
  k.kind = KernelKind::HalvingDelta;
  return k;
}

double FragmentationKernel::operator()(const Point& x, const Point& y, int dim) const {
  if (kind == KernelKind::HalvingDelta) throw Error("the halving kernel cannot be sampled pointwise");
  for (int k = 0; k < dim; ++k)
    if (x[k] > y[k]) return 0.0;
  return density(pair_variables(x, y));
}

bool FragmentationKernel::parent_only() const {
  return kind == KernelKind::SmoothDensity &&
         !density.depends_on_any({Variable::x1, Variable::x2, Variable::x3});
}

std::string FragmentationKernel::describe() const {
  return kind == KernelKind::HalvingDelta ? std::string("halving") : density.to_string();
}

namespace {

TestCase base_case(std::string id, int dim) {
  TestCase c;
  c.id = std::move(id);
  c.dim = dim;
  c.domain.dim = dim;
  c.domain.lower = {1e-9, 1e-9, dim == 3 ? 1e-9 : 0.0};
  c.domain.upper = {2.0, 2.0, dim == 3 ? 2.0 : 0.0};
  c.initial.kind = InitialCondition::Kind::Dirac;
  c.initial.point = {1.0, 1.0, dim == 3 ? 1.0 : 0.0};
  return c;
}

MomentSpec moment(const std::string& name, int dim, const std::string& exact) {
  return {name, parse_moment_name(name, dim), Expression::parse(exact)};
}

}  // namespace

std::vector<std::string> bundled_case_ids() { return {"1", "2", "3", "4", "5", "conv1", "conv2", "conv3"}; }

TestCase bundled_test_case(std::string_view id) {
  const std::vector<double> long_times{1.0, 1.5, 2.0, 2.5, 3.0};
  if (id == "1") {
    TestCase c = base_case("1", 2);
    c.selection = SelectionFn::parse("1", 1.0);
    c.kernel = FragmentationKernel::smooth("2/(y1*y2)");
    c.moments = {moment("m00", 2, "exp(t)"), moment("m10+m01", 2, "2"), moment("m11", 2, "exp(-t/2)")};
    c.final_time = 1.0;
    c.report_times = {0.1, 0.4, 0.7, 1.0};
    return c;
  }
  if (id == "2") {
    TestCase c = base_case("2", 2);
    c.selection = SelectionFn::parse("x1+x2", 4.0);
    c.kernel = FragmentationKernel::smooth("2/(y1*y2)");
    c.moments = {moment("m00", 2, "1+2*t"), moment("m10+m01", 2, "2")};
    c.final_time = 3.0;
    c.report_times = long_times;
    return c;
  }
  if (id == "3") {
    TestCase c = base_case("3", 2);
    c.selection = SelectionFn::parse("1", 1.0);
    c.kernel = FragmentationKernel::halving();
    c.moments = {moment("m00", 2, "exp(t)"), moment("m10+m01", 2, "2"), moment("m11", 2, "exp(-t/2)")};
    c.final_time = 3.0;
    c.report_times = long_times;
    return c;
  }
  if (id == "4") {
    TestCase c = base_case("4", 2);
    c.selection = SelectionFn::parse("x1+x2", 4.0);
    c.kernel = FragmentationKernel::halving();
    c.moments = {moment("m00", 2, "1+2*t"), moment("m10+m01", 2, "2")};
    c.final_time = 3.0;
    c.report_times = long_times;
    return c;
  }
  if (id == "5") {
    TestCase c = base_case("5", 3);
    c.selection = SelectionFn::parse("x1*x2*x3", 8.0);
    c.kernel = FragmentationKernel::smooth("8/(y1*y2*y3)");
    c.moments = {moment("m000", 3, "1+7*t"), moment("m111", 3, "1")};
    c.final_time = 3.0;
    c.report_times = long_times;
    return c;
  }
  auto conv = [](const std::string& name, int dim, const std::string& kernel, const std::string& exact) {
    TestCase c = base_case(name, dim);
    c.selection = SelectionFn::parse("1", 1.0);
    c.kernel = FragmentationKernel::smooth(kernel);
    c.exact_solution = Expression::parse(exact);
    c.initial.kind = InitialCondition::Kind::Field;
    c.initial.field = Expression::parse(exact);
    c.final_time = 1.0;
    c.report_times = {1.0};
    return c;
  };
  if (id == "conv1")
    return conv("conv1", 2, "2/(y1*y2)", "(1+t)^3*exp(-(x1+x2)*(1+t))");
  if (id == "conv2")
    return conv("conv2", 2, "4/(y1*y2)", "(1+t)^4/((1+(1+t)*x1)^3*(1+(1+t)*x2)^3)");
  if (id == "conv3")
    return conv("conv3", 3, "2/(y1*y2*y3)", "(1+t)^4*exp(-(x1+x2+x3)*(1+t))");
  throw UnknownCase("unknown test case '" + std::string(id) + "'");
}

std::vector<Index3> parse_moment_name(std::string_view name, int dim) {
  std::vector<Index3> orders;
  std::size_t pos = 0;
  auto fail = [&] { throw Error("malformed moment name '" + std::string(name) + "'"); };
  while (pos < name.size()) {
    while (pos < name.size() && name[pos] == ' ') ++pos;
    if (pos >= name.size() || (name[pos] != 'm' && name[pos] != 'M')) fail();
    ++pos;
    Index3 q{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      if (pos >= name.size() || !std::isdigit(static_cast<unsigned char>(name[pos]))) fail();
      q[k] = name[pos++] - '0';
    }
    orders.push_back(q);
    while (pos < name.size() && name[pos] == ' ') ++pos;
    if (pos < name.size()) {
      if (name[pos] != '+') fail();
      ++pos;
    }
  }
  if (orders.empty()) fail();
  return orders;
}

MassCheck kernel_mass_check(const FragmentationKernel& kernel, const Point& y, int dim,
                            const QuadratureRule& quad) {
  if (kernel.kind == KernelKind::HalvingDelta) return {2.0, 1.0};
  double vol = 1.0, ysum = 0.0;
  for (int k = 0; k < dim; ++k) {
    vol *= y[k];
    ysum += y[k];
  }
  double nu = 0.0, mass = 0.0;
  for (std::size_t q = 0; q < quad.size(); ++q) {
    Point x{0.0, 0.0, 0.0};
    double xs = 0.0;
    for (int k = 0; k < dim; ++k) {
      x[k] = quad.points[q][k] * y[k];
      xs += x[k];
    }
    double b = kernel(x, y, dim) * quad.weights[q] * vol;
    nu += b;
    mass += xs * b;
  }
  return {nu, mass / ysum};
}

double estimate_b0(const FragmentationKernel& kernel, const SelectionFn& selection, const DomainBox& domain,
                   int lattice) {
  const int d = domain.dim;
  auto lattice_points = [&](int n) {
    std::vector<Point> pts;
    int total = 1;
    for (int k = 0; k < d; ++k) total *= n;
    for (int i = 0; i < total; ++i) {
      Point p{0.0, 0.0, 0.0};
      int rem = i;
      for (int k = 0; k < d; ++k) {
        int a = rem % n;
        rem /= n;
        p[k] = domain.lower[k] + (domain.upper[k] - domain.lower[k]) * a / (n - 1);
      }
      pts.push_back(p);
    }
    return pts;
  };
  if (kernel.kind == KernelKind::HalvingDelta) {
    double a0 = 0.0;
    for (const auto& p : lattice_points(lattice)) a0 = std::max(a0, selection(p));
    return std::pow(2.0, 1.0 + 0.5 * d) * a0;
  }
  double b0 = 0.0;
  if (kernel.parent_only()) {
    for (const auto& y : lattice_points(lattice)) b0 = std::max(b0, kernel(domain.lower, y, d) * selection(y));
    return b0;
  }
  // the pair lattice keeps roughly lattice^d samples in total
  int n = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(lattice)))));
  auto pts = lattice_points(n);
  for (const auto& y : pts) {
    double g = selection(y);
    for (const auto& x : pts) b0 = std::max(b0, kernel(x, y, d) * g);
  }
  return b0;
}

}  // namespace fragfem
