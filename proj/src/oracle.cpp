#include "fragfem/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fragfem/errors.hpp"
#include "fragfem/geometry.hpp"

namespace fragfem {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

std::vector<double> axis_breaks(double a, double b, int base, const std::vector<double>* extra) {
  std::vector<double> pts;
  for (int i = 0; i <= base; ++i) pts.push_back(a + (b - a) * i / base);
  // log-spaced splits when the interval spans decades (kernels like 1/y)
  if (a > 0.0)
    for (double p = a * 10.0; p < b; p *= 10.0) pts.push_back(p);
  if (extra)
    for (double p : *extra)
      if (p > a && p < b) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts)
    if (out.empty() || p - out.back() > 1e-14 * std::max(1.0, std::abs(p))) out.push_back(p);
  out.back() = b;
  return out;
}

// 15-point Kronrod panels, bisected until a panel and its two halves agree.
template <class F>
double adaptive(F&& f, double a, double b, double tol, int max_depth) {
  double l1 = 0.0;
  std::function<double(double, double, double, int)> rec = [&](double lo, double hi, double whole, int depth) {
    const double mid = 0.5 * (lo + hi);
    double left_l1 = 0.0, right_l1 = 0.0;
    const double left = GK::integrate(f, lo, mid, 0, 0.0, nullptr, &left_l1);
    const double right = GK::integrate(f, mid, hi, 0, 0.0, nullptr, &right_l1);
    const double gap = std::abs(left + right - whole);
    if (gap <= tol * (left_l1 + right_l1) || gap <= 1e-15 * l1) return left + right;
    if (depth >= max_depth) throw NoConvergence("adaptive gain quadrature did not converge", left + right, gap);
    return rec(lo, mid, left, depth + 1) + rec(mid, hi, right, depth + 1);
  };
  const double whole = GK::integrate(f, a, b, 0, 0.0, nullptr, &l1);
  return rec(a, b, whole, 0);
}

}  // namespace

double brute_force_gain(const ScalarField& u, const FragmentationKernel& beta, const SelectionFn& gamma,
                        const DomainBox& box, const Point& x, const OracleOptions& options,
                        const std::array<std::vector<double>, 3>* breakpoints) {
  if (beta.kind != KernelKind::SmoothDensity) throw Error("brute_force_gain needs a smooth kernel");
  const int d = box.dim;
  for (int k = 0; k < d; ++k)
    if (x[k] >= box.upper[k]) return 0.0;
  std::array<std::vector<double>, 3> breaks;
  for (int k = 0; k < d; ++k)
    breaks[k] = axis_breaks(x[k], box.upper[k], options.base_panels, breakpoints ? &(*breakpoints)[k] : nullptr);

  Point y{0.0, 0.0, 0.0};
  // innermost levels get a tighter tolerance so that the outer levels see a smooth integrand
  std::function<double(int)> level = [&](int k) -> double {
    if (k == d) return beta.density(pair_variables(x, y)) * gamma(y) * u(y);
    const double tol = options.tolerance * std::pow(0.1, k);
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < breaks[k].size(); ++p) {
      const double a = breaks[k][p], b = breaks[k][p + 1];
      if (a > 0.0 && b > 2.0 * a) {
        // y = e^s keeps 1/y-type kernels smooth on panels spanning decades
        total += adaptive(
            [&](double s) {
              y[k] = std::exp(s);
              return level(k + 1) * y[k];
            },
            std::log(a), std::log(b), tol, options.max_depth);
      } else {
        total += adaptive(
            [&](double s) {
              y[k] = s;
              return level(k + 1);
            },
            a, b, tol, options.max_depth);
      }
    }
    return total;
  };
  return level(0);
}

GainCheck gain_matrix_check(const Eigen::MatrixXd& B, const Eigen::VectorXd& alpha, const FeSpace& space,
                            const FragmentationKernel& beta, const SelectionFn& gamma, double tolerance) {
  if (beta.kind != KernelKind::SmoothDensity) throw Error("gain_matrix_check needs a smooth kernel");
  const Mesh& mesh = space.mesh;
  const int d = space.dim(), r = space.degree(), m = space.num_dofs();
  const int spc = mesh.simplices_per_cell();
  const QuadratureRule inner = simplex_quadrature(d, 2 * r + 4);
  const QuadratureRule outer = simplex_quadrature(d, 2 * r + d + 4);
  std::vector<std::vector<double>> inner_phi;
  for (const auto& xi : inner.points) inner_phi.push_back(space.element.values_at(xi));
  std::vector<BarycentricMap> maps;
  for (int e = 0; e < mesh.num_elements(); ++e) maps.emplace_back(mesh.element(e));

  GainCheck out;
  out.reference = Eigen::VectorXd::Zero(m);
  if (alpha.cwiseAbs().maxCoeff() == 0.0) return out;

  std::vector<Point> pts;
  std::vector<double> wts;
  std::vector<std::pair<Point, double>> planes;
  double phi[20];
  // integrand vector at a parent point y inside parent element ey
  auto integrand = [&](int ey, const Point& y, Eigen::VectorXd& f) {
    f.setZero(m);
    space.element.values(maps[ey](y), phi);
    auto ed = space.dofs.element_dofs(ey);
    double uh = 0.0;
    for (std::size_t a = 0; a < ed.size(); ++a) uh += alpha[ed[a]] * phi[a];
    const double scale = gamma(y) * uh;
    if (scale == 0.0) return;
    Index3 top{0, 0, 0};
    for (int k = 0; k < d; ++k) top[k] = locate_interval(mesh.lines(k), y[k]);
    for (int c2 = 0; c2 <= top[2]; ++c2)
      for (int c1 = 0; c1 <= top[1]; ++c1)
        for (int c0 = 0; c0 <= top[0]; ++c0) {
          const int c = mesh.cell_id({c0, c1, c2});
          const Point lo = mesh.cell_lower(c), w = mesh.cell_width(c);
          planes.clear();
          bool empty = false;
          for (int k = 0; k < d; ++k) {
            if (lo[k] >= y[k]) empty = true;
            if (lo[k] + w[k] > y[k]) {
              Point n{0.0, 0.0, 0.0};
              n[k] = 1.0;
              planes.emplace_back(n, y[k]);
            }
          }
          if (empty) continue;
          for (int p = 0; p < spc; ++p) {
            const int ex = c * spc + p;
            const Simplex s = mesh.element(ex);
            auto xd = space.dofs.element_dofs(ex);
            auto accumulate = [&](const Simplex& piece, bool whole) {
              pts.clear();
              wts.clear();
              map_rule(piece, inner, pts, wts);
              for (std::size_t q = 0; q < pts.size(); ++q) {
                const double bw = wts[q] * beta.density(pair_variables(pts[q], y)) * scale;
                if (whole) {
                  for (std::size_t a = 0; a < xd.size(); ++a) f[xd[a]] += bw * inner_phi[q][a];
                } else {
                  space.element.values(maps[ex](pts[q]), phi);
                  for (std::size_t a = 0; a < xd.size(); ++a) f[xd[a]] += bw * phi[a];
                }
              }
            };
            if (planes.empty()) {
              accumulate(s, true);
            } else {
              for (const auto& piece : clip_all(s, planes)) accumulate(piece, false);
            }
          }
        }
  };

  auto rule_on = [&](int ey, const Simplex& s, Eigen::VectorXd& acc) {
    std::vector<Point> yp;
    std::vector<double> yw;
    map_rule(s, outer, yp, yw);
    Eigen::VectorXd f(m);
    acc.setZero(m);
    for (std::size_t q = 0; q < yp.size(); ++q) {
      integrand(ey, yp[q], f);
      acc += yw[q] * f;
    }
  };

  // coarse pass fixes the absolute tolerance
  Eigen::VectorXd coarse = Eigen::VectorXd::Zero(m), tmp(m);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    rule_on(e, mesh.element(e), tmp);
    coarse += tmp;
  }
  const double scale = std::max(coarse.cwiseAbs().maxCoeff(), 1e-300);
  // leaves near the lower corner resolve the 1e-9 offset, hence the deep limit
  const int max_depth = d == 2 ? 40 : 14;

  std::function<void(int, const Simplex&, const Eigen::VectorXd&, int)> refine =
      [&](int ey, const Simplex& s, const Eigen::VectorXd& whole, int depth) {
        std::vector<Simplex> kids;
        subdivide(s, kids);
        std::vector<Eigen::VectorXd> parts(kids.size());
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
        for (std::size_t k = 0; k < kids.size(); ++k) {
          rule_on(ey, kids[k], parts[k]);
          sum += parts[k];
        }
        const double gap = (sum - whole).cwiseAbs().maxCoeff();
        if (gap <= tolerance * scale) {
          out.reference += sum;
          return;
        }
        if (depth >= max_depth) throw NoConvergence("oracle gain matrix check did not converge", sum.norm(), gap);
        for (std::size_t k = 0; k < kids.size(); ++k) refine(ey, kids[k], parts[k], depth + 1);
      };
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Simplex s = mesh.element(e);
    rule_on(e, s, tmp);
    refine(e, s, tmp, 0);
  }

  const Eigen::VectorXd ba = B * alpha;
  const double ref_max = out.reference.cwiseAbs().maxCoeff();
  const double diff = (ba - out.reference).cwiseAbs().maxCoeff();
  out.mismatch = ref_max > 0.0 ? diff / ref_max : diff;
  return out;
}

ScalarField time_derivative(const Expression& u, double t) {
  try {
    Expression du = u.derivative(Variable::t);
    return [du, t](const Point& x) { return du(point_variables(x, t)); };
  } catch (const Error&) {
    const double h = 1e-6 * (1.0 + std::abs(t));
    return [u, t, h](const Point& x) {
      return (u(point_variables(x, t + h)) - u(point_variables(x, t - h))) / (2.0 * h);
    };
  }
}

ResidualReport residual_check(const Expression& exact, const FragmentationKernel& beta, const SelectionFn& gamma,
                              const DomainBox& box, double final_time, const ResidualOptions& options) {
  const int d = box.dim;
  const int n = options.lattice > 0 ? options.lattice : (d == 2 ? 4 : 2);
  std::vector<double> times = options.times;
  if (times.empty()) times = d == 2 ? std::vector<double>{0.0, 0.5 * final_time, final_time}
                                    : std::vector<double>{0.0, final_time};
  int total = 1;
  for (int k = 0; k < d; ++k) total *= n;

  ResidualReport rep;
  for (double t : times) {
    const ScalarField dudt = time_derivative(exact, t);
    const ScalarField u = [&exact, t](const Point& y) { return exact(point_variables(y, t)); };
    for (int i = 0; i < total; ++i) {
      ResidualSample s;
      s.t = t;
      int rem = i;
      for (int k = 0; k < d; ++k) {
        s.x[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * ((rem % n) + 0.5) / n;
        rem /= n;
      }
      s.dudt = dudt(s.x);
      s.loss = gamma(s.x) * u(s.x);
      if (beta.kind == KernelKind::HalvingDelta) {
        Point y{2.0 * s.x[0], 2.0 * s.x[1], 2.0 * s.x[2]};
        s.gain = box.contains(y) ? std::pow(2.0, d + 1) * gamma(y) * u(y) : 0.0;
      } else {
        s.gain = brute_force_gain(u, beta, gamma, box, s.x, options.oracle);
      }
      s.residual = s.dudt + s.loss - s.gain;
      rep.max_residual = std::max(rep.max_residual, std::abs(s.residual));
      rep.max_dudt = std::max(rep.max_dudt, std::abs(s.dudt));
      rep.samples.push_back(s);
    }
  }
  rep.threshold = options.relative_threshold * rep.max_dudt;
  rep.needs_mms = rep.max_residual > rep.threshold;
  return rep;
}

MmsSource::MmsSource(const FeSpace& space, const Expression& exact, const FragmentationKernel& beta,
                     const SelectionFn& gamma, const AssemblyOptions& options)
    : space_(space), exact_(exact), gamma_(gamma), gain_(space, beta, gamma, options) {
  try {
    dudt_ = exact.derivative(Variable::t);
  } catch (const Error&) {
  }
}

Eigen::VectorXd MmsSource::load(double t) const {
  const ScalarField dudt = dudt_ ? ScalarField([this, t](const Point& x) { return (*dudt_)(point_variables(x, t)); })
                                 : time_derivative(exact_, t);
  Eigen::VectorXd f = load_vector(
      space_, [&](const Point& x) { return dudt(x) + gamma_(x) * exact_(point_variables(x, t)); },
      2 * space_.degree() + 4);
  f -= gain_([&](const Point& y) { return exact_(point_variables(y, t)); });
  return f;
}

}  // namespace fragfem
