#include "fragfem/diagnostics.hpp"

#include <cmath>

#include "fragfem/errors.hpp"
#include "fragfem/geometry.hpp"
#include "fragfem/model.hpp"

namespace fragfem {

MomentWeights moment_weights(const FeSpace& space, const std::vector<Index3>& orders) {
  int top = 0;
  for (const auto& q : orders) top = std::max(top, q[0] + q[1] + q[2]);
  const QuadratureRule rule = simplex_quadrature(space.dim(), top + space.degree());
  std::vector<std::vector<double>> phi;
  for (const auto& xi : rule.points) phi.push_back(space.element.values_at(xi));
  MomentWeights mw;
  mw.orders = orders;
  mw.w = Eigen::VectorXd::Zero(space.num_dofs());
  std::vector<Point> pts;
  std::vector<double> wts;
  for (int e = 0; e < space.mesh.num_elements(); ++e) {
    pts.clear();
    wts.clear();
    map_rule(space.mesh.element(e), rule, pts, wts);
    auto ed = space.dofs.element_dofs(e);
    for (std::size_t p = 0; p < pts.size(); ++p) {
      double f = 0.0;
      for (const auto& q : orders) {
        double v = 1.0;
        for (int k = 0; k < space.dim(); ++k) v *= std::pow(pts[p][k], q[k]);
        f += v;
      }
      for (std::size_t a = 0; a < ed.size(); ++a) mw.w[ed[a]] += wts[p] * f * phi[p][a];
    }
  }
  return mw;
}

ErrorNorms l2_h1_errors(const FeSpace& space, const Eigen::VectorXd& alpha, const Expression& exact, double t,
                        int degree) {
  const int d = space.dim();
  const QuadratureRule rule = simplex_quadrature(d, degree > 0 ? degree : 2 * space.degree() + 4);
  std::vector<std::vector<double>> phi, dphi;
  for (const auto& xi : rule.points) {
    phi.push_back(space.element.values_at(xi));
    dphi.push_back(space.element.gradients_at(xi));
  }
  const Variable xs[3] = {Variable::x1, Variable::x2, Variable::x3};
  std::vector<Expression> grad;
  bool symbolic = true;
  try {
    for (int k = 0; k < d; ++k) grad.push_back(exact.derivative(xs[k]));
  } catch (const Error&) {
    symbolic = false;
  }
  auto exact_grad = [&](const Point& x, int k) {
    if (symbolic) return grad[k](point_variables(x, t));
    const double h = 1e-6 * (1.0 + std::abs(x[k]));
    Point a = x, b = x;
    a[k] += h;
    b[k] -= h;
    return (exact(point_variables(a, t)) - exact(point_variables(b, t))) / (2.0 * h);
  };

  double e2 = 0.0, g2 = 0.0, u2 = 0.0;
  std::vector<Point> pts;
  std::vector<double> wts;
  const int nloc = space.dofs.nodes_per_element;
  for (int e = 0; e < space.mesh.num_elements(); ++e) {
    const Simplex s = space.mesh.element(e);
    Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
    for (int k = 0; k < d; ++k)
      for (int a = 0; a < d; ++a) jac(a, k) = s.v[k + 1][a] - s.v[0][a];
    const Eigen::Matrix3d jinv_t = jac.inverse().transpose();
    pts.clear();
    wts.clear();
    map_rule(s, rule, pts, wts);
    auto ed = space.dofs.element_dofs(e);
    for (std::size_t p = 0; p < pts.size(); ++p) {
      double uh = 0.0;
      Eigen::Vector3d gref = Eigen::Vector3d::Zero();
      for (int a = 0; a < nloc; ++a) {
        const double c = alpha[ed[a]];
        uh += c * phi[p][a];
        for (int k = 0; k < d; ++k) gref[k] += c * dphi[p][a * d + k];
      }
      const Eigen::Vector3d gh = jinv_t * gref;
      const double u = exact(point_variables(pts[p], t));
      e2 += wts[p] * (u - uh) * (u - uh);
      u2 += wts[p] * u * u;
      for (int k = 0; k < d; ++k) {
        const double diff = exact_grad(pts[p], k) - gh[k];
        g2 += wts[p] * diff * diff;
      }
    }
  }
  ErrorNorms n;
  n.l2 = std::sqrt(e2);
  n.h1 = std::sqrt(e2 + g2);
  n.exact_l2 = std::sqrt(u2);
  n.relative_l2 = n.exact_l2 > 0.0 ? n.l2 / n.exact_l2 : n.l2;
  return n;
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2) throw DegenerateSequence("need matching lists of length >= 2");
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (!(errors[k] > 0.0) || !(errors[k + 1] > 0.0)) throw DegenerateSequence("zero error in sequence");
    if (hs[k] == hs[k + 1]) throw DegenerateSequence("repeated mesh size");
    out.push_back(std::log(errors[k] / errors[k + 1]) / std::log(hs[k] / hs[k + 1]));
  }
  return out;
}

std::vector<ConservationRow> conservation_series(const Trajectory& traj, const MomentWeights& number,
                                                 const MomentWeights& mass) {
  std::vector<ConservationRow> rows;
  double m0 = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    ConservationRow r;
    r.t = traj.times[i];
    r.number = moment(traj.states[i], number);
    r.mass = moment(traj.states[i], mass);
    if (i == 0) m0 = r.mass;
    r.drift = m0 != 0.0 ? (r.mass - m0) / m0 : 0.0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fragfem
