#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fragfem/basis.hpp"
#include "fragfem/expression.hpp"
#include "fragfem/integrator.hpp"

namespace fragfem {

/// w_i = int prod_k x_k^{q_k} phi_i dx, summed over the listed orders.
struct MomentWeights {
  std::vector<Index3> orders;
  Eigen::VectorXd w;
};

MomentWeights moment_weights(const FeSpace& space, const std::vector<Index3>& orders);
inline double moment(const Eigen::VectorXd& alpha, const MomentWeights& weights) { return weights.w.dot(alpha); }

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // full H1 norm: L2 and gradient parts
  double relative_l2 = 0.0;
  double exact_l2 = 0.0;
};

/// Element quadrature of u - u_h and its gradient (default exactness 2r+4).
ErrorNorms l2_h1_errors(const FeSpace& space, const Eigen::VectorXd& alpha, const Expression& exact, double t,
                        int degree = -1);

/// ln(e_k / e_{k+1}) / ln(h_k / h_{k+1}) for each consecutive pair.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

inline double relative_error(double exact, double numerical) { return std::abs(exact - numerical) / std::abs(exact); }

struct ConservationRow {
  double t = 0.0;
  double number = 0.0;
  double mass = 0.0;
  double drift = 0.0;  // (mass - mass(0)) / mass(0)
};

/// One row per stored level; drift is relative to the first stored level.
std::vector<ConservationRow> conservation_series(const Trajectory& traj, const MomentWeights& number,
                                                 const MomentWeights& mass);

}  // namespace fragfem
