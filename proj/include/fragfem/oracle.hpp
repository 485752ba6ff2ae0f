#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fragfem/assembly.hpp"
#include "fragfem/model.hpp"

namespace fragfem {

using ScalarField = std::function<double(const Point&)>;

struct OracleOptions {
  double tolerance = 1e-11;  // relative, per 1D adaptive integral
  int base_panels = 4;       // initial equal splits of each axis interval
  int max_depth = 18;
};

/// int_{y in D, y >= x} beta(x|y) Gamma(y) u(y) dy by nested adaptive
/// Gauss-Kronrod. Extra per-axis breakpoints (e.g. mesh lines) may be given.
double brute_force_gain(const ScalarField& u, const FragmentationKernel& beta, const SelectionFn& gamma,
                        const DomainBox& box, const Point& x, const OracleOptions& options = {},
                        const std::array<std::vector<double>, 3>* breakpoints = nullptr);

struct GainCheck {
  double mismatch = 0.0;  // max_j |(B a)_j - ref_j| / max_j |ref_j|
  Eigen::VectorXd reference;
};

/// Compares B alpha against an independent evaluation of
/// int Gamma(y) u_h(y) int_{x in D, x <= y} beta(x|y) phi_j(x) dx dy,
/// adaptive over parent simplices, clipped exact-degree rules for daughters.
GainCheck gain_matrix_check(const Eigen::MatrixXd& B, const Eigen::VectorXd& alpha, const FeSpace& space,
                            const FragmentationKernel& beta, const SelectionFn& gamma, double tolerance = 1e-10);

struct ResidualSample {
  Point x{};
  double t = 0.0;
  double dudt = 0.0;
  double loss = 0.0;
  double gain = 0.0;
  double residual = 0.0;
};

struct ResidualReport {
  std::vector<ResidualSample> samples;
  double max_residual = 0.0;
  double max_dudt = 0.0;
  double threshold = 0.0;
  bool needs_mms = false;

  std::string verdict() const { return needs_mms ? "needs_mms" : "solves_truncated"; }
};

struct ResidualOptions {
  int lattice = 0;                  // cell centres per axis; 0: 4 in 2D, 2 in 3D
  std::vector<double> times;        // empty: {0, T/2, T} in 2D, {0, T} in 3D
  double relative_threshold = 1e-6; // of max |u_t|
  OracleOptions oracle;
};

/// Time derivative of an exact solution; symbolic when possible, else central
/// differences with step 1e-6 (1 + t).
ScalarField time_derivative(const Expression& u, double t);

/// Strong-form residual u_t + Gamma u - gain(u) sampled on an interior lattice.
ResidualReport residual_check(const Expression& exact, const FragmentationKernel& beta, const SelectionFn& gamma,
                              const DomainBox& box, double final_time, const ResidualOptions& options = {});

/// Load F_j(t) = (u_t + Gamma u, phi_j) - (gain(u), phi_j) that makes the
/// given u an exact solution of the forced truncated problem.
class MmsSource {
 public:
  MmsSource(const FeSpace& space, const Expression& exact, const FragmentationKernel& beta, const SelectionFn& gamma,
            const AssemblyOptions& options = {});

  Eigen::VectorXd load(double t) const;

 private:
  const FeSpace& space_;
  Expression exact_;
  std::optional<Expression> dudt_;
  SelectionFn gamma_;
  GainLoad gain_;
};

}  // namespace fragfem
