#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fragfem/assembly.hpp"

namespace fragfem {

struct TimeGrid {
  double final_time = 1.0;
  long steps = 100;

  double tau() const { return final_time / static_cast<double>(steps); }
  double time(long n) const { return final_time * static_cast<double>(n) / static_cast<double>(steps); }
  /// Step count ceil(T / tau) (at least 2) so that the final level hits T.
  static TimeGrid from_step(double final_time, double tau);
  void validate() const;
};

enum class StoragePolicy { All, LastTwo, Sampled };

/// M-weighted norm sqrt(a^T M a).
double m_norm(const SparseMatrix& M, const Eigen::VectorXd& a);

/// Solves M alpha = (f, phi).
Eigen::VectorXd l2_project(const FeSpace& space, const SparseMatrix& M,
                           const std::function<double(const Point&)>& f, int degree = -1);
/// Solves M alpha = b with b_i = phi_i(x0).
Eigen::VectorXd l2_project_dirac(const FeSpace& space, const SparseMatrix& M, const Point& x0);

/// Factored stepping matrix c M + A - B.
class StepSolver {
 public:
  StepSolver(const SystemMatrices& m, double mass_factor);
  StepSolver(const StepSolver&) = delete;
  StepSolver& operator=(const StepSolver&) = delete;
  ~StepSolver();

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  double rcond() const { return rcond_; }
  /// ||K z - rhs||_inf / ||rhs||_inf for the given solution.
  double residual(const Eigen::VectorXd& z, const Eigen::VectorXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  const SystemMatrices* sys_;
  double c_;
  double rcond_ = 0.0;
};

/// (M/tau + A - B) a1 = (M/tau) a0 + F.
Eigen::VectorXd step_bdf1(const SystemMatrices& m, const Eigen::VectorXd& a0, double tau,
                          const Eigen::VectorXd* load = nullptr);
/// (3M/(2tau) + A - B) an = (M/tau)(2 a_{n-1} - a_{n-2}/2) + F.
Eigen::VectorXd step_bdf2(const SystemMatrices& m, const Eigen::VectorXd& a1, const Eigen::VectorXd& a2, double tau,
                          const Eigen::VectorXd* load = nullptr);

struct RunOptions {
  StoragePolicy storage = StoragePolicy::Sampled;
  std::vector<double> sample_times;
  /// Load vector at time t (manufactured source); empty for none.
  std::function<Eigen::VectorXd(double)> load;
  /// Bound for the step-size advisory; <= 0 disables it.
  double b0 = 0.0;
  bool record_norms = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<long> steps;
  std::vector<Eigen::VectorXd> states;
  /// ||alpha^n||_M for every level n = 0..N.
  std::vector<double> norms;
  Eigen::VectorXd last;

  /// Stored state nearest to t.
  const Eigen::VectorXd& at(double t) const;
};

struct RunReport {
  TimeGrid grid;
  double tau = 0.0;
  double b0 = 0.0;
  bool step_warning = false;
  std::string warning;
  double rcond_bdf1 = 0.0;
  double rcond_bdf2 = 0.0;
  double solve_residual = 0.0;
  double seconds = 0.0;
};

/// Level index closest to t.
long snap_to_level(const TimeGrid& grid, double t);

/// alpha^1 by BDF1, then BDF2 up to N.
Trajectory integrate(const SystemMatrices& m, const Eigen::VectorXd& alpha0, const TimeGrid& grid,
                     const RunOptions& options, RunReport* report = nullptr);

}  // namespace fragfem
