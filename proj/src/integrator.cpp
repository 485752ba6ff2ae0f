#include "fragfem/integrator.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <set>

#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include "fragfem/errors.hpp"

namespace fragfem {

TimeGrid TimeGrid::from_step(double final_time, double tau) {
  if (!(tau > 0.0) || !(final_time > 0.0)) throw Error("time step and final time must be positive");
  TimeGrid g;
  g.final_time = final_time;
  g.steps = std::max<long>(2, static_cast<long>(std::ceil(final_time / tau - 1e-9)));
  return g;
}

void TimeGrid::validate() const {
  if (!(final_time > 0.0)) throw Error("final time must be positive");
  if (steps < 2) throw Error("at least two time steps are needed");
}

double m_norm(const SparseMatrix& M, const Eigen::VectorXd& a) { return std::sqrt(std::max(0.0, a.dot(M * a))); }

namespace {

Eigen::VectorXd mass_solve(const SparseMatrix& M, const Eigen::VectorXd& b) {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw SingularMass("mass matrix factorization failed");
  Eigen::VectorXd x = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success || !x.allFinite()) throw SingularMass("mass matrix solve failed");
  return x;
}

}  // namespace

Eigen::VectorXd l2_project(const FeSpace& space, const SparseMatrix& M,
                           const std::function<double(const Point&)>& f, int degree) {
  return mass_solve(M, load_vector(space, f, degree));
}

Eigen::VectorXd l2_project_dirac(const FeSpace& space, const SparseMatrix& M, const Point& x0) {
  const DomainBox& box = space.mesh.box();
  for (int k = 0; k < box.dim; ++k)
    if (!(x0[k] > box.lower[k] && x0[k] < box.upper[k])) throw OutOfDomain("Dirac point must lie inside the domain");
  Location loc = locate_point(space.mesh, x0);
  double phi[20];
  space.element.values(loc.barycentric, phi);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.num_dofs());
  auto ed = space.dofs.element_dofs(loc.element);
  for (std::size_t a = 0; a < ed.size(); ++a) b[ed[a]] += phi[a];
  return mass_solve(M, b);
}

// The stepping matrix is factored after symmetric diagonal scaling S K S;
// graded meshes span many orders of magnitude in element measure.
struct StepSolver::Impl {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::VectorXd scale;
};

StepSolver::StepSolver(const SystemMatrices& m, double mass_factor)
    : impl_(std::make_unique<Impl>()), sys_(&m), c_(mass_factor) {
  Eigen::MatrixXd k = -m.B;
  k += Eigen::MatrixXd(m.A);
  for (int col = 0; col < m.M.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(m.M, col); it; ++it) k(it.row(), it.col()) += c_ * it.value();
  Eigen::VectorXd& sc = impl_->scale;
  sc = k.diagonal().cwiseAbs();
  for (long i = 0; i < sc.size(); ++i) sc[i] = sc[i] > 0.0 ? 1.0 / std::sqrt(sc[i]) : 1.0;
  k = sc.asDiagonal() * k * sc.asDiagonal();
  impl_->lu.compute(k);
  rcond_ = impl_->lu.rcond();
  if (!(rcond_ >= 1e-14))
    throw SingularSystem("stepping matrix is singular (rcond " + std::to_string(rcond_) + ", mass factor " +
                         std::to_string(c_) + ")");
}

StepSolver::~StepSolver() = default;

Eigen::VectorXd StepSolver::solve(const Eigen::VectorXd& rhs) const {
  const Eigen::VectorXd& sc = impl_->scale;
  Eigen::VectorXd z = impl_->lu.solve(sc.cwiseProduct(rhs));
  return sc.cwiseProduct(z);
}

double StepSolver::residual(const Eigen::VectorXd& z, const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd r = c_ * (sys_->M * z) + sys_->A * z - sys_->B * z - rhs;
  const double scale = rhs.cwiseAbs().maxCoeff();
  return scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
}

Eigen::VectorXd step_bdf1(const SystemMatrices& m, const Eigen::VectorXd& a0, double tau, const Eigen::VectorXd* load) {
  StepSolver s(m, 1.0 / tau);
  Eigen::VectorXd rhs = (m.M * a0) / tau;
  if (load) rhs += *load;
  return s.solve(rhs);
}

Eigen::VectorXd step_bdf2(const SystemMatrices& m, const Eigen::VectorXd& a1, const Eigen::VectorXd& a2, double tau,
                          const Eigen::VectorXd* load) {
  StepSolver s(m, 1.5 / tau);
  Eigen::VectorXd rhs = (m.M * (2.0 * a1 - 0.5 * a2)) / tau;
  if (load) rhs += *load;
  return s.solve(rhs);
}

const Eigen::VectorXd& Trajectory::at(double t) const {
  if (states.empty()) return last;
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  return states[best];
}

long snap_to_level(const TimeGrid& grid, double t) {
  long n = std::lround(t / grid.final_time * static_cast<double>(grid.steps));
  return std::clamp<long>(n, 0, grid.steps);
}

Trajectory integrate(const SystemMatrices& m, const Eigen::VectorXd& alpha0, const TimeGrid& grid,
                     const RunOptions& options, RunReport* report) {
  grid.validate();
  const auto start = std::chrono::steady_clock::now();
  const long n_steps = grid.steps;
  const double tau = grid.tau();
  RunReport rep;
  rep.grid = grid;
  rep.tau = tau;
  rep.b0 = options.b0;
  if (options.b0 > 0.0 && tau >= 1.0 / (4.0 * options.b0)) {
    rep.step_warning = true;
    char buf[128];
    std::snprintf(buf, sizeof buf, "time step %g is not below 1/(4 b0) = %g", tau, 0.25 / options.b0);
    rep.warning = buf;
  }

  std::set<long> sampled;
  for (double t : options.sample_times) sampled.insert(snap_to_level(grid, t));
  Trajectory traj;
  auto keep = [&](long n, const Eigen::VectorXd& a) {
    if (!a.allFinite()) throw NonFiniteState(n);
    if (options.record_norms) traj.norms.push_back(m_norm(m.M, a));
    bool store = options.storage == StoragePolicy::All ||
                 (options.storage == StoragePolicy::Sampled && sampled.count(n) > 0) ||
                 (options.storage == StoragePolicy::LastTwo && n >= n_steps - 1);
    if (store) {
      traj.times.push_back(grid.time(n));
      traj.steps.push_back(n);
      traj.states.push_back(a);
    }
  };
  auto load = [&](long n, Eigen::VectorXd& rhs) {
    if (options.load) rhs += options.load(grid.time(n));
  };

  keep(0, alpha0);
  Eigen::VectorXd prev = alpha0, cur;
  {
    StepSolver s1(m, 1.0 / tau);
    rep.rcond_bdf1 = s1.rcond();
    Eigen::VectorXd rhs = (m.M * alpha0) / tau;
    load(1, rhs);
    cur = s1.solve(rhs);
    rep.solve_residual = s1.residual(cur, rhs);
  }
  keep(1, cur);
  if (n_steps >= 2) {
    StepSolver s2(m, 1.5 / tau);
    rep.rcond_bdf2 = s2.rcond();
    for (long n = 2; n <= n_steps; ++n) {
      Eigen::VectorXd rhs = (m.M * (2.0 * cur - 0.5 * prev)) / tau;
      load(n, rhs);
      Eigen::VectorXd next = s2.solve(rhs);
      if (n == 2) rep.solve_residual = std::max(rep.solve_residual, s2.residual(next, rhs));
      prev = std::move(cur);
      cur = std::move(next);
      keep(n, cur);
    }
  }
  traj.last = cur;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report) *report = rep;
  return traj;
}

}  // namespace fragfem
