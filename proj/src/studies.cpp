#include "fragfem/studies.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fragfem/diagnostics.hpp"
#include "fragfem/errors.hpp"
#include "fragfem/oracle.hpp"
#include "fragfem/threading.hpp"

namespace fragfem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::VectorXd initial_state(const Scenario& s, const FeSpace& space, const SparseMatrix& M) {
  const InitialCondition& ic = s.problem.initial;
  if (ic.kind == InitialCondition::Kind::Dirac) {
    Point x = ic.point;
    for (int k = space.dim(); k < 3; ++k) x[k] = 0.0;
    return l2_project_dirac(space, M, x);
  }
  const Expression f = ic.field;
  return l2_project(space, M, [&](const Point& x) { return f(point_variables(x, 0.0)); });
}

double problem_b0(const TestCase& p) {
  return p.declared_b0 ? *p.declared_b0 : estimate_b0(p.kernel, p.selection, p.domain);
}

std::vector<const MomentSpec*> selected_moments(const Scenario& s) {
  std::vector<const MomentSpec*> out;
  for (const auto& m : s.problem.moments)
    if (s.moments.empty() || std::find(s.moments.begin(), s.moments.end(), m.name) != s.moments.end())
      out.push_back(&m);
  return out;
}

// Order-one moment orders of every axis (total mass).
std::vector<Index3> mass_orders(int dim) {
  std::vector<Index3> o;
  for (int k = 0; k < dim; ++k) {
    Index3 q{0, 0, 0};
    q[k] = 1;
    o.push_back(q);
  }
  return o;
}

void append_moments(StudyReport& rep, const Scenario& s, const SingleRun& run, const FeSpace& space) {
  for (const MomentSpec* m : selected_moments(s)) {
    const MomentWeights w = moment_weights(space, m->orders);
    for (double t : s.problem.report_times) {
      MomentRow row;
      row.grid = run.grid;
      row.moment = m->name;
      row.t = t;
      row.exact = m->exact(point_variables(Point{0.0, 0.0, 0.0}, t));
      row.numerical = moment(run.trajectory.at(t), w);
      row.relative_error = relative_error(row.exact, row.numerical);
      rep.moments.push_back(row);
    }
  }
}

void append_conservation(StudyReport& rep, const Scenario& s, const SingleRun& run, const FeSpace& space) {
  const MomentWeights number = moment_weights(space, {Index3{0, 0, 0}});
  const MomentWeights mass = moment_weights(space, mass_orders(s.problem.dim));
  for (const auto& c : conservation_series(run.trajectory, number, mass))
    rep.conservation.push_back({run.grid, c.t, c.number, c.mass, c.drift});
}

void append_stability(StudyReport& rep, const Scenario& s, const SingleRun& run) {
  StabilityRow row;
  row.grid = run.grid;
  row.b0 = problem_b0(s.problem);
  row.tau = run.report.tau;
  row.applies = row.tau < 1.0 / (4.0 * row.b0);
  const auto& norms = run.trajectory.norms;
  const double n0 = norms.empty() ? 0.0 : norms[0];
  for (std::size_t n = 0; n < norms.size() && n0 > 0.0; ++n) {
    const double bound = std::exp(2.0 * row.b0 * run.report.grid.time(static_cast<long>(n))) * n0;
    row.max_ratio = std::max(row.max_ratio, norms[n] / bound);
  }
  rep.stability.push_back(row);
  if (run.report.step_warning) rep.warnings.push_back(run.grid + ": " + run.report.warning);
}

StudyReport base_report(const Scenario& s) {
  StudyReport r;
  r.mode = to_string(s.mode);
  r.echo = s.echo;
  return r;
}

// Entries run concurrently when they are small; big dense systems run one at
// a time with parallel assembly instead.
template <class Fn>
void for_each_entry(std::size_t n, bool small, Fn&& fn) {
  const int workers = default_worker_count();
  if (small && workers > 1 && n > 1) {
    parallel_ranges(static_cast<long>(n), workers, [&](long lo, long hi) {
      for (long i = lo; i < hi; ++i) fn(static_cast<std::size_t>(i), 1);
    });
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
  }
}

long estimated_dofs(const Scenario& s, std::size_t grid, int degree) {
  long n = 1;
  for (int k = 0; k < s.problem.dim; ++k) n *= static_cast<long>(s.grids[grid].cells[k]) * degree + 1;
  return n;
}

}  // namespace

bool StudyReport::ok() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

SingleRun run_single(const Scenario& s, std::size_t grid, int degree, bool mms, int workers) {
  const TestCase& p = s.problem;
  SingleRun out;
  out.grid = s.grid_label(grid);
  out.degree = degree;
  out.mms = mms;
  const auto t0 = Clock::now();
  out.space = std::make_shared<const FeSpace>(Mesh(p.domain, s.grids[grid]), degree);
  const FeSpace& space = *out.space;
  out.h = space.mesh.h();
  AssemblyOptions opts = s.quadrature;
  if (workers > 0) opts.workers = workers;
  const SystemMatrices sys = assemble_system(space, p.selection, p.kernel, opts);
  out.info = sys.info;

  RunOptions ro;
  ro.storage = StoragePolicy::Sampled;
  ro.sample_times = p.report_times;
  ro.sample_times.insert(ro.sample_times.begin(), 0.0);
  ro.b0 = problem_b0(p);
  std::unique_ptr<MmsSource> source;
  if (mms) {
    source = std::make_unique<MmsSource>(space, *p.exact_solution, p.kernel, p.selection, opts);
    ro.load = [&](double t) { return source->load(t); };
  }
  const Eigen::VectorXd a0 = initial_state(s, space, sys.M);
  out.assemble_seconds = seconds_since(t0);
  out.trajectory = integrate(sys, a0, TimeGrid::from_step(p.final_time, s.tau), ro, &out.report);
  return out;
}

StudyReport run_single_study(const Scenario& s) {
  StudyReport rep = base_report(s);
  bool mms = s.mms == MmsPolicy::ForceOn;
  if (s.mms == MmsPolicy::Auto && s.problem.exact_solution) {
    const ResidualReport rr = residual_check(*s.problem.exact_solution, s.problem.kernel, s.problem.selection,
                                             s.problem.domain, s.problem.final_time);
    mms = rr.needs_mms;
    rep.residuals.push_back({"exact", rr.max_residual, rr.max_dudt, rr.verdict(), mms});
  }
  const SingleRun run = run_single(s, 0, s.degrees.front(), mms);
  const FeSpace& space = *run.space;
  append_moments(rep, s, run, space);
  append_conservation(rep, s, run, space);
  append_stability(rep, s, run);
  if (s.problem.exact_solution) {
    ErrorRow row;
    row.degree = run.degree;
    row.grid = run.grid;
    row.h = run.h;
    const ErrorNorms e = l2_h1_errors(space, run.trajectory.last, *s.problem.exact_solution, s.problem.final_time);
    row.l2 = e.l2;
    row.h1 = e.h1;
    row.relative_l2 = e.relative_l2;
    row.eoc_l2 = row.eoc_h1 = kNaN;
    row.mms = mms;
    rep.errors.push_back(row);
  }
  rep.timings.push_back({run.grid, run.assemble_seconds, run.report.seconds});
  return rep;
}

StudyReport run_moment_study(const Scenario& s) {
  StudyReport rep = base_report(s);
  const int r = s.degrees.front();
  std::vector<StudyReport> parts(s.grids.size());
  bool small = true;
  for (std::size_t g = 0; g < s.grids.size(); ++g) small = small && estimated_dofs(s, g, r) <= 2000;
  for_each_entry(s.grids.size(), small, [&](std::size_t g, int workers) {
    const SingleRun run = run_single(s, g, r, false, workers);
    const FeSpace& space = *run.space;
    StudyReport& part = parts[g];
    append_moments(part, s, run, space);
    append_conservation(part, s, run, space);
    append_stability(part, s, run);
    part.timings.push_back({run.grid, run.assemble_seconds, run.report.seconds});
  });
  for (auto& part : parts) {
    rep.moments.insert(rep.moments.end(), part.moments.begin(), part.moments.end());
    rep.conservation.insert(rep.conservation.end(), part.conservation.begin(), part.conservation.end());
    rep.stability.insert(rep.stability.end(), part.stability.begin(), part.stability.end());
    rep.timings.insert(rep.timings.end(), part.timings.begin(), part.timings.end());
    rep.warnings.insert(rep.warnings.end(), part.warnings.begin(), part.warnings.end());
  }
  return rep;
}

StudyReport run_convergence_sweep(const Scenario& s) {
  StudyReport rep = base_report(s);
  const TestCase& p = s.problem;
  bool mms = s.mms == MmsPolicy::ForceOn;
  if (s.mms == MmsPolicy::Auto) {
    const ResidualReport rr = residual_check(*p.exact_solution, p.kernel, p.selection, p.domain, p.final_time);
    mms = rr.needs_mms;
    rep.residuals.push_back({"exact", rr.max_residual, rr.max_dudt, rr.verdict(), mms});
  }

  struct Entry {
    int degree;
    std::size_t grid;
  };
  std::vector<Entry> entries;
  bool small = true;
  for (int r : s.degrees)
    for (std::size_t g = 0; g < s.grids.size(); ++g) {
      entries.push_back({r, g});
      small = small && estimated_dofs(s, g, r) <= 2000;
    }
  std::vector<ErrorRow> rows(entries.size());
  std::vector<TimingRow> timings(entries.size());
  for_each_entry(entries.size(), small, [&](std::size_t i, int workers) {
    const SingleRun run = run_single(s, entries[i].grid, entries[i].degree, mms, workers);
    const FeSpace& space = *run.space;
    const ErrorNorms e = l2_h1_errors(space, run.trajectory.last, *p.exact_solution, p.final_time);
    ErrorRow& row = rows[i];
    row.degree = run.degree;
    row.grid = run.grid;
    row.h = run.h;
    row.l2 = e.l2;
    row.h1 = e.h1;
    row.relative_l2 = e.relative_l2;
    row.eoc_l2 = row.eoc_h1 = kNaN;
    row.mms = mms;
    timings[i] = {"P" + std::to_string(run.degree) + " " + run.grid, run.assemble_seconds, run.report.seconds};
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].degree != rows[i - 1].degree) continue;
    const double lh = std::log(rows[i - 1].h / rows[i].h);
    rows[i].eoc_l2 = rows[i].l2 > 0.0 ? std::log(rows[i - 1].l2 / rows[i].l2) / lh : kNaN;
    rows[i].eoc_h1 = rows[i].h1 > 0.0 ? std::log(rows[i - 1].h1 / rows[i].h1) / lh : kNaN;
  }
  rep.errors = rows;
  rep.timings = timings;
  return rep;
}

StudyReport run_temporal_study(const Scenario& s) {
  StudyReport rep = base_report(s);
  const TestCase& p = s.problem;
  bool mms = s.mms == MmsPolicy::ForceOn;
  if (s.mms == MmsPolicy::Auto) {
    const ResidualReport rr = residual_check(*p.exact_solution, p.kernel, p.selection, p.domain, p.final_time);
    mms = rr.needs_mms;
    rep.residuals.push_back({"exact", rr.max_residual, rr.max_dudt, rr.verdict(), mms});
  }
  std::vector<Eigen::VectorXd> finals;
  std::shared_ptr<const FeSpace> space;
  for (double tau : s.taus) {
    Scenario si = s;
    si.tau = tau;
    const SingleRun run = run_single(si, 0, s.degrees.front(), mms);
    space = run.space;
    TemporalRow row;
    row.tau = run.report.tau;
    row.l2 = l2_h1_errors(*space, run.trajectory.last, *p.exact_solution, p.final_time).l2;
    row.eoc_l2 = row.self_diff = row.order = kNaN;
    rep.temporal.push_back(row);
    finals.push_back(run.trajectory.last);
    char label[64];
    std::snprintf(label, sizeof label, "tau %g %s", row.tau, run.grid.c_str());
    rep.timings.push_back({label, run.assemble_seconds, run.report.seconds});
  }
  const SparseMatrix M = assemble_mass(*space);
  auto& rows = rep.temporal;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) rows[k].self_diff = m_norm(M, finals[k] - finals[k + 1]);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double lt = std::log(rows[k - 1].tau / rows[k].tau);
    rows[k].eoc_l2 = std::log(rows[k - 1].l2 / rows[k].l2) / lt;
    if (k + 1 < rows.size()) rows[k].order = std::log(rows[k - 1].self_diff / rows[k].self_diff) / lt;
  }
  return rep;
}

namespace {

void add_check(StudyReport& rep, std::string name, double value, double threshold, std::string detail = {}) {
  rep.checks.push_back({std::move(name), std::isfinite(value) && value <= threshold, value, threshold, std::move(detail)});
}

DomainBox box2(double lo) {
  DomainBox b;
  b.dim = 2;
  b.lower = {lo, lo, 0.0};
  b.upper = {2.0, 2.0, 0.0};
  return b;
}

Eigen::VectorXd interpolate(const FeSpace& space, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(space.num_dofs());
  for (int i = 0; i < space.num_dofs(); ++i) v[i] = f(space.dofs.coordinates[i]);
  return v;
}

double monomial_exact(int dim, const Index3& q) {
  // int over the unit simplex of prod xi_k^{q_k} = prod q_k! / (dim + sum q)!
  double num = 1.0;
  int total = dim;
  for (int k = 0; k < dim; ++k) {
    num *= std::tgamma(q[k] + 1.0);
    total += q[k];
  }
  return num / std::tgamma(total + 1.0);
}

}  // namespace

StudyReport run_validation_suite(const ValidationOptions& options) {
  StudyReport rep;
  rep.mode = "validate";
  const auto t0 = Clock::now();

  // quadrature exactness on the unit simplex
  for (int dim : {2, 3}) {
    double worst = 0.0;
    for (int deg = 1; deg <= 12; ++deg) {
      const QuadratureRule rule = simplex_quadrature(dim, deg);
      for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b)
          for (int c = 0; a + b + c <= deg && (dim == 3 || c == 0); ++c) {
            double sum = 0.0;
            for (std::size_t p = 0; p < rule.size(); ++p)
              sum += rule.weights[p] * std::pow(rule.points[p][0], a) * std::pow(rule.points[p][1], b) *
                     (dim == 3 ? std::pow(rule.points[p][2], c) : 1.0);
            const double ex = monomial_exact(dim, Index3{a, b, c});
            worst = std::max(worst, std::abs(sum - ex) / ex);
          }
    }
    add_check(rep, "quadrature exactness " + std::to_string(dim) + "d (degree <= 12)", worst, 1e-13);
  }

  // Lagrange bases: Kronecker property and partition of unity
  for (int dim : {2, 3})
    for (int r = 1; r <= 3; ++r) {
      const ReferenceElement el(dim, r);
      double worst = 0.0;
      const auto nodes = el.node_coordinates();
      for (int a = 0; a < el.num_nodes(); ++a) {
        const auto v = el.values_at(nodes[a]);
        for (int b = 0; b < el.num_nodes(); ++b) worst = std::max(worst, std::abs(v[b] - (a == b ? 1.0 : 0.0)));
      }
      const auto v = el.values_at(Point{0.21, 0.17, dim == 3 ? 0.3 : 0.0});
      double sum = 0.0;
      for (double x : v) sum += x;
      worst = std::max(worst, std::abs(sum - 1.0));
      add_check(rep, "lagrange P" + std::to_string(r) + " " + std::to_string(dim) + "d kronecker/unity", worst, 1e-13);
    }

  AssemblyOptions aopt;
  aopt.flip_gain_sign = options.flip_gain_sign;

  // mass matrix SPD and the constant-selection identity
  {
    const FeSpace sp(Mesh(box2(1e-9), GridSpec{{4, 4, 1}, Grading::Geometric}), 2);
    const SparseMatrix M = assemble_mass(sp);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(M)};
    const double asym = (Eigen::MatrixXd(M) - Eigen::MatrixXd(M).transpose()).cwiseAbs().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    add_check(rep, "mass matrix symmetric (4x4 P2 geometric)", asym, 0.0);
    add_check(rep, "mass matrix positive definite (4x4 P2 geometric)", lmin > 0.0 ? 0.0 : 1.0, 0.0,
              "min eigenvalue " + fmt(lmin));
    const SparseMatrix A = assemble_selection(sp, SelectionFn::parse("1"));
    const double diff = Eigen::MatrixXd(A - M).cwiseAbs().maxCoeff() / Eigen::MatrixXd(M).cwiseAbs().maxCoeff();
    add_check(rep, "constant selection gives A = M", diff, 1e-12);
  }

  // halving kernel mass identity on a box whose daughters stay inside
  for (int dim : {2, 3}) {
    DomainBox b;
    b.dim = dim;
    b.lower = {0.0, 0.0, 0.0};
    b.upper = {2.0, 2.0, dim == 3 ? 2.0 : 0.0};
    const int n = dim == 2 ? 8 : 4;
    const FeSpace sp(Mesh(b, GridSpec{{n, n, dim == 3 ? n : 1}, Grading::Uniform}), 1);
    const SelectionFn gamma = SelectionFn::parse(dim == 2 ? "x1+x2" : "1");
    const Eigen::MatrixXd B = assemble_gain_delta(sp, gamma, aopt);
    const SparseMatrix A = assemble_selection(sp, gamma);
    const Eigen::VectorXd m = interpolate(sp, [&](const Point& x) { return x[0] + x[1] + x[2]; });
    const Eigen::RowVectorXd mB = m.transpose() * B, mA = m.transpose() * A;
    const double rel = (mB - mA).cwiseAbs().maxCoeff() / mA.cwiseAbs().maxCoeff();
    add_check(rep, "halving kernel conserves mass (" + std::to_string(dim) + "d P1)", rel, 1e-10);
  }

  // binary uniform kernel: number doubles, mass is conserved
  {
    const FeSpace sp(Mesh(box2(1e-9), GridSpec{{8, 8, 1}, Grading::Uniform}), 1);
    const FragmentationKernel beta = FragmentationKernel::smooth("2/(y1*y2)");
    const SelectionFn gamma = SelectionFn::parse("x1+x2");
    AssemblyOptions o = aopt;
    o.workers = 1;
    const Eigen::MatrixXd B = assemble_gain_smooth(sp, beta, gamma, o);
    const SparseMatrix A = assemble_selection(sp, gamma);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(sp.num_dofs());
    const Eigen::VectorXd m = interpolate(sp, [&](const Point& x) { return x[0] + x[1]; });
    const Eigen::RowVectorXd nB = one.transpose() * B, nA = one.transpose() * A;
    add_check(rep, "binary kernel doubles number", (nB - 2.0 * nA).cwiseAbs().maxCoeff() / nA.cwiseAbs().maxCoeff(),
              1e-6);
    const Eigen::RowVectorXd mB = m.transpose() * B, mA = m.transpose() * A;
    add_check(rep, "binary kernel conserves mass", (mB - mA).cwiseAbs().maxCoeff() / mA.cwiseAbs().maxCoeff(), 1e-6);

    o.workers = 3;
    const Eigen::MatrixXd B3 = assemble_gain_smooth(sp, beta, gamma, o);
    add_check(rep, "gain assembly identical across worker counts", (B3 - B).cwiseAbs().maxCoeff(), 0.0);
  }

  // independent evaluation of B alpha
  const FragmentationKernel beta1 = FragmentationKernel::smooth("2/(y1*y2)");
  const SelectionFn gamma1 = SelectionFn::parse("1");
  for (int r = 1; r <= (options.include_oracle_p2 ? 2 : 1); ++r) {
    const FeSpace sp(Mesh(box2(1e-9), GridSpec{{4, 4, 1}, Grading::Uniform}), r);
    Eigen::MatrixXd B = assemble_gain_smooth(sp, beta1, gamma1);
    if (options.corrupt_gain) {
      Eigen::Index i = 0, j = 0;
      B.cwiseAbs().maxCoeff(&i, &j);
      B(i, j) *= 1.01;
    }
    const Eigen::VectorXd alpha = Eigen::VectorXd::Ones(sp.num_dofs());
    const GainCheck chk = gain_matrix_check(B, alpha, sp, beta1, gamma1);
    add_check(rep, "gain matrix matches oracle (4x4 P" + std::to_string(r) + ")", chk.mismatch, 1e-6);
  }
  {
    const double g = brute_force_gain([](const Point&) { return 1.0; }, beta1, gamma1, box2(0.0), Point{1.0, 1.0, 0.0});
    const double ln2 = std::log(2.0);
    add_check(rep, "gain of u = 1 at (1,1) equals 2 ln(2)^2", std::abs(g - 2.0 * ln2 * ln2), 1e-8);
  }

  // projected Dirac data and a short run of a mass-conserving kernel; on a
  // uniform mesh the gain rule integrates the mass identity exactly
  {
    Scenario s = parse_scenario_string(
        "[problem]\ncase = 2\n[mesh]\ngrids = 8x8\ngrading = uniform\n[time]\nfinal = 0.2\ntau = 0.01\nreport = 0.1, 0.2\n");
    s.quadrature.flip_gain_sign = options.flip_gain_sign;
    const SingleRun run = run_single(s, 0, 1, false);
    const FeSpace& sp = *run.space;
    const MomentWeights number = moment_weights(sp, {Index3{0, 0, 0}});
    const MomentWeights mass = moment_weights(sp, mass_orders(2));
    add_check(rep, "projected dirac has unit number", std::abs(moment(run.trajectory.states.front(), number) - 1.0),
              1e-10);
    double drift = 0.0;
    for (const auto& c : conservation_series(run.trajectory, number, mass)) drift = std::max(drift, std::abs(c.drift));
    add_check(rep, "mass drift over a short run (8x8 uniform P1)", drift, 1e-8);
  }
  rep.timings.push_back({"validation suite", 0.0, seconds_since(t0)});
  return rep;
}

StudyReport run_scenario(const Scenario& s) {
  switch (s.mode) {
    case Mode::Run: return run_single_study(s);
    case Mode::Moments: return run_moment_study(s);
    case Mode::Convergence: return run_convergence_sweep(s);
    case Mode::Temporal: return run_temporal_study(s);
    case Mode::Validate: return run_validation_suite();
  }
  return run_single_study(s);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content, std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  written.push_back(path.string());
}

}  // namespace

std::vector<std::string> write_csv_tables(const StudyReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  std::ostringstream os;
  if (!r.moments.empty()) {
    os << "grid,moment,t,exact,numerical,relative_error\n";
    for (const auto& m : r.moments)
      os << m.grid << ',' << m.moment << ',' << fmt(m.t) << ',' << fmt(m.exact) << ',' << fmt(m.numerical) << ','
         << fmt(m.relative_error) << '\n';
    write_file(fs::path(dir) / "moments.csv", os.str(), written);
  }
  if (!r.errors.empty()) {
    os.str("");
    os << "degree,grid,h,l2,eoc_l2,h1,eoc_h1,relative_l2,mms\n";
    for (const auto& e : r.errors)
      os << e.degree << ',' << e.grid << ',' << fmt(e.h) << ',' << fmt(e.l2) << ',' << fmt(e.eoc_l2) << ','
         << fmt(e.h1) << ',' << fmt(e.eoc_h1) << ',' << fmt(e.relative_l2) << ',' << (e.mms ? 1 : 0) << '\n';
    write_file(fs::path(dir) / "errors.csv", os.str(), written);
  }
  if (!r.conservation.empty()) {
    os.str("");
    os << "grid,t,number,mass,drift\n";
    for (const auto& c : r.conservation)
      os << c.grid << ',' << fmt(c.t) << ',' << fmt(c.number) << ',' << fmt(c.mass) << ',' << fmt(c.drift) << '\n';
    write_file(fs::path(dir) / "conservation.csv", os.str(), written);
  }
  if (!r.stability.empty()) {
    os.str("");
    os << "grid,b0,tau,applies,max_ratio\n";
    for (const auto& s : r.stability)
      os << s.grid << ',' << fmt(s.b0) << ',' << fmt(s.tau) << ',' << (s.applies ? 1 : 0) << ',' << fmt(s.max_ratio)
         << '\n';
    write_file(fs::path(dir) / "stability.csv", os.str(), written);
  }
  if (!r.temporal.empty()) {
    os.str("");
    os << "tau,l2,eoc_l2,self_diff,order\n";
    for (const auto& t : r.temporal)
      os << fmt(t.tau) << ',' << fmt(t.l2) << ',' << fmt(t.eoc_l2) << ',' << fmt(t.self_diff) << ',' << fmt(t.order)
         << '\n';
    write_file(fs::path(dir) / "temporal.csv", os.str(), written);
  }
  if (!r.checks.empty()) {
    os.str("");
    os << "check,pass,value,threshold\n";
    for (const auto& c : r.checks)
      os << '"' << c.name << "\"," << (c.pass ? 1 : 0) << ',' << fmt(c.value) << ',' << fmt(c.threshold) << '\n';
    write_file(fs::path(dir) / "checks.csv", os.str(), written);
  }
  write_file(fs::path(dir) / "report.json", report_json(r) + "\n", written);
  return written;
}

std::string report_json(const StudyReport& r, int indent) {
  using json = nlohmann::ordered_json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["mode"] = r.mode;
  j["ok"] = r.ok();
  json echo = json::object();
  for (const auto& [k, v] : r.echo) echo[k] = v;
  j["scenario"] = echo;
  json moments = json::array();
  for (const auto& m : r.moments)
    moments.push_back({{"grid", m.grid}, {"moment", m.moment}, {"t", num(m.t)}, {"exact", num(m.exact)},
                       {"numerical", num(m.numerical)}, {"relative_error", num(m.relative_error)}});
  j["moments"] = moments;
  json errors = json::array();
  for (const auto& e : r.errors)
    errors.push_back({{"degree", e.degree}, {"grid", e.grid}, {"h", num(e.h)}, {"l2", num(e.l2)},
                      {"eoc_l2", num(e.eoc_l2)}, {"h1", num(e.h1)}, {"eoc_h1", num(e.eoc_h1)},
                      {"relative_l2", num(e.relative_l2)}, {"mms", e.mms}});
  j["errors"] = errors;
  json cons = json::array();
  for (const auto& c : r.conservation)
    cons.push_back({{"grid", c.grid}, {"t", num(c.t)}, {"number", num(c.number)}, {"mass", num(c.mass)},
                    {"drift", num(c.drift)}});
  j["conservation"] = cons;
  json stab = json::array();
  for (const auto& s : r.stability)
    stab.push_back({{"grid", s.grid}, {"b0", num(s.b0)}, {"tau", num(s.tau)}, {"applies", s.applies},
                    {"max_ratio", num(s.max_ratio)}});
  j["stability"] = stab;
  json temporal = json::array();
  for (const auto& t : r.temporal)
    temporal.push_back({{"tau", num(t.tau)}, {"l2", num(t.l2)}, {"eoc_l2", num(t.eoc_l2)},
                        {"self_diff", num(t.self_diff)}, {"order", num(t.order)}});
  j["temporal"] = temporal;
  json res = json::array();
  for (const auto& x : r.residuals)
    res.push_back({{"label", x.label}, {"max_residual", num(x.max_residual)}, {"max_dudt", num(x.max_dudt)},
                   {"verdict", x.verdict}, {"mms", x.mms}});
  j["residuals"] = res;
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", num(c.value)}, {"threshold", num(c.threshold)},
                      {"detail", c.detail}});
  j["checks"] = checks;
  j["warnings"] = r.warnings;
  json timing = json::array();
  for (const auto& t : r.timings)
    timing.push_back({{"label", t.label}, {"assemble_seconds", t.assemble_seconds}, {"run_seconds", t.run_seconds}});
  j["timing"] = timing;
  return j.dump(indent);
}

void print_report(const StudyReport& r, std::ostream& out) {
  auto sci = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  if (!r.moments.empty()) {
    out << "grid        moment      t          exact            numerical        rel.err\n";
    for (const auto& m : r.moments)
      out << std::left << std::setw(12) << m.grid << std::setw(12) << m.moment << std::setw(11) << m.t
          << std::setw(17) << sci(m.exact) << std::setw(17) << sci(m.numerical) << sci(m.relative_error) << '\n';
  }
  if (!r.errors.empty()) {
    out << "P  grid        h            L2             EOC      H1             EOC      mms\n";
    for (const auto& e : r.errors) {
      char line[200];
      std::snprintf(line, sizeof line, "%-2d %-11s %-12.6g %-14.6e %-8s %-14.6e %-8s %s\n", e.degree, e.grid.c_str(),
                    e.h, e.l2, std::isnan(e.eoc_l2) ? "--" : fmt(std::round(e.eoc_l2 * 1e4) / 1e4).c_str(), e.h1,
                    std::isnan(e.eoc_h1) ? "--" : fmt(std::round(e.eoc_h1 * 1e4) / 1e4).c_str(), e.mms ? "on" : "off");
      out << line;
    }
  }
  if (!r.temporal.empty()) {
    out << "tau          L2 at T        EOC      ||a_tau - a_next||_M  order\n";
    for (const auto& t : r.temporal) {
      auto opt = [](double v) { return std::isnan(v) ? std::string("--") : fmt(std::round(v * 1e4) / 1e4); };
      char line[200];
      std::snprintf(line, sizeof line, "%-12.6g %-14.6e %-8s %-21s %s\n", t.tau, t.l2, opt(t.eoc_l2).c_str(),
                    std::isnan(t.self_diff) ? "--" : sci(t.self_diff).c_str(), opt(t.order).c_str());
      out << line;
    }
  }
  for (const auto& s : r.stability)
    out << "stability " << s.grid << ": b0 " << s.b0 << ", tau " << s.tau << (s.applies ? "" : " (bound not applicable)")
        << ", max ||a^n||/(e^{2 b0 t}||a^0||) = " << s.max_ratio << '\n';
  for (const auto& x : r.residuals)
    out << "residual check: max " << sci(x.max_residual) << " vs max |u_t| " << sci(x.max_dudt) << " -> " << x.verdict
        << (x.mms ? " (manufactured source on)" : "") << '\n';
  for (const auto& c : r.checks)
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << sci(c.value) << " (limit " << sci(c.threshold) << ")"
        << (c.detail.empty() ? "" : " " + c.detail) << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
}

}  // namespace fragfem
