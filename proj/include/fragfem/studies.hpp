#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fragfem/integrator.hpp"
#include "fragfem/scenario.hpp"

namespace fragfem {

struct MomentRow {
  std::string grid;
  std::string moment;
  double t = 0.0;
  double exact = 0.0;
  double numerical = 0.0;
  double relative_error = 0.0;
};

struct ErrorRow {
  int degree = 1;
  std::string grid;
  double h = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double relative_l2 = 0.0;
  double eoc_l2 = 0.0;  // NaN on the first grid of a degree
  double eoc_h1 = 0.0;
  bool mms = false;
};

struct DriftRow {
  std::string grid;
  double t = 0.0;
  double number = 0.0;
  double mass = 0.0;
  double drift = 0.0;
};

struct StabilityRow {
  std::string grid;
  double b0 = 0.0;
  double tau = 0.0;
  bool applies = false;  // tau < 1 / (4 b0)
  /// max_n ||alpha^n||_M / (e^{2 b0 t_n} ||alpha^0||_M)
  double max_ratio = 0.0;
};

struct TemporalRow {
  double tau = 0.0;
  double l2 = 0.0;      // against the exact solution at T
  double eoc_l2 = 0.0;  // NaN on the first step size
  /// ||alpha_tau - alpha_next||_M between consecutive step sizes at T; NaN on the last.
  double self_diff = 0.0;
  /// ln(d_k / d_{k+1}) / ln(tau_k / tau_{k+1}) from consecutive self-differences.
  double order = 0.0;
};

struct ResidualRow {
  std::string label;
  double max_residual = 0.0;
  double max_dudt = 0.0;
  std::string verdict;
  bool mms = false;
};

struct CheckRow {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct TimingRow {
  std::string label;
  double assemble_seconds = 0.0;
  double run_seconds = 0.0;
};

struct StudyReport {
  std::string mode;
  std::vector<std::pair<std::string, std::string>> echo;
  std::vector<MomentRow> moments;
  std::vector<ErrorRow> errors;
  std::vector<DriftRow> conservation;
  std::vector<StabilityRow> stability;
  std::vector<TemporalRow> temporal;
  std::vector<ResidualRow> residuals;
  std::vector<CheckRow> checks;
  std::vector<TimingRow> timings;
  std::vector<std::string> warnings;

  bool ok() const;
};

/// Result of one discretized run.
struct SingleRun {
  std::string grid;
  int degree = 1;
  double h = 0.0;
  std::shared_ptr<const FeSpace> space;
  Trajectory trajectory;
  RunReport report;
  AssemblyInfo info;
  double assemble_seconds = 0.0;
  bool mms = false;
};

/// One run of grid i at degree r; stores every level's norm and the states
/// at the problem's report times (plus t = 0).
SingleRun run_single(const Scenario& s, std::size_t grid, int degree, bool mms, int workers = 0);

/// Moments, conservation and stability on the first grid and degree.
StudyReport run_single_study(const Scenario& s);
/// Moment tables for every grid (first degree).
StudyReport run_moment_study(const Scenario& s);
/// Errors and EOC per degree over the grid list, at the final time.
StudyReport run_convergence_sweep(const Scenario& s);
/// First grid and degree at every step size in s.taus. The order from
/// self-differences excludes the spatial error floor.
StudyReport run_temporal_study(const Scenario& s);

struct ValidationOptions {
  bool flip_gain_sign = false;  // negative control for the identities
  bool corrupt_gain = false;    // scale the largest |B| entry by 1.01 before the oracle check
  bool include_oracle_p2 = true;
};
/// Invariant checks: quadrature, bases, matrix identities, oracle, determinism, conservation.
StudyReport run_validation_suite(const ValidationOptions& options = {});

/// Dispatches on the scenario mode.
StudyReport run_scenario(const Scenario& s);

/// CSV tables (header row, %.17g, LF) for the non-empty sections; returns the paths written.
std::vector<std::string> write_csv_tables(const StudyReport& r, const std::string& dir);
/// Machine-readable report with a stable key order.
std::string report_json(const StudyReport& r, int indent = 2);
/// Human-readable summary.
void print_report(const StudyReport& r, std::ostream& out);

}  // namespace fragfem
