#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fragfem/assembly.hpp"
#include "fragfem/model.hpp"

namespace fragfem {

enum class Mode { Run, Moments, Convergence, Temporal, Validate };
enum class MmsPolicy { Auto, ForceOn, ForceOff };

std::string to_string(Mode m);
std::string to_string(MmsPolicy p);

/// A value as written in the file, with its position for error messages.
struct RawValue {
  std::string text;
  int line = 0;
  int column = 0;
};

/// "section.key" -> value, in file order of first appearance.
struct RawScenario {
  std::vector<std::string> order;
  std::map<std::string, RawValue> values;

  void set(const std::string& key, RawValue value);
  const RawValue* find(const std::string& key) const;
};

/// Reads the sectioned key = value format. Throws ParseError.
RawScenario parse_scenario_text(const std::string& text);

struct Scenario {
  std::string name = "scenario";
  Mode mode = Mode::Run;
  std::optional<std::string> case_id;
  TestCase problem;
  std::vector<GridSpec> grids;
  std::vector<int> degrees{1};
  double tau = 0.01;
  /// Step sizes of a temporal study, coarsest first; default {4 tau, 2 tau, tau}.
  std::vector<double> taus;
  MmsPolicy mms = MmsPolicy::Auto;
  AssemblyOptions quadrature;
  /// Moment names to report; empty means all moments the problem defines.
  std::vector<std::string> moments;
  std::string output_dir;
  /// Canonical key = value echo of every setting, after defaults.
  std::vector<std::pair<std::string, std::string>> echo;

  std::string grid_label(std::size_t i) const;
};

/// Validates a raw scenario and fills defaults. Throws ParseError for values
/// that do not parse and ValidationError naming the offending key.
Scenario build_scenario(const RawScenario& raw);

/// Reads and builds a scenario file; each override "section.key=value"
/// replaces or adds a key before validation.
Scenario parse_scenario(const std::string& path, const std::vector<std::string>& overrides = {});
Scenario parse_scenario_string(const std::string& text, const std::vector<std::string>& overrides = {});

/// "20x20", "5x5x5" or a bare "15" (same count on every axis).
std::array<int, 3> parse_grid_label(const std::string& label, int dim);

}  // namespace fragfem
