#include "fragfem/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fragfem/errors.hpp"

namespace fragfem {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Run: return "run";
    case Mode::Moments: return "moments";
    case Mode::Convergence: return "convergence";
    case Mode::Temporal: return "temporal";
    case Mode::Validate: return "validate";
  }
  return "run";
}

std::string to_string(MmsPolicy p) {
  switch (p) {
    case MmsPolicy::Auto: return "auto";
    case MmsPolicy::ForceOn: return "force_on";
    case MmsPolicy::ForceOff: return "force_off";
  }
  return "auto";
}

void RawScenario::set(const std::string& key, RawValue value) {
  if (!values.count(key)) order.push_back(key);
  values[key] = std::move(value);
}

const RawValue* RawScenario::find(const std::string& key) const {
  auto it = values.find(key);
  return it == values.end() ? nullptr : &it->second;
}

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '+';
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Comma separated items with their column offsets inside the value.
std::vector<std::pair<std::string, int>> split_list(const RawValue& v) {
  std::vector<std::pair<std::string, int>> items;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= v.text.size(); ++i) {
    if (i < v.text.size() && v.text[i] == '(') ++depth;
    if (i < v.text.size() && v.text[i] == ')') --depth;
    if (i == v.text.size() || (v.text[i] == ',' && depth == 0)) {
      std::string item = v.text.substr(start, i - start);
      std::size_t lead = 0;
      while (lead < item.size() && std::isspace(static_cast<unsigned char>(item[lead]))) ++lead;
      items.emplace_back(trim(item), v.column + static_cast<int>(start + lead));
      start = i + 1;
    }
  }
  return items;
}

double to_double(const std::string& s, int line, int col) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty() || !std::isfinite(v))
    throw ParseError("expected a number, got '" + s + "'", line, col);
  return v;
}

int to_int(const std::string& s, int line, int col) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) throw ParseError("expected an integer, got '" + s + "'", line, col);
  return v;
}

Expression to_expression(const RawValue& v) {
  try {
    return Expression::parse(v.text);
  } catch (const SyntaxError& e) {
    throw ParseError(e.what(), v.line, v.column + static_cast<int>(e.position()));
  } catch (const UnknownIdentifier& e) {
    const auto pos = v.text.find(e.name());
    throw ParseError(e.what(), v.line, v.column + static_cast<int>(pos == std::string::npos ? 0 : pos));
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem", {"case", "dim", "lower", "upper", "selection", "selection_bound", "kernel", "initial", "exact", "b0"}},
      {"mesh", {"grids", "grading", "degree"}},
      {"time", {"final", "tau", "taus", "report"}},
      {"run", {"name", "mode", "mms", "moments", "workers"}},
      {"quadrature", {"mass", "selection", "gain", "gain_extra", "inner", "method"}},
      {"output", {"dir"}},
  };
  return keys;
}

}  // namespace

RawScenario parse_scenario_text(const std::string& text) {
  RawScenario raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t i = 0;
    auto skip = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    };
    auto col = [&] { return static_cast<int>(i) + 1; };
    skip();
    if (i == line.size() || line[i] == '#') continue;
    if (line[i] == '[') {
      ++i;
      skip();
      const std::size_t a = i;
      while (i < line.size() && ident_char(line[i])) ++i;
      if (i == a) throw ParseError("expected a section name", lineno, col());
      section = lower(line.substr(a, i - a));
      skip();
      if (i >= line.size() || line[i] != ']') throw ParseError("expected ']'", lineno, col());
      ++i;
      skip();
      if (i < line.size() && line[i] != '#') throw ParseError("unexpected text after section header", lineno, col());
      continue;
    }
    const std::size_t a = i;
    while (i < line.size() && ident_char(line[i])) ++i;
    if (i == a) throw ParseError("expected a key", lineno, col());
    const std::string key = line.substr(a, i - a);
    skip();
    if (i >= line.size() || line[i] != '=') throw ParseError("expected '='", lineno, col());
    ++i;
    skip();
    RawValue v;
    v.line = lineno;
    if (i < line.size() && line[i] == '"') {
      const std::size_t close = line.find('"', i + 1);
      if (close == std::string::npos) throw ParseError("unterminated string", lineno, col());
      v.column = col() + 1;
      v.text = line.substr(i + 1, close - i - 1);
      i = close + 1;
      skip();
      if (i < line.size() && line[i] != '#') throw ParseError("unexpected text after string", lineno, col());
    } else {
      v.column = col();
      const std::size_t hash = line.find('#', i);
      v.text = trim(line.substr(i, hash == std::string::npos ? std::string::npos : hash - i));
      if (v.text.empty()) throw ParseError("missing value", lineno, col());
    }
    if (section.empty()) throw ParseError("key outside of a section", lineno, static_cast<int>(a) + 1);
    // moment names keep their case (m10+m01); everything else is case-insensitive
    const std::string full = section + "." + (section == "moments" ? key : lower(key));
    if (raw.find(full)) throw ParseError("duplicate key '" + full + "'", lineno, static_cast<int>(a) + 1);
    raw.set(full, std::move(v));
  }
  return raw;
}

std::array<int, 3> parse_grid_label(const std::string& label, int dim) {
  std::array<int, 3> cells{1, 1, 1};
  std::vector<int> parts;
  std::string cur;
  for (char c : label + "x") {
    if (c == 'x' || c == 'X' || c == '*') {
      int v = 0;
      auto [p, ec] = std::from_chars(cur.data(), cur.data() + cur.size(), v);
      if (ec != std::errc() || p != cur.data() + cur.size() || cur.empty() || v < 1)
        throw Error("malformed grid '" + label + "'");
      parts.push_back(v);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (parts.size() == 1) parts.assign(dim, parts[0]);
  if (static_cast<int>(parts.size()) != dim)
    throw Error("grid '" + label + "' does not have " + std::to_string(dim) + " axes");
  for (int k = 0; k < dim; ++k) cells[k] = parts[k];
  return cells;
}

std::string Scenario::grid_label(std::size_t i) const {
  std::string s;
  for (int k = 0; k < problem.dim; ++k) s += (k ? "x" : "") + std::to_string(grids[i].cells[k]);
  return s;
}

Scenario build_scenario(const RawScenario& raw) {
  for (const auto& key : raw.order) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
    if (section == "moments") continue;
    auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ValidationError(key, "unknown section '" + section + "'");
    if (!it->second.count(name)) throw ValidationError(key, "unknown key");
  }

  Scenario s;
  auto get = [&](const std::string& key) { return raw.find(key); };
  auto fail = [](const std::string& key, const std::string& what) { throw ValidationError(key, what); };
  auto number = [&](const std::string& key) { const RawValue* v = get(key); return to_double(v->text, v->line, v->column); };
  auto integer = [&](const std::string& key) { const RawValue* v = get(key); return to_int(v->text, v->line, v->column); };

  if (auto v = get("run.name")) s.name = v->text;
  if (auto v = get("run.mode")) {
    const std::string m = lower(v->text);
    if (m == "run") s.mode = Mode::Run;
    else if (m == "moments") s.mode = Mode::Moments;
    else if (m == "convergence" || m == "converge") s.mode = Mode::Convergence;
    else if (m == "temporal") s.mode = Mode::Temporal;
    else if (m == "validate") s.mode = Mode::Validate;
    else fail("run.mode", "expected run, moments, convergence, temporal or validate");
  }
  if (auto v = get("run.mms")) {
    const std::string m = lower(v->text);
    if (m == "auto") s.mms = MmsPolicy::Auto;
    else if (m == "force_on" || m == "on") s.mms = MmsPolicy::ForceOn;
    else if (m == "force_off" || m == "off") s.mms = MmsPolicy::ForceOff;
    else fail("run.mms", "expected auto, force_on or force_off");
  }
  if (get("run.workers")) s.quadrature.workers = integer("run.workers");

  // problem: a bundled case supplies every field; explicit keys override it
  TestCase& p = s.problem;
  if (auto v = get("problem.case")) {
    try {
      p = bundled_test_case(v->text);
    } catch (const UnknownCase& e) {
      fail("problem.case", e.what());
    }
    s.case_id = v->text;
  } else {
    p = TestCase{};
    p.id = "custom";
    p.report_times.clear();
    for (const char* key : {"problem.dim", "problem.selection", "problem.kernel", "problem.initial"})
      if (!get(key)) fail(key, "required when no bundled case is named");
  }
  if (get("problem.dim")) {
    const int d = integer("problem.dim");
    if (d != 2 && d != 3) fail("problem.dim", "must be 2 or 3");
    if (s.case_id && d != p.dim) fail("problem.dim", "conflicts with the bundled case");
    p.dim = d;
    p.domain.dim = d;
  }
  const int d = p.dim;
  if (!s.case_id) {
    for (int k = 0; k < 3; ++k) {
      p.domain.lower[k] = k < d ? 1e-9 : 0.0;
      p.domain.upper[k] = k < d ? 2.0 : 0.0;
    }
  }
  for (const char* which : {"lower", "upper"}) {
    const std::string key = std::string("problem.") + which;
    const RawValue* v = get(key);
    if (!v) continue;
    auto items = split_list(*v);
    if (items.size() != 1 && static_cast<int>(items.size()) != d) fail(key, "expects 1 or dim values");
    for (int k = 0; k < d; ++k) {
      const auto& it = items[items.size() == 1 ? 0 : k];
      (which[0] == 'l' ? p.domain.lower : p.domain.upper)[k] = to_double(it.first, v->line, it.second);
    }
  }
  try {
    p.domain.validate();
  } catch (const Error& e) {
    fail("problem.upper", e.what());
  }

  if (auto v = get("problem.selection")) {
    std::optional<double> bound;
    if (get("problem.selection_bound")) bound = number("problem.selection_bound");
    p.selection = SelectionFn{to_expression(*v), bound};
    if (p.selection.expr.depends_on_any({Variable::y1, Variable::y2, Variable::y3, Variable::t}))
      fail("problem.selection", "may only depend on x1..x3");
  } else if (get("problem.selection_bound")) {
    p.selection.bound = number("problem.selection_bound");
  }
  if (auto v = get("problem.kernel")) {
    if (lower(v->text) == "halving")
      p.kernel = FragmentationKernel::halving();
    else {
      p.kernel = FragmentationKernel{KernelKind::SmoothDensity, to_expression(*v)};
      if (p.kernel.density.depends_on(Variable::t)) fail("problem.kernel", "may not depend on t");
    }
  }
  if (auto v = get("problem.initial")) {
    const std::string t = trim(v->text);
    if (lower(t).rfind("dirac", 0) == 0) {
      const auto open = t.find('('), close = t.rfind(')');
      if (open == std::string::npos || close == std::string::npos || close < open)
        throw ParseError("expected dirac(x1, x2[, x3])", v->line, v->column);
      RawValue inner{t.substr(open + 1, close - open - 1), v->line, v->column + static_cast<int>(open) + 1};
      auto items = split_list(inner);
      if (static_cast<int>(items.size()) != d) fail("problem.initial", "dirac point needs dim coordinates");
      p.initial.kind = InitialCondition::Kind::Dirac;
      p.initial.point = {1.0, 1.0, 1.0};
      for (int k = 0; k < d; ++k) p.initial.point[k] = to_double(items[k].first, v->line, items[k].second);
    } else {
      p.initial.kind = InitialCondition::Kind::Field;
      p.initial.field = to_expression(*v);
    }
  }
  if (auto v = get("problem.exact")) {
    p.exact_solution = to_expression(*v);
    if (!get("problem.initial")) {
      p.initial.kind = InitialCondition::Kind::Field;
      p.initial.field = *p.exact_solution;
    }
  }
  if (get("problem.b0")) {
    p.declared_b0 = number("problem.b0");
    if (!(*p.declared_b0 > 0.0)) fail("problem.b0", "must be positive");
  }
  if (p.initial.kind == InitialCondition::Kind::Dirac) {
    Point x = p.initial.point;
    for (int k = d; k < 3; ++k) x[k] = 0.5 * (p.domain.lower[k] + p.domain.upper[k]);
    for (int k = 0; k < d; ++k)
      if (!(x[k] > p.domain.lower[k] && x[k] < p.domain.upper[k]))
        fail("problem.initial", "dirac point must lie strictly inside the domain");
  }

  for (const auto& key : raw.order) {
    if (key.rfind("moments.", 0) != 0) continue;
    const std::string name = key.substr(8);
    MomentSpec m;
    m.name = name;
    try {
      m.orders = parse_moment_name(name, d);
    } catch (const Error& e) {
      fail(key, e.what());
    }
    m.exact = to_expression(*get(key));
    auto it = std::find_if(p.moments.begin(), p.moments.end(), [&](const MomentSpec& x) { return x.name == name; });
    if (it != p.moments.end())
      *it = m;
    else
      p.moments.push_back(m);
  }
  if (auto v = get("run.moments")) {
    for (const auto& [name, col] : split_list(*v)) {
      auto it = std::find_if(p.moments.begin(), p.moments.end(), [&](const MomentSpec& x) { return x.name == name; });
      if (it == p.moments.end()) fail("run.moments", "moment '" + name + "' has no exact formula");
      s.moments.push_back(name);
    }
  }

  // time grid
  if (get("time.final")) {
    p.final_time = number("time.final");
    if (!get("time.report")) {
      // keep the bundled report times that still fit, and always report at T
      std::erase_if(p.report_times, [&](double t) { return t >= p.final_time; });
      p.report_times.push_back(p.final_time);
    }
  }
  if (!(p.final_time > 0.0)) fail("time.final", "must be positive");
  if (get("time.tau")) s.tau = number("time.tau");
  if (!(s.tau > 0.0)) fail("time.tau", "must be positive");
  if (s.tau > p.final_time) fail("time.tau", "exceeds the final time");
  if (auto v = get("time.taus")) {
    for (const auto& [item, col] : split_list(*v)) s.taus.push_back(to_double(item, v->line, col));
    for (double t : s.taus)
      if (!(t > 0.0) || t > p.final_time) fail("time.taus", "step sizes must lie in (0, final]");
    for (std::size_t i = 1; i < s.taus.size(); ++i)
      if (!(s.taus[i] < s.taus[i - 1])) fail("time.taus", "step sizes must be decreasing");
  }
  if (s.mode == Mode::Temporal && s.taus.empty()) s.taus = {4.0 * s.tau, 2.0 * s.tau, s.tau};
  if (s.mode == Mode::Temporal && s.taus.size() < 3) fail("time.taus", "a temporal study needs at least three step sizes");
  if (auto v = get("time.report")) {
    p.report_times.clear();
    for (const auto& [item, col] : split_list(*v)) p.report_times.push_back(to_double(item, v->line, col));
  }
  if (p.report_times.empty()) p.report_times = {p.final_time};
  for (double t : p.report_times)
    if (t < 0.0 || t > p.final_time * (1.0 + 1e-12)) fail("time.report", "report times must lie in [0, final]");
  if (!std::is_sorted(p.report_times.begin(), p.report_times.end()))
    fail("time.report", "report times must be increasing");

  // mesh
  Grading grading = Grading::Geometric;
  if (!s.case_id || s.case_id->rfind("conv", 0) == 0) grading = Grading::Uniform;
  if (auto v = get("mesh.grading")) {
    const std::string g = lower(v->text);
    if (g == "uniform") grading = Grading::Uniform;
    else if (g == "geometric") grading = Grading::Geometric;
    else fail("mesh.grading", "expected uniform or geometric");
  }
  if (grading == Grading::Geometric)
    for (int k = 0; k < d; ++k)
      if (!(p.domain.lower[k] > 0.0)) fail("mesh.grading", "geometric grading needs a positive lower bound");
  if (auto v = get("mesh.grids")) {
    for (const auto& [item, col] : split_list(*v)) {
      GridSpec g;
      try {
        g.cells = parse_grid_label(item, d);
      } catch (const Error& e) {
        throw ParseError(e.what(), v->line, col);
      }
      g.grading = grading;
      s.grids.push_back(g);
    }
  }
  if (s.grids.empty()) {
    if (s.mode != Mode::Validate) fail("mesh.grids", "at least one grid is required");
  }
  for (std::size_t i = 1; i < s.grids.size(); ++i)
    for (int k = 0; k < d; ++k)
      if (s.grids[i].cells[k] <= s.grids[i - 1].cells[k]) fail("mesh.grids", "grids must be strictly refining");
  if (auto v = get("mesh.degree")) {
    s.degrees.clear();
    for (const auto& [item, col] : split_list(*v)) {
      const int r = to_int(item, v->line, col);
      if (r < 1 || r > 3) fail("mesh.degree", "degree must be 1, 2 or 3");
      s.degrees.push_back(r);
    }
  }

  // quadrature overrides
  auto degree_key = [&](const char* key, int& target) {
    if (!get(key)) return;
    target = integer(key);
    if (target < 1 || target > kMaxSimplexDegree) fail(key, "quadrature degree must be in 1..40");
  };
  degree_key("quadrature.mass", s.quadrature.mass_degree);
  degree_key("quadrature.selection", s.quadrature.selection_degree);
  degree_key("quadrature.gain", s.quadrature.gain_degree);
  degree_key("quadrature.inner", s.quadrature.inner_degree);
  if (get("quadrature.gain_extra")) {
    s.quadrature.gain_extra = integer("quadrature.gain_extra");
    if (s.quadrature.gain_extra < 0) fail("quadrature.gain_extra", "must be >= 0");
  }
  if (auto v = get("quadrature.method")) {
    const std::string m = lower(v->text);
    if (m == "auto") s.quadrature.method = GainMethod::Auto;
    else if (m == "exchanged") s.quadrature.method = GainMethod::Exchanged;
    else if (m == "direct") s.quadrature.method = GainMethod::Direct;
    else fail("quadrature.method", "expected auto, exchanged or direct");
  }
  if (auto v = get("output.dir")) s.output_dir = v->text;

  // mode requirements
  if (s.mode == Mode::Convergence && !p.exact_solution) fail("problem.exact", "convergence mode needs an exact solution");
  if (s.mode == Mode::Temporal && !p.exact_solution) fail("problem.exact", "temporal mode needs an exact solution");
  if (s.mms == MmsPolicy::ForceOn && !p.exact_solution) fail("run.mms", "force_on needs an exact solution");
  if (s.mode == Mode::Moments && p.moments.empty()) fail("moments", "moments mode needs at least one exact moment");

  auto join = [](const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
    return out;
  };
  std::vector<std::string> grids, degrees, times, lo, hi;
  for (std::size_t i = 0; i < s.grids.size(); ++i) grids.push_back(s.grid_label(i));
  for (int r : s.degrees) degrees.push_back(std::to_string(r));
  for (double t : p.report_times) times.push_back(format_double(t));
  for (int k = 0; k < d; ++k) {
    lo.push_back(format_double(p.domain.lower[k]));
    hi.push_back(format_double(p.domain.upper[k]));
  }
  auto& e = s.echo;
  e.emplace_back("run.name", s.name);
  e.emplace_back("run.mode", to_string(s.mode));
  e.emplace_back("run.mms", to_string(s.mms));
  e.emplace_back("problem.case", s.case_id.value_or(""));
  e.emplace_back("problem.dim", std::to_string(d));
  e.emplace_back("problem.lower", join(lo));
  e.emplace_back("problem.upper", join(hi));
  e.emplace_back("problem.selection", p.selection.expr.to_string());
  e.emplace_back("problem.kernel", p.kernel.describe());
  if (p.initial.kind == InitialCondition::Kind::Dirac) {
    std::vector<std::string> xs;
    for (int k = 0; k < d; ++k) xs.push_back(format_double(p.initial.point[k]));
    e.emplace_back("problem.initial", "dirac(" + join(xs) + ")");
  } else {
    e.emplace_back("problem.initial", p.initial.field.to_string());
  }
  e.emplace_back("problem.exact", p.exact_solution ? p.exact_solution->to_string() : "");
  for (const auto& m : p.moments) e.emplace_back("moments." + m.name, m.exact.to_string());
  e.emplace_back("mesh.grids", join(grids));
  e.emplace_back("mesh.grading", grading == Grading::Uniform ? "uniform" : "geometric");
  e.emplace_back("mesh.degree", join(degrees));
  e.emplace_back("time.final", format_double(p.final_time));
  e.emplace_back("time.tau", format_double(s.tau));
  if (!s.taus.empty()) {
    std::vector<std::string> ts;
    for (double t : s.taus) ts.push_back(format_double(t));
    e.emplace_back("time.taus", join(ts));
  }
  e.emplace_back("time.report", join(times));
  return s;
}

namespace {

RawScenario with_overrides(RawScenario raw, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ValidationError(o, "override must be section.key=value");
    std::string key = trim(o.substr(0, eq));
    if (key.find('.') == std::string::npos) throw ValidationError(key, "override key needs a section");
    if (key.rfind("moments.", 0) != 0) key = lower(key);
    std::string value = trim(o.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    raw.set(key, RawValue{value, 0, 1});
  }
  return raw;
}

}  // namespace

Scenario parse_scenario_string(const std::string& text, const std::vector<std::string>& overrides) {
  return build_scenario(with_overrides(parse_scenario_text(text), overrides));
}

Scenario parse_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("file", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_string(ss.str(), overrides);
}

}  // namespace fragfem
