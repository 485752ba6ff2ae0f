#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fragfem/studies.hpp"

using namespace fragfem;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = "[problem]\ncase = 2\n[mesh]\ngrids = 4x4, 6x6\n[time]\nfinal = 0.5\ntau = 0.05\n[run]\nmode = moments\n";

}  // namespace

TEST_CASE("moment study rows") {
  const StudyReport r = run_scenario(parse_scenario_string(kSmall));
  // two grids, two moments, report times {0.5}
  CHECK(r.moments.size() == 4);
  CHECK(r.stability.size() == 2);
  for (const auto& m : r.moments) CHECK(std::isfinite(m.relative_error));
  CHECK(r.ok());
}

TEST_CASE("CSV output is deterministic") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "fragfem_unit_csv";
  fs::remove_all(base);
  const Scenario s = parse_scenario_string(kSmall);
  write_csv_tables(run_scenario(s), (base / "a").string());
  write_csv_tables(run_scenario(s), (base / "b").string());
  for (const char* f : {"moments.csv", "conservation.csv", "stability.csv"}) {
    CAPTURE(f);
    const std::string a = slurp(base / "a" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(base / "b" / f));
  }
  const auto j = nlohmann::json::parse(slurp(base / "a" / "report.json"));
  CHECK(j["mode"] == "moments");
  CHECK(j["moments"].size() == 4);
  CHECK(j["scenario"]["problem.case"] == "2");
  fs::remove_all(base);
}

TEST_CASE("convergence rows carry orders") {
  const Scenario s = parse_scenario_string(
      "[run]\nmode = convergence\nmms = force_on\n[problem]\ncase = conv1\n[mesh]\ngrids = 2x2, 4x4, 8x8\n"
      "degree = 1\n[time]\nfinal = 0.01\ntau = 0.001\n");
  const StudyReport r = run_scenario(s);
  REQUIRE(r.errors.size() == 3);
  CHECK(std::isnan(r.errors[0].eoc_l2));
  CHECK(r.errors[2].eoc_l2 > 1.7);
  CHECK(r.errors[2].mms);
  CHECK(report_json(r).find("\"eoc_l2\": null") != std::string::npos);
}

TEST_CASE("coarse-grid errors of the smooth case match reference values") {
  const char* src = "[run]\nmode = convergence\n[problem]\ncase = conv1\n[mesh]\ngrids = {G}\ndegree = {R}\n"
                    "[time]\nfinal = 0.01\ntau = 2.5e-5\n";
  auto run = [&](const char* g, const char* r) {
    std::string text = src;
    text.replace(text.find("{G}"), 3, g);
    text.replace(text.find("{R}"), 3, r);
    return run_scenario(parse_scenario_string(text)).errors.front();
  };
  const ErrorRow p1 = run("4x4", "1");
  CHECK(p1.h == doctest::Approx(0.707107).epsilon(1e-6));
  CHECK(p1.h1 == doctest::Approx(0.222819).epsilon(0.05));
  const ErrorRow p2 = run("8x8", "2");
  CHECK(p2.l2 == doctest::Approx(1.65226e-4).epsilon(0.05));
}

TEST_CASE("temporal study") {
  const Scenario s = parse_scenario_string(
      "[run]\nmode = temporal\nmms = force_on\n[problem]\ncase = conv1\n[mesh]\ngrids = 4x4\ndegree = 2\n"
      "[time]\nfinal = 0.5\ntaus = 0.1, 0.05, 0.025\n");
  const StudyReport r = run_scenario(s);
  REQUIRE(r.temporal.size() == 3);
  CHECK(std::isnan(r.temporal[2].self_diff));
  CHECK(r.temporal[1].order > 1.7);
}

TEST_CASE("quick validation suite passes and negative controls fail") {
  ValidationOptions o;
  o.include_oracle_p2 = false;
  const StudyReport good = run_validation_suite(o);
  for (const auto& c : good.checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
  o.flip_gain_sign = true;
  CHECK_FALSE(run_validation_suite(o).ok());
  o.flip_gain_sign = false;
  o.corrupt_gain = true;
  const StudyReport bad = run_validation_suite(o);
  bool oracle_failed = false;
  for (const auto& c : bad.checks)
    if (c.name.find("oracle") != std::string::npos && !c.pass) oracle_failed = true;
  CHECK(oracle_failed);
}
