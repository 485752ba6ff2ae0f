#include <doctest.h>

#include <filesystem>

#include "fragfem/errors.hpp"
#include "fragfem/scenario.hpp"

using namespace fragfem;

TEST_CASE("raw format: sections, quoting, comments") {
  const RawScenario raw = parse_scenario_text(
      "# leading comment\n[problem]\ncase = 1   # trailing\nkernel = \"2/(y1*y2)\"\n\n[mesh]\ngrids=20x20, 40x40\n");
  REQUIRE(raw.find("problem.case"));
  CHECK(raw.find("problem.case")->text == "1");
  CHECK(raw.find("problem.kernel")->text == "2/(y1*y2)");
  CHECK(raw.find("problem.kernel")->line == 4);
  CHECK(raw.find("mesh.grids")->text == "20x20, 40x40");
  CHECK(raw.order.size() == 3);
}

TEST_CASE("raw format errors name the position") {
  CHECK_THROWS_AS(parse_scenario_text("case = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario_text("[problem\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario_text("[problem]\ncase 1\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario_text("[problem]\nkernel = \"2/y1\n"), ParseError);
  try {
    parse_scenario_text("[problem]\ncase = 1\ncase = 2\n");
    FAIL("duplicate key accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("minimal bundled case") {
  const Scenario s = parse_scenario_string("[problem]\ncase = 1\n[mesh]\ngrids = 20x20\n");
  CHECK(s.problem.id == "1");
  CHECK(s.grids.size() == 1);
  CHECK(s.grids[0].grading == Grading::Geometric);
  CHECK(s.tau == 0.01);
  CHECK(s.degrees == std::vector<int>{1});
  CHECK(s.problem.report_times == std::vector<double>{0.1, 0.4, 0.7, 1.0});
  CHECK(s.grid_label(0) == "20x20");
  CHECK(s.mode == Mode::Run);
}

TEST_CASE("custom problem from expressions") {
  const Scenario s = parse_scenario_string(R"scn([problem]
dim = 2
lower = 1e-9
upper = 2
selection = "x1 + x2"
kernel = "2/(y1*y2)"
initial = dirac(1, 1)
[moments]
m00 = "1 + 2*t"
[mesh]
grids = 10x10
[time]
final = 1
report = 0.5, 1
)scn");
  CHECK_FALSE(s.case_id);
  CHECK(s.problem.selection(Point{0.3, 0.4, 0.0}) == doctest::Approx(0.7));
  CHECK(s.problem.initial.kind == InitialCondition::Kind::Dirac);
  REQUIRE(s.problem.moments.size() == 1);
  CHECK(s.problem.moments[0].exact(Variables{0, 0, 0, 0, 0, 0, 1.5}) == 4.0);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(parse_scenario_string("[problem]\ncase = 1\ncolour = red\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_string("[physics]\nx = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_string("[problem]\ncase = 9\n[mesh]\ngrids = 4x4\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_string("[problem]\ncase = 1\n[mesh]\ngrids = 40x40, 20x20\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_string("[problem]\ncase = 1\n[mesh]\ngrids = 4x4\ndegree = 4\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_string("[problem]\ncase = 1\n[mesh]\ngrids = 4x4\n[time]\nreport = 2\n"),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario_string("[problem]\ncase = 1\n[mesh]\ngrids = 4x4\n[run]\nmode = convergence\n"),
                  ValidationError);
  try {
    parse_scenario_string("[problem]\ncase = 1\n[mesh]\ngrids = 4x4\n[time]\ntau = -1\n");
    FAIL("negative step accepted");
  } catch (const ValidationError& e) {
    CHECK(e.key() == "time.tau");
  }
}

TEST_CASE("expression errors point into the file") {
  try {
    parse_scenario_string("[problem]\ncase = 1\nselection = x1 + q\n[mesh]\ngrids = 4x4\n");
    FAIL("bad identifier accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 18);
  }
}

TEST_CASE("overrides") {
  const Scenario s = parse_scenario_string("[problem]\ncase = 2\n[mesh]\ngrids = 20x20\n",
                                           {"time.final=1.5", "mesh.grids=5x5,10x10", "time.tau=0.005"});
  CHECK(s.problem.final_time == 1.5);
  CHECK(s.problem.report_times == std::vector<double>{1.0, 1.5});
  CHECK(s.grids.size() == 2);
  CHECK(s.tau == 0.005);
  CHECK_THROWS_AS(parse_scenario_string("[problem]\ncase = 2\n", {"tau=1"}), ValidationError);
}

TEST_CASE("temporal mode defaults") {
  const Scenario s = parse_scenario_string(
      "[run]\nmode = temporal\n[problem]\ncase = conv1\n[mesh]\ngrids = 4x4\n[time]\ntau = 0.01\n");
  CHECK(s.taus == std::vector<double>{0.04, 0.02, 0.01});
  CHECK_THROWS_AS(parse_scenario_string("[run]\nmode = temporal\n[problem]\ncase = conv1\n[mesh]\ngrids = "
                                        "4x4\n[time]\ntaus = 0.01, 0.02, 0.005\n"),
                  ValidationError);
}

TEST_CASE("grid labels") {
  CHECK(parse_grid_label("20x20", 2) == std::array<int, 3>{20, 20, 1});
  CHECK(parse_grid_label("15", 3) == std::array<int, 3>{15, 15, 15});
  CHECK(parse_grid_label("5x6x7", 3) == std::array<int, 3>{5, 6, 7});
  CHECK_THROWS(parse_grid_label("5x6", 3));
  CHECK_THROWS(parse_grid_label("0x4", 2));
}

TEST_CASE("every bundled scenario file builds") {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(FRAGFEM_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(parse_scenario(entry.path().string()));
    ++n;
  }
  CHECK(n >= 9);
}
