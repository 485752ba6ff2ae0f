#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fragfem/errors.hpp"
#include "fragfem/studies.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3 };

struct Common {
  std::string file;
  std::vector<std::string> set;
  std::string tau, taus, grid, degree, mms, out;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c, bool file_required) {
  auto* f = cmd->add_option("scenario", c.file, "scenario file");
  if (file_required) f->required();
  f->check(CLI::ExistingFile);
  cmd->add_option("--tau", c.tau, "time step (time.tau)");
  cmd->add_option("--taus", c.taus, "step sizes of a temporal study, coarsest first (time.taus)");
  cmd->add_option("--grid", c.grid, "grid list, e.g. 20x20,40x40 (mesh.grids)");
  cmd->add_option("--degree", c.degree, "element degree list (mesh.degree)");
  cmd->add_option("--mms", c.mms, "auto, force_on or force_off (run.mms)")
      ->check(CLI::IsMember({"auto", "force_on", "force_off"}));
  cmd->add_option("--set", c.set, "override section.key=value (repeatable)");
  cmd->add_option("--out", c.out, "directory for CSV tables and report.json (output.dir)");
  cmd->add_flag("--json", c.json, "print the JSON report instead of the text summary");
}

std::vector<std::string> overrides(const Common& c, const std::string& mode) {
  std::vector<std::string> o = c.set;
  if (!mode.empty()) o.push_back("run.mode=" + mode);
  if (!c.tau.empty()) o.push_back("time.tau=" + c.tau);
  if (!c.taus.empty()) o.push_back("time.taus=" + c.taus);
  if (!c.grid.empty()) o.push_back("mesh.grids=" + c.grid);
  if (!c.degree.empty()) o.push_back("mesh.degree=" + c.degree);
  if (!c.mms.empty()) o.push_back("run.mms=" + c.mms);
  if (!c.out.empty()) o.push_back("output.dir=" + c.out);
  return o;
}

int emit(const fragfem::StudyReport& rep, const std::string& dir, bool json) {
  if (json)
    std::cout << fragfem::report_json(rep) << '\n';
  else
    fragfem::print_report(rep, std::cout);
  if (!dir.empty())
    for (const auto& path : fragfem::write_csv_tables(rep, dir)) std::cerr << "wrote " << path << '\n';
  return rep.ok() ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element solver for multidimensional fragmentation equations"};
  app.require_subcommand(1);

  Common run_opts, mom_opts, conv_opts, temp_opts;
  auto* run = app.add_subcommand("run", "run a scenario in the mode it declares (default: single run)");
  add_common(run, run_opts, true);
  auto* moments = app.add_subcommand("moments", "moment tables on every grid of the scenario");
  add_common(moments, mom_opts, true);
  auto* converge = app.add_subcommand("converge", "error and EOC sweep over grids and degrees");
  add_common(converge, conv_opts, true);
  auto* temporal = app.add_subcommand("temporal", "error and observed order over step sizes on one mesh");
  add_common(temporal, temp_opts, true);

  auto* validate = app.add_subcommand("validate", "invariant checks; nonzero exit on failure");
  std::string val_out;
  bool val_json = false, flip = false, corrupt = false, quick = false;
  validate->add_option("--out", val_out, "directory for checks.csv and report.json");
  validate->add_flag("--json", val_json, "print the JSON report");
  validate->add_flag("--flip-gain-sign", flip, "negative control: negate the gain matrix");
  validate->add_flag("--corrupt-gain", corrupt, "negative control: perturb one gain entry before the oracle check");
  validate->add_flag("--quick", quick, "skip the P2 oracle check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (validate->parsed()) {
      fragfem::ValidationOptions vo;
      vo.flip_gain_sign = flip;
      vo.corrupt_gain = corrupt;
      vo.include_oracle_p2 = !quick;
      return emit(fragfem::run_validation_suite(vo), val_out, val_json);
    }
    const Common* c = run->parsed()        ? &run_opts
                      : moments->parsed()  ? &mom_opts
                      : temporal->parsed() ? &temp_opts
                                           : &conv_opts;
    const std::string mode = run->parsed()        ? ""
                             : moments->parsed()  ? "moments"
                             : temporal->parsed() ? "temporal"
                                                  : "convergence";
    const fragfem::Scenario s = fragfem::parse_scenario(c->file, overrides(*c, mode));
    return emit(fragfem::run_scenario(s), s.output_dir, c->json);
  } catch (const fragfem::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kValidation;
  } catch (const fragfem::ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kValidation;
  } catch (const fragfem::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
