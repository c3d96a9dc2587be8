#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <map>
#include <sstream>

#include "echodyn/acceptance.hpp"
#include "echodyn/experiment.hpp"
#include "echodyn/platform.hpp"

using namespace echodyn;
using json = nlohmann::ordered_json;

namespace {

struct DeformationArgs {
  std::string matrix;
  std::vector<double> diag;
  int zero = 0;

  void attach(CLI::App* app) {
    app->add_option("--matrix", matrix, "deformation matrix file (text or binary)");
    app->add_option("--diag", diag, "diagonal deformation entries")->delimiter(',');
    app->add_option("--zero", zero, "zero deformation of this size");
  }
  Deformation get() const {
    if (!matrix.empty()) return load_deformation(matrix);
    if (!diag.empty()) return Deformation::diagonal(Eigen::Map<const VecD>(diag.data(), diag.size()));
    if (zero > 0) return Deformation::zero(zero);
    throw Error(ErrorKind::InvalidArgument, "one of --matrix, --diag, --zero is required");
  }
};

struct ExperimentArgs {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool require_pass = false;
  bool scenario_two = false;

  void attach(CLI::App* app, bool has_variant) {
    app->add_option("--config", config_path, "experiment config file");
    app->add_flag("--require-pass", require_pass, "exit non-zero unless every check passes");
    if (has_variant) app->add_flag("--scenario2", scenario_two, "scramble the Scenario II fidelity echo");
    for (const auto& f : config_fields()) {
      if (f.key == "scenario") continue;
      app->add_option("--" + f.key, values[f.key], f.help);
    }
  }
  ExperimentConfig get(Scenario s) const {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    cfg.scenario = s;
    for (const auto& [k, v] : values)
      if (!v.empty()) set_config_value(cfg, k, v);
    return cfg;
  }
};

int run_experiment(const ExperimentArgs& a, Scenario s) {
  const ExperimentConfig cfg = a.get(s);
  const RunResult r = run(cfg);
  std::cout << r.summary << "output: " << r.directory << "\n";
  return a.require_pass && !r.all_passed() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  ensure_blas_kernel(argv);
  CLI::App app{"Echo dynamics of deformed Wigner matrices"};
  app.require_subcommand(1);

  DeformationArgs mde_d;
  double e = 0, eta = 0.1;
  auto* mde = app.add_subcommand("mde-solve", "solve the matrix Dyson equation at z = E + i eta");
  mde_d.attach(mde);
  mde->add_option("--E", e, "real part of z");
  mde->add_option("--eta", eta, "imaginary part of z");

  DeformationArgs bulk_d;
  double kappa = 0.05, grid = 1e-3;
  auto* bulk = app.add_subcommand("bulk", "kappa-bulk of the self-consistent density");
  bulk_d.attach(bulk);
  bulk->add_option("--kappa", kappa, "density threshold");
  bulk->add_option("--grid", grid, "energy grid spacing");

  std::map<std::string, std::pair<Scenario, ExperimentArgs>> experiments{
      {"echo-run", {Scenario::I, {}}},
      {"process-run", {Scenario::Process, {}}},
      {"scramble-run", {Scenario::ScrambledI, {}}},
      {"scenario2-run", {Scenario::II, {}}},
      {"contour-check", {Scenario::ContourCheck, {}}},
      {"stability-scan", {Scenario::StabilityScan, {}}},
      {"law-check", {Scenario::LawCheck, {}}},
  };
  std::map<std::string, CLI::App*> exp_apps;
  for (auto& [name, entry] : experiments) {
    auto* sub = app.add_subcommand(name, std::string("experiment: ") + scenario_name(entry.first));
    entry.second.attach(sub, name == "scramble-run");
    exp_apps[name] = sub;
  }

  std::vector<int> only;
  int workers = 1;
  auto* acc = app.add_subcommand("acceptance", "run the acceptance suite");
  acc->add_option("--only", only, "criterion ids")->delimiter(',');
  acc->add_option("--workers", workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*mde) {
      const MdeSolution s = solve_mde(mde_d.get(), {e, eta});
      json j{{"E", e}, {"eta", eta}, {"m_trace", {s.m_trace.real(), s.m_trace.imag()}}, {"rho", s.rho},
             {"residual", s.residual}, {"iterations", s.iterations}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*bulk) {
      const BulkSet b = kappa_bulk(bulk_d.get(), kappa, grid);
      json j = json::array();
      for (const auto& iv : b.intervals) j.push_back({iv.lo, iv.hi});
      std::cout << json{{"kappa", kappa}, {"intervals", j}}.dump(2) << "\n";
      return 0;
    }
    if (*acc) {
      AcceptanceOptions opt;
      opt.only = only;
      opt.workers = workers;
      opt.log = &std::cout;
      const auto res = run_acceptance(opt);
      for (const auto& r : res)
        if (!r.passed) return 1;
      return 0;
    }
    for (auto& [name, entry] : experiments)
      if (*exp_apps[name]) {
        Scenario s = entry.first;
        if (name == "scramble-run" && entry.second.scenario_two) s = Scenario::ScrambledII;
        return run_experiment(entry.second, s);
      }
  } catch (const Error& err) {
    std::cerr << err.what() << "\n";
    return 2;
  }
  return 0;
}
