#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "echodyn/contour.hpp"
#include "echodyn/echo.hpp"

namespace echodyn {

inline constexpr int kConfigSchemaVersion = 1;

enum class Scenario { I, II, ScrambledI, ScrambledII, Process, ContourCheck, StabilityScan, LawCheck };

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  Scenario scenario = Scenario::I;
  std::string run_name = "run";
  std::string output_dir;  // empty: $ECHODYN_OUTPUT_ROOT/run_name, else ./echodyn_runs/run_name

  int N = 256;
  std::string shape = "A";
  double delta = 0.2;  // deformation strength
  double eta0 = 0.05;
  double E0 = 0.0;
  double lambda = 0.1;
  double scramble_delta = 0.5;
  double window = 0.3;  // Scenario II half-width around E0
  std::string density = "semicircle";  // or "uniform" or a two-column table path

  double t_min = 0.0;
  double t_max = 20.0;
  int t_points = 81;
  double short_time_max = 0.3;
  int short_time_points = 16;
  double fit_lo = 2.0;
  double fit_hi = 20.0;
  double process_t = 10.0;
  int s_points = 41;
  double e_min = -3.0;
  double e_max = 3.0;
  int e_points = 61;
  double z1_re = 0.3, z1_im = 1.0, z2_re = -0.2, z2_im = -1.0;

  int n_samples = 20;
  std::uint64_t seed = 1;
  std::string symmetry = "complex";
  std::string entry_law = "gaussian";
  int workers = 1;

  double c_time = 4.0;
  double c_eta0 = 0.25;
  double c_delta = 0.125;
  double c_shift = kShiftValidity;
  double lambda2t_ceiling = 1.0;
  double max_cost_seconds = 3600.0;

  RegimeConfig regime() const;
  SamplingOptions sampling() const;
  std::vector<double> times() const;
};

struct ConfigField {
  std::string key;
  std::string help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<ConfigField>& config_fields();
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// "key = value" lines, '#' comments. schema_version must match; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string format_config(const ExperimentConfig& cfg);

struct Violation {
  std::string name;
  std::string detail;
};

std::vector<Violation> validate(const ExperimentConfig& cfg);

double estimate_cost_seconds(const ExperimentConfig& cfg);

std::string default_output_root();

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct RunResult {
  std::string directory;
  std::vector<std::string> files;
  std::string manifest;  // JSON text
  std::string summary;
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

// Writes config.txt, curves.tsv (plus reference.tsv for scrambled runs), manifest.json, summary.txt.
RunResult run(const ExperimentConfig& cfg);

}  // namespace echodyn
