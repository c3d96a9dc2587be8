#include "echodyn/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "echodyn/scenario2.hpp"
#include "echodyn/stats.hpp"

namespace echodyn {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigInvalid, key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw Error(ErrorKind::ConfigInvalid, key + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

template <class T>
ConfigField num_field(const std::string& key, const std::string& help, T ExperimentConfig::*m) {
  ConfigField f;
  f.key = key;
  f.help = help;
  f.set = [key, m](ExperimentConfig& c, const std::string& v) {
    if constexpr (std::is_same_v<T, double>)
      c.*m = to_double(key, v);
    else if constexpr (std::is_same_v<T, std::uint64_t>) {
      try {
        std::size_t pos = 0;
        c.*m = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, key + ": expected an unsigned integer, got '" + v + "'");
      }
    } else
      c.*m = static_cast<T>(to_int(key, v));
  };
  f.get = [m](const ExperimentConfig& c) {
    if constexpr (std::is_same_v<T, double>)
      return fmt(c.*m);
    else
      return std::to_string(c.*m);
  };
  return f;
}

ConfigField str_field(const std::string& key, const std::string& help, std::string ExperimentConfig::*m) {
  return {key, help, [m](ExperimentConfig& c, const std::string& v) { c.*m = v; },
          [m](const ExperimentConfig& c) { return c.*m; }};
}

SymmetryClass symmetry_from(const std::string& s) {
  if (s == "complex" || s == "complex-hermitian" || s == "GUE") return SymmetryClass::ComplexHermitian;
  if (s == "real" || s == "real-symmetric" || s == "GOE") return SymmetryClass::RealSymmetric;
  throw Error(ErrorKind::ConfigInvalid, "symmetry: unknown class '" + s + "'");
}

EntryLaw law_from(const std::string& s) {
  if (s == "gaussian") return EntryLaw::Gaussian;
  if (s == "rademacher") return EntryLaw::Rademacher;
  throw Error(ErrorKind::ConfigInvalid, "entry_law: unknown law '" + s + "'");
}

LimitingDensity density_from(const std::string& s) {
  if (s == "semicircle") return LimitingDensity::semicircle();
  if (s == "uniform") return LimitingDensity::uniform(-std::sqrt(3.0), std::sqrt(3.0));
  return load_density_table(s, true);
}

bool is_scenario_one(Scenario s) {
  return s == Scenario::I || s == Scenario::ScrambledI || s == Scenario::Process;
}
bool is_scenario_two(Scenario s) { return s == Scenario::II || s == Scenario::ScrambledII; }

CheckResult relative_check(const std::string& name, double measured, double stderr_, double predicted,
                           double tol) {
  CheckResult c{name, measured, predicted, tol, false};
  c.passed = std::isfinite(measured) && std::abs(measured - predicted) <= tol * std::abs(predicted) + 3 * stderr_;
  return c;
}

void write_curve(const std::string& path, const EchoCurve& c, const std::string& time_label) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << time_label << "\tre_amplitude\tim_amplitude\tmodulus2\tstderr\n";
  for (std::size_t k = 0; k < c.times.size(); ++k)
    out << fmt(c.times[k]) << '\t' << fmt(c.amplitude[k].real()) << '\t' << fmt(c.amplitude[k].imag()) << '\t'
        << fmt(c.modulus2[k]) << '\t' << fmt(c.stderr_[k]) << '\n';
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "\t" : "") << header[j];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "\t" : "") << fmt(r[j]);
    out << '\n';
  }
}

double ratio_of_means(const EchoCurve& num, const EchoCurve& den, double t_lo, double t_hi, double* err) {
  std::vector<double> a, b;
  for (std::size_t k = 0; k < num.times.size(); ++k)
    if (num.times[k] > t_lo && num.times[k] <= t_hi) {
      a.push_back(num.modulus2[k]);
      b.push_back(den.modulus2[k]);
    }
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, "no times in the ratio window");
  const double sa = pairwise_sum(a), sb = pairwise_sum(b);
  // per-sample ratios give the spread
  std::vector<double> per;
  for (std::size_t s = 0; s < num.per_sample.size() && s < den.per_sample.size(); ++s) {
    double x = 0, y = 0;
    for (std::size_t k = 0; k < num.times.size(); ++k)
      if (num.times[k] > t_lo && num.times[k] <= t_hi) {
        x += num.per_sample[s][k];
        y += den.per_sample[s][k];
      }
    if (y > 0) per.push_back(x / y);
  }
  *err = mean_stderr(per).stderr_;
  return sa / sb;
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::I: return "I";
    case Scenario::II: return "II";
    case Scenario::ScrambledI: return "scrambled-I";
    case Scenario::ScrambledII: return "scrambled-II";
    case Scenario::Process: return "process";
    case Scenario::ContourCheck: return "contour-check";
    case Scenario::StabilityScan: return "stability-scan";
    case Scenario::LawCheck: return "law-check";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::I, Scenario::II, Scenario::ScrambledI, Scenario::ScrambledII, Scenario::Process,
                     Scenario::ContourCheck, Scenario::StabilityScan, Scenario::LawCheck})
    if (name == scenario_name(s)) return s;
  throw Error(ErrorKind::ConfigInvalid, "scenario: unknown value '" + name + "'");
}

RegimeConfig ExperimentConfig::regime() const {
  RegimeConfig r;
  r.c_time = c_time;
  r.c_eta0 = c_eta0;
  r.c_delta = c_delta;
  return r;
}

SamplingOptions ExperimentConfig::sampling() const {
  SamplingOptions o;
  o.symmetry_class = symmetry_from(symmetry);
  o.entry_law = law_from(entry_law);
  o.workers = workers;
  return o;
}

std::vector<double> ExperimentConfig::times() const { return linspace(t_min, t_max, t_points); }

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    f.push_back(num_field("schema_version", "config schema version", &ExperimentConfig::schema_version));
    f.push_back({"scenario", "I | II | scrambled-I | scrambled-II | process | contour-check | stability-scan | law-check",
                 [](ExperimentConfig& c, const std::string& v) { c.scenario = scenario_from_name(v); },
                 [](const ExperimentConfig& c) { return std::string(scenario_name(c.scenario)); }});
    f.push_back(str_field("run_name", "name of the run directory", &ExperimentConfig::run_name));
    f.push_back(str_field("output_dir", "explicit output directory", &ExperimentConfig::output_dir));
    f.push_back(num_field("N", "matrix size", &ExperimentConfig::N));
    f.push_back(str_field("shape", "deformation pair shape A | B | C", &ExperimentConfig::shape));
    f.push_back(num_field("delta", "deformation strength Delta", &ExperimentConfig::delta));
    f.push_back(num_field("eta0", "energy-filter width", &ExperimentConfig::eta0));
    f.push_back(num_field("E0", "reference energy", &ExperimentConfig::E0));
    f.push_back(num_field("lambda", "coupling of the perturbation", &ExperimentConfig::lambda));
    f.push_back(num_field("scramble_delta", "scrambling strength", &ExperimentConfig::scramble_delta));
    f.push_back(num_field("window", "half-width of the initial-state window", &ExperimentConfig::window));
    f.push_back(str_field("density", "semicircle | uniform | table path", &ExperimentConfig::density));
    f.push_back(num_field("t_min", "first time", &ExperimentConfig::t_min));
    f.push_back(num_field("t_max", "last time", &ExperimentConfig::t_max));
    f.push_back(num_field("t_points", "number of times", &ExperimentConfig::t_points));
    f.push_back(num_field("short_time_max", "end of the short-time fit window", &ExperimentConfig::short_time_max));
    f.push_back(num_field("short_time_points", "extra times in the short-time window", &ExperimentConfig::short_time_points));
    f.push_back(num_field("fit_lo", "start of the exponential fit window", &ExperimentConfig::fit_lo));
    f.push_back(num_field("fit_hi", "end of the exponential fit window", &ExperimentConfig::fit_hi));
    f.push_back(num_field("process_t", "echo-process time t", &ExperimentConfig::process_t));
    f.push_back(num_field("s_points", "number of points on [0, 2t]", &ExperimentConfig::s_points));
    f.push_back(num_field("e_min", "scan energy lower end", &ExperimentConfig::e_min));
    f.push_back(num_field("e_max", "scan energy upper end", &ExperimentConfig::e_max));
    f.push_back(num_field("e_points", "scan energy points", &ExperimentConfig::e_points));
    f.push_back(num_field("z1_re", "law-check z1 real part", &ExperimentConfig::z1_re));
    f.push_back(num_field("z1_im", "law-check z1 imaginary part", &ExperimentConfig::z1_im));
    f.push_back(num_field("z2_re", "law-check z2 real part", &ExperimentConfig::z2_re));
    f.push_back(num_field("z2_im", "law-check z2 imaginary part", &ExperimentConfig::z2_im));
    f.push_back(num_field("n_samples", "Monte-Carlo samples", &ExperimentConfig::n_samples));
    f.push_back(num_field("seed", "master seed", &ExperimentConfig::seed));
    f.push_back(str_field("symmetry", "complex | real", &ExperimentConfig::symmetry));
    f.push_back(str_field("entry_law", "gaussian | rademacher", &ExperimentConfig::entry_law));
    f.push_back(num_field("workers", "worker threads", &ExperimentConfig::workers));
    f.push_back(num_field("c_time", "regime constant for 1/t", &ExperimentConfig::c_time));
    f.push_back(num_field("c_eta0", "regime constant for eta0", &ExperimentConfig::c_eta0));
    f.push_back(num_field("c_delta", "regime constant for Delta", &ExperimentConfig::c_delta));
    f.push_back(num_field("c_shift", "largest Delta treated as a small shift", &ExperimentConfig::c_shift));
    f.push_back(num_field("lambda2t_ceiling", "ceiling T on lambda^2 t", &ExperimentConfig::lambda2t_ceiling));
    f.push_back(num_field("max_cost_seconds", "estimated-cost ceiling", &ExperimentConfig::max_cost_seconds));
    return f;
  }();
  return fields;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : config_fields())
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  throw Error(ErrorKind::ConfigInvalid, "unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  bool version_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw Error(ErrorKind::ConfigInvalid, "duplicate key '" + key + "'");
    set_config_value(cfg, key, value);
    if (key == "schema_version") version_seen = true;
  }
  if (!version_seen) throw Error(ErrorKind::ConfigInvalid, "missing schema_version");
  if (cfg.schema_version != kConfigSchemaVersion)
    throw Error(ErrorKind::ConfigInvalid, "unsupported schema_version " + std::to_string(cfg.schema_version));
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ExperimentConfig& cfg) {
  std::string s;
  for (const auto& f : config_fields()) s += f.key + " = " + f.get(cfg) + "\n";
  return s;
}

std::vector<Violation> validate(const ExperimentConfig& cfg) {
  std::vector<Violation> v;
  auto add = [&](const std::string& name, const std::string& detail) { v.push_back({name, detail}); };
  const Scenario sc = cfg.scenario;

  if (cfg.schema_version != kConfigSchemaVersion) add("schema_version", "unsupported schema version");
  if (cfg.N < 2) add("N >= 2", "N = " + std::to_string(cfg.N));
  if (cfg.N > 4096) add("N <= 4096", "N = " + std::to_string(cfg.N));
  if (cfg.n_samples < 1) add("n_samples >= 1", "n_samples = " + std::to_string(cfg.n_samples));
  if (cfg.workers < 1) add("workers >= 1", "workers = " + std::to_string(cfg.workers));
  if (cfg.t_points < 2 || !(cfg.t_max > cfg.t_min) || cfg.t_min < 0)
    add("time grid", "need 0 <= t_min < t_max and t_points >= 2");
  try {
    symmetry_from(cfg.symmetry);
    law_from(cfg.entry_law);
  } catch (const Error& e) {
    add("sampling", e.what());
  }

  const bool uses_pair = is_scenario_one(sc) || sc == Scenario::ContourCheck ||
                         sc == Scenario::StabilityScan || sc == Scenario::LawCheck;
  if (uses_pair) {
    try {
      pair_shape_from_name(cfg.shape);
    } catch (const Error& e) {
      add("shape", e.what());
    }
    if (cfg.N % 2 != 0) add("N even", "deformation shapes need an even N");
  }

  if (is_scenario_one(sc) || sc == Scenario::ContourCheck) {
    if (!(cfg.delta > 0)) add("Δ must be positive for Γ-regime", "delta = " + fmt(cfg.delta));
    if (cfg.delta > cfg.c_shift) add("Δ ≤ 𝔠", "delta = " + fmt(cfg.delta) + ", c_shift = " + fmt(cfg.c_shift));
    if (!(cfg.eta0 > 0)) add("η_0 > 0", "eta0 = " + fmt(cfg.eta0));
    if (cfg.delta > 0 && cfg.delta < 1 && !(cfg.eta0 < cfg.delta / std::abs(std::log(cfg.delta))))
      add("η_0 < Δ/|log Δ|", "eta0 = " + fmt(cfg.eta0) + ", bound = " + fmt(cfg.delta / std::abs(std::log(cfg.delta))));
  }
  if (sc == Scenario::I && !(cfg.fit_lo < cfg.fit_hi && cfg.fit_hi <= cfg.t_max))
    add("fit window", "need fit_lo < fit_hi <= t_max");
  if (sc == Scenario::Process) {
    if (!(cfg.process_t > 0)) add("process_t > 0", "process_t = " + fmt(cfg.process_t));
    if (cfg.s_points < 3 || cfg.s_points % 2 == 0) add("s_points odd >= 3", "s = t must lie on the grid");
  }
  if (sc == Scenario::ContourCheck && cfg.t_min < 1) add("t >= 1", "contour-check needs t_min >= 1");
  if (sc == Scenario::StabilityScan && (cfg.e_points < 1 || !(cfg.e_max >= cfg.e_min) || !(cfg.eta0 > 0)))
    add("energy grid", "need e_min <= e_max, e_points >= 1, eta0 > 0");
  if (sc == Scenario::LawCheck && (cfg.z1_im == 0 || cfg.z2_im == 0))
    add("Im z != 0", "law-check needs off-axis spectral parameters");

  if (is_scenario_two(sc)) {
    if (!(cfg.lambda > 0)) add("λ > 0", "lambda = " + fmt(cfg.lambda));
    if (cfg.lambda * cfg.lambda * cfg.t_max > cfg.lambda2t_ceiling)
      add("λ²t ≤ T", "lambda^2 t_max = " + fmt(cfg.lambda * cfg.lambda * cfg.t_max) + " exceeds T = " +
                          fmt(cfg.lambda2t_ceiling));
    if (!(cfg.window > 0)) add("window > 0", "window = " + fmt(cfg.window));
    if (sc == Scenario::II && !(cfg.fit_lo < cfg.fit_hi && cfg.fit_hi <= cfg.t_max))
      add("fit window", "need fit_lo < fit_hi <= t_max");
  }
  if ((sc == Scenario::ScrambledI || sc == Scenario::ScrambledII) && cfg.scramble_delta < 0)
    add("δ >= 0", "scramble_delta = " + fmt(cfg.scramble_delta));
  return v;
}

double estimate_cost_seconds(const ExperimentConfig& cfg) {
  const double eig = 1.3 * std::pow(cfg.N / 1024.0, 3);
  double per_sample = 0;
  switch (cfg.scenario) {
    case Scenario::I:
    case Scenario::Process: per_sample = 2 * eig; break;
    case Scenario::ScrambledI: per_sample = 3 * eig; break;
    case Scenario::II: per_sample = eig; break;
    case Scenario::ScrambledII: per_sample = 3 * eig; break;
    case Scenario::LawCheck: per_sample = 0.6 * eig; break;
    case Scenario::ContourCheck:
    case Scenario::StabilityScan: return 1.0;
  }
  return per_sample * cfg.n_samples / std::max(1, cfg.workers);
}

std::string default_output_root() {
  const char* env = std::getenv("ECHODYN_OUTPUT_ROOT");
  return env && *env ? env : "echodyn_runs";
}

bool RunResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunResult run(const ExperimentConfig& cfg) {
  const auto violations = validate(cfg);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.name + " (" + v.detail + ")";
    throw Error(ErrorKind::ConfigInvalid, msg);
  }
  const double cost = estimate_cost_seconds(cfg);
  if (cost > cfg.max_cost_seconds)
    throw Error(ErrorKind::ResourceExceeded,
                "estimated " + fmt(cost) + " s exceeds max_cost_seconds = " + fmt(cfg.max_cost_seconds));

  RunResult res;
  res.directory = cfg.output_dir.empty() ? (fs::path(default_output_root()) / cfg.run_name).string() : cfg.output_dir;
  fs::create_directories(res.directory);
  auto path = [&](const std::string& name) {
    res.files.push_back(name);
    return (fs::path(res.directory) / name).string();
  };

  json manifest;
  manifest["schema_version"] = cfg.schema_version;
  manifest["scenario"] = scenario_name(cfg.scenario);
  json jc;
  for (const auto& f : config_fields()) jc[f.key] = f.get(cfg);
  manifest["config"] = jc;
  manifest["seeding"] = "sample i uses splitmix64(seed, i); scrambling draws splitmix64(splitmix64(seed, i), 0x5c5c5c5c)";
  json derived;
  std::ostringstream summary;
  summary << "scenario " << scenario_name(cfg.scenario) << ", N = " << cfg.N << ", samples = " << cfg.n_samples
          << ", seed = " << cfg.seed << "\n";

  const SamplingOptions opt = cfg.sampling();
  const Scenario sc = cfg.scenario;

  if (is_scenario_one(sc) || sc == Scenario::ContourCheck || sc == Scenario::StabilityScan ||
      sc == Scenario::LawCheck) {
    const auto [D1, D2] = sample_deformation_pair(pair_shape_from_name(cfg.shape), cfg.delta, cfg.N, cfg.seed);
    derived["deformation"] = {{"shape", pair_shape_name(pair_shape_from_name(cfg.shape))},
                              {"delta", cfg.delta},
                              {"rotation_seed", cfg.seed},
                              {"delta_measured", std::sqrt(delta_squared(D1, D2))}};

    if (sc == Scenario::I) {
      std::vector<double> times = cfg.times();
      for (double t : linspace(0.0, cfg.short_time_max, cfg.short_time_points)) times.push_back(t);
      std::sort(times.begin(), times.end());
      times.erase(std::unique(times.begin(), times.end()), times.end());
      const EchoCurve c = averaged_echo(D1, D2, cfg.E0, cfg.eta0, times, cfg.n_samples, cfg.seed, opt);
      write_curve(path("curves.tsv"), c, "t");
      const DecayParameters pc = parabolic_coefficient(D1, D2, cfg.E0, cfg.eta0);
      const RateFit cur = fit_short_time_curvature(c, cfg.short_time_max);
      res.checks.push_back(relative_check("short_time_curvature", cur.value, cur.stderr_, pc.gamma, 0.10));
      derived["gamma"] = pc.gamma;
      try {
        const DecayParameters gr = gamma_rate(D1, D2, cfg.E0);
        const RateFit ex = fit_exponential_rate(c, cfg.fit_lo, cfg.fit_hi);
        res.checks.push_back(relative_check("exponential_rate", ex.value, ex.stderr_, gr.Gamma, 0.15));
        derived["Gamma"] = gr.Gamma;
      } catch (const Error& e) {
        summary << "Gamma unavailable: " << e.what() << "\n";
      }
    } else if (sc == Scenario::ScrambledI) {
      ScenarioOneBatch batch;
      batch.echoes.push_back({cfg.E0, cfg.eta0, cfg.times()});
      batch.scrambled.push_back({cfg.scramble_delta, cfg.E0, cfg.eta0, cfg.times()});
      const ScenarioOneResult r = run_scenario_one(D1, D2, batch, cfg.n_samples, cfg.seed, opt);
      write_curve(path("curves.tsv"), r.scrambled[0], "t");
      write_curve(path("reference.tsv"), r.echoes[0], "t");
      double err = 0;
      const double ratio = ratio_of_means(r.scrambled[0], r.echoes[0], cfg.t_min, cfg.t_max, &err);
      const double phi2 = std::pow(bessel_phi(cfg.scramble_delta), 2);
      derived["phi_squared"] = phi2;
      if (phi2 < 0.01)
        res.checks.push_back({"scrambling_null", ratio, phi2, 0.05, std::abs(ratio) <= 0.05 + 3 * err});
      else
        res.checks.push_back(relative_check("scrambling_ratio", ratio, err, phi2, 0.10));
    } else if (sc == Scenario::Process) {
      const EchoCurve c = echo_process(D1, D2, cfg.E0, cfg.eta0, cfg.process_t,
                                       linspace(0.0, 2 * cfg.process_t, cfg.s_points), cfg.n_samples, cfg.seed, opt);
      write_curve(path("curves.tsv"), c, "s");
      const double mid = c.modulus2[cfg.s_points / 2], end = c.modulus2.back();
      res.checks.push_back({"process_midpoint_ratio", mid / end, 0.2, 0.0, mid / end <= 0.2});
    } else if (sc == Scenario::ContourCheck) {
      std::vector<std::vector<double>> rows;
      double worst = 0;
      bool ok = true;
      for (double t : cfg.times()) {
        const PhasePrediction ph = phase_prediction(D1, D2, cfg.E0, cfg.eta0, t, cfg.regime());
        const ContourSpec spec = build_contours(D1, D2, t, cfg.eta0, cfg.regime());
        const DeterministicAmplitude da = deterministic_echo_amplitude(D1, D2, cfg.E0, cfg.eta0, t, spec);
        const double modulus_pred = std::exp(-ph.s0.imag() * t) * ph.im_m1;
        const double dev = std::abs(std::abs(da.value) - modulus_pred) / ph.im_m1;
        const double phase_dev = std::abs(da.value - ph.value) / ph.im_m1;
        const double env = echo_error_envelope(t, cfg.delta, cfg.eta0);
        worst = std::max(worst, dev);
        ok = ok && phase_dev <= 3 * env;
        rows.push_back({t, da.value.real(), da.value.imag(), ph.value.real(), ph.value.imag(), modulus_pred, dev,
                        phase_dev, env, da.quadrature_error_estimate});
      }
      write_table(path("curves.tsv"),
                  {"t", "re_I", "im_I", "re_phase", "im_phase", "modulus_prediction", "modulus_deviation",
                   "phase_deviation", "envelope", "quadrature_error"},
                  rows);
      summary << "max |I| deviation from exp(-Im s0 t) <Im M1>, relative: " << fmt(worst) << "\n";
      res.checks.push_back({"phase_law_within_3E", worst, 0.0, 0.0, ok});
    } else if (sc == Scenario::StabilityScan) {
      std::vector<std::vector<double>> rows;
      double worst = 0;
      for (double e : linspace(cfg.e_min, cfg.e_max, cfg.e_points)) {
        const StabilityReading s = stability_eigenvalue(solve_mde(D1, {e, cfg.eta0}), solve_mde(D2, {e, -cfg.eta0}));
        rows.push_back({e, s.eigenvalue.real(), s.eigenvalue.imag(), s.bound_rhs, s.ratio});
        worst = std::max(worst, s.ratio);
      }
      write_table(path("curves.tsv"), {"E", "re_stability", "im_stability", "bound_rhs", "ratio"}, rows);
      summary << "max |1 - <M1 M2>|^-1 / bound: " << fmt(worst) << "\n";
      res.checks.push_back({"stability_ratio_finite", worst, 0.0, 0.0, std::isfinite(worst)});
    } else {
      const cplx z1(cfg.z1_re, cfg.z1_im), z2(cfg.z2_re, cfg.z2_im);
      const LawCheck lc = two_resolvent_law_check(D1, D2, z1, z2, cfg.n_samples, cfg.seed, opt);
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < lc.deviations.size(); ++i) rows.push_back({double(i), lc.deviations[i]});
      write_table(path("curves.tsv"), {"sample", "deviation"}, rows);
      derived["m12_trace"] = {lc.deterministic.real(), lc.deterministic.imag()};
      summary << "mean deviation " << fmt(lc.mean) << " +- " << fmt(lc.stderr_) << ", max " << fmt(lc.max) << "\n";
      res.checks.push_back({"law_deviation_finite", lc.mean, 0.0, 0.0, std::isfinite(lc.mean)});
    }
  } else {
    const LimitingDensity rho = density_from(cfg.density);
    const VecD q = density_quantiles(rho, cfg.N);
    const SpectralData S0 = eigendecompose(MatC(q.cast<cplx>().asDiagonal()));
    const std::uint64_t state_seed = sample_seed(cfg.seed, 0x7073693000ULL);
    const LocalizedState psi0 = prepare_localized_state(S0, cfg.E0, cfg.window, state_seed);
    derived["H0"] = "quantiles of " + rho.name;
    derived["psi0_seed"] = state_seed;
    derived["psi0_energy"] = psi0.energy;
    derived["psi0_window_size"] = psi0.indices.size();

    std::vector<cplx> zs;
    for (double e : linspace(cfg.E0 - cfg.window, cfg.E0 + cfg.window, 7))
      for (double eta : {0.1, 0.3, 1.0}) zs.emplace_back(e, eta);
    const double eps0 = verify_h0_assumption(q, rho, zs, 0.1).epsilon0;
    derived["epsilon0"] = eps0;

    if (sc == Scenario::II) {
      const EchoCurve c = fidelity_echo(S0, cfg.lambda, psi0, cfg.times(), cfg.n_samples, cfg.seed, opt);
      write_curve(path("curves.tsv"), c, "t");
      const double pred = 2 * kPi * rho(cfg.E0) * cfg.lambda * cfg.lambda;
      const double T = cfg.lambda2t_ceiling;
      const double budget = error_budget(cfg.lambda, cfg.t_max, cfg.window, eps0);
      const double tol = std::max(0.15, budget / T);
      const RateFit ex = fit_exponential_rate(c, cfg.fit_lo, cfg.fit_hi);
      derived["predicted_rate"] = pred;
      derived["error_budget"] = budget;
      res.checks.push_back(relative_check("decay_rate", ex.value, ex.stderr_, pred, tol));
    } else {
      const EchoCurve plain = fidelity_echo(S0, cfg.lambda, psi0, cfg.times(), cfg.n_samples, cfg.seed, opt);
      const EchoCurve scr =
          scrambled_fidelity_echo(S0, cfg.lambda, cfg.scramble_delta, psi0, cfg.times(), cfg.n_samples, cfg.seed, opt);
      write_curve(path("curves.tsv"), scr, "t");
      write_curve(path("reference.tsv"), plain, "t");
      double err = 0;
      const double ratio = ratio_of_means(scr, plain, cfg.t_min, cfg.t_max, &err);
      const double phi2 = std::pow(bessel_phi(cfg.scramble_delta), 2);
      derived["phi_squared"] = phi2;
      res.checks.push_back(relative_check("scrambling_ratio", ratio, err, phi2, 0.10));
    }
  }

  manifest["derived"] = derived;
  json jchecks = json::array();
  for (const auto& c : res.checks) {
    jchecks.push_back({{"name", c.name}, {"measured", c.measured}, {"predicted", c.predicted},
                       {"tolerance", c.tolerance}, {"passed", c.passed}});
    summary << (c.passed ? "PASS " : "FAIL ") << c.name << ": measured " << fmt(c.measured) << ", predicted "
            << fmt(c.predicted) << ", tolerance " << fmt(c.tolerance) << "\n";
  }
  manifest["checks"] = jchecks;
  manifest["files"] = res.files;
  res.manifest = manifest.dump(2);
  res.summary = summary.str();

  {
    std::ofstream out(path("config.txt"));
    out << format_config(cfg);
  }
  {
    std::ofstream out(path("manifest.json"));
    out << res.manifest << "\n";
  }
  {
    std::ofstream out(path("summary.txt"));
    out << res.summary;
  }
  return res;
}

}  // namespace echodyn
