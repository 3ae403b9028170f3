#include "qdc/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "qdc/io_util.hpp"

namespace qdc {

namespace {

const std::vector<std::string> kExperiments = {
    "cascade-scan", "tomography", "cross-correlation", "hom",
    "g2",           "rabi",       "fss"};

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse number '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse integer '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  return static_cast<int>(parse_u64(key, v));
}

std::vector<double> parse_grid(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& part : split(v, ',')) {
    const std::string p = trim(part);
    if (p.empty()) continue;
    out.push_back(parse_double(key, p));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<std::string> parse_labels(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& part : split(v, ',')) {
    const std::string p = trim(part);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

void set_key(ExperimentConfig& cfg, const std::string& key,
             const std::string& value) {
  if (key == "experiment") {
    cfg.experiment = value;
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
    cfg.seed_set = true;
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "cascade.fss_ueV") {
    cfg.cascade.fss_ueV = parse_double(key, value);
  } else if (key == "cascade.t1_ps") {
    cfg.cascade.t1_ps = parse_double(key, value);
  } else if (key == "cascade.t1_xx_ps") {
    cfg.cascade.t1_xx_ps = parse_double(key, value);
  } else if (key == "cascade.overhauser_sigma_ueV") {
    cfg.cascade.overhauser_sigma_ueV = parse_double(key, value);
  } else if (key == "cascade.spin_flip_prob") {
    cfg.cascade.spin_flip_prob = parse_double(key, value);
  } else if (key == "cascade.background_fraction") {
    cfg.cascade.background_fraction = parse_double(key, value);
  } else if (key == "clock.rep_period_ns") {
    cfg.clock.rep_period_ns = parse_double(key, value);
  } else if (key == "clock.pulse_pair_sep_ns") {
    cfg.clock.pulse_pair_sep_ns = parse_double(key, value);
  } else if (key == "clock.n_cycles") {
    cfg.clock.n_cycles = parse_u64(key, value);
  } else if (key == "clock.pulses_per_cycle") {
    cfg.clock.pulses_per_cycle = parse_int(key, value);
  } else if (key == "detector.jitter_sigma_ns") {
    cfg.detector.jitter_sigma_ns = parse_double(key, value);
  } else if (key == "detector.efficiency") {
    cfg.detector.efficiency = parse_double(key, value);
  } else if (key == "detector.dark_rate_hz") {
    cfg.detector.dark_rate_hz = parse_double(key, value);
  } else if (key == "beamsplitter.reflectance") {
    cfg.beamsplitter.reflectance = parse_double(key, value);
  } else if (key == "beamsplitter.transmittance") {
    cfg.beamsplitter.transmittance = parse_double(key, value);
  } else if (key == "beamsplitter.mode_overlap") {
    cfg.beamsplitter.mode_overlap = parse_double(key, value);
  } else if (key == "hist.t_min_ns") {
    cfg.hist.t_min_ns = parse_double(key, value);
  } else if (key == "hist.t_max_ns") {
    cfg.hist.t_max_ns = parse_double(key, value);
  } else if (key == "hist.bin_ns") {
    cfg.hist.bin_ns = parse_double(key, value);
  } else if (key == "scan.fss_grid") {
    cfg.scan.fss_grid = parse_grid(key, value);
  } else if (key == "tomography.n_per_setting") {
    cfg.tomography.n_per_setting = parse_double(key, value);
  } else if (key == "crosscorr.settings") {
    cfg.crosscorr.settings = parse_labels(value);
  } else if (key == "crosscorr.window_ns") {
    cfg.crosscorr.window_ns = parse_double(key, value);
  } else if (key == "hom.v_in") {
    cfg.hom.v_in = parse_double(key, value);
  } else if (key == "hom.line") {
    cfg.hom.line = value;
  } else if (key == "hom.p_prep") {
    cfg.hom.p_prep = parse_double(key, value);
  } else if (key == "rabi.kappa") {
    cfg.rabi.kappa = parse_double(key, value);
  } else if (key == "rabi.area_max_pi") {
    cfg.rabi.area_max_pi = parse_double(key, value);
  } else if (key == "rabi.n_points") {
    cfg.rabi.n_points = parse_int(key, value);
  } else if (key == "rabi.n_cycles_per_point") {
    cfg.rabi.n_cycles_per_point = parse_u64(key, value);
  } else if (key == "fss.noise_sigma_ueV") {
    cfg.fss.noise_sigma_ueV = parse_double(key, value);
  } else if (key == "fss.n_angles") {
    cfg.fss.n_angles = parse_int(key, value);
  } else if (key == "fss.phase_deg") {
    cfg.fss.phase_deg = parse_double(key, value);
  } else if (key == "fss.offset_ueV") {
    cfg.fss.offset_ueV = parse_double(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

}  // namespace

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> errs;
  if (experiment.empty()) {
    errs.push_back("experiment is not set");
  } else if (std::find(kExperiments.begin(), kExperiments.end(), experiment) ==
             kExperiments.end()) {
    errs.push_back("unknown experiment '" + experiment + "'");
  }
  if (!seed_set) errs.push_back("seed is mandatory (no wall-clock seeding)");
  if (output_dir.empty()) errs.push_back("output_dir is not set");

  auto add = [&](const std::vector<std::string>& e) {
    errs.insert(errs.end(), e.begin(), e.end());
  };
  add(cascade.problems());
  add(clock.problems());
  add(detector.problems());
  add(beamsplitter.problems());
  add(hist.problems());
  if (clock.n_cycles == 0) errs.push_back("clock.n_cycles must be > 0");

  if (!(tomography.n_per_setting > 0.0))
    errs.push_back("tomography.n_per_setting must be > 0");
  for (const auto& l : crosscorr.settings) {
    try {
      (void)MeasurementSetting::from_label(l);
    } catch (const Error& e) {
      errs.push_back(std::string("crosscorr.settings: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < crosscorr.settings.size(); ++i)
    for (std::size_t j = i + 1; j < crosscorr.settings.size(); ++j)
      if (crosscorr.settings[i] == crosscorr.settings[j]) {
        errs.push_back("crosscorr.settings: duplicate setting '" +
                       crosscorr.settings[i] + "'");
        j = crosscorr.settings.size();
      }
  if (crosscorr.settings.size() % 2 != 0)
    errs.push_back("crosscorr.settings must list co/cross pairs");
  if (!(crosscorr.window_ns > 0.0))
    errs.push_back("crosscorr.window_ns must be > 0");
  if (hom.v_in < 0.0 || hom.v_in > 1.0)
    errs.push_back("hom.v_in must be in [0,1]");
  if (hom.line != "XX" && hom.line != "X")
    errs.push_back("hom.line must be XX or X");
  if (hom.p_prep < 0.0 || hom.p_prep > 1.0)
    errs.push_back("hom.p_prep must be in [0,1]");
  if (rabi.kappa < 0.0) errs.push_back("rabi.kappa must be >= 0");
  if (!(rabi.area_max_pi >= 2.0))
    errs.push_back("rabi.area_max_pi must be >= 2 for an identifiable fit");
  if (rabi.n_points < 8) errs.push_back("rabi.n_points must be >= 8");
  if (rabi.n_cycles_per_point == 0)
    errs.push_back("rabi.n_cycles_per_point must be > 0");
  if (fss.noise_sigma_ueV < 0.0)
    errs.push_back("fss.noise_sigma_ueV must be >= 0");
  if (fss.n_angles < 8) errs.push_back("fss.n_angles must be >= 8");
  return errs;
}

void ExperimentConfig::validate() const {
  const auto errs = problems();
  if (!errs.empty()) throw ConfigError(errs.front());
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    try {
      set_key(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  return parse_config_text(read_file(path));
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "': expected key=value");
  set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::vector<std::pair<std::string, std::string>> config_snapshot(
    const ExperimentConfig& cfg) {
  // output_dir is deliberately not part of the snapshot: the manifest
  // describes the run's content, which must not depend on where it landed
  std::map<std::string, std::string> kv;
  kv["experiment"] = cfg.experiment;
  kv["seed"] = std::to_string(cfg.seed);
  kv["cascade.fss_ueV"] = fmt_g17(cfg.cascade.fss_ueV);
  kv["cascade.t1_ps"] = fmt_g17(cfg.cascade.t1_ps);
  kv["cascade.t1_xx_ps"] = fmt_g17(cfg.cascade.t1_xx_ps);
  kv["cascade.overhauser_sigma_ueV"] = fmt_g17(cfg.cascade.overhauser_sigma_ueV);
  kv["cascade.spin_flip_prob"] = fmt_g17(cfg.cascade.spin_flip_prob);
  kv["cascade.background_fraction"] = fmt_g17(cfg.cascade.background_fraction);
  kv["clock.rep_period_ns"] = fmt_g17(cfg.clock.rep_period_ns);
  kv["clock.pulse_pair_sep_ns"] = fmt_g17(cfg.clock.pulse_pair_sep_ns);
  kv["clock.n_cycles"] = std::to_string(cfg.clock.n_cycles);
  kv["clock.pulses_per_cycle"] = std::to_string(cfg.clock.pulses_per_cycle);
  kv["detector.jitter_sigma_ns"] = fmt_g17(cfg.detector.jitter_sigma_ns);
  kv["detector.efficiency"] = fmt_g17(cfg.detector.efficiency);
  kv["detector.dark_rate_hz"] = fmt_g17(cfg.detector.dark_rate_hz);
  kv["beamsplitter.reflectance"] = fmt_g17(cfg.beamsplitter.reflectance);
  kv["beamsplitter.transmittance"] = fmt_g17(cfg.beamsplitter.transmittance);
  kv["beamsplitter.mode_overlap"] = fmt_g17(cfg.beamsplitter.mode_overlap);
  kv["hist.t_min_ns"] = fmt_g17(cfg.hist.t_min_ns);
  kv["hist.t_max_ns"] = fmt_g17(cfg.hist.t_max_ns);
  kv["hist.bin_ns"] = fmt_g17(cfg.hist.bin_ns);
  {
    std::string grid;
    for (std::size_t i = 0; i < cfg.scan.fss_grid.size(); ++i) {
      if (i) grid += ',';
      grid += fmt_g17(cfg.scan.fss_grid[i]);
    }
    kv["scan.fss_grid"] = grid;
  }
  kv["tomography.n_per_setting"] = fmt_g17(cfg.tomography.n_per_setting);
  {
    std::string labels;
    for (std::size_t i = 0; i < cfg.crosscorr.settings.size(); ++i) {
      if (i) labels += ',';
      labels += cfg.crosscorr.settings[i];
    }
    kv["crosscorr.settings"] = labels;
  }
  kv["crosscorr.window_ns"] = fmt_g17(cfg.crosscorr.window_ns);
  kv["hom.v_in"] = fmt_g17(cfg.hom.v_in);
  kv["hom.line"] = cfg.hom.line;
  kv["hom.p_prep"] = fmt_g17(cfg.hom.p_prep);
  kv["rabi.kappa"] = fmt_g17(cfg.rabi.kappa);
  kv["rabi.area_max_pi"] = fmt_g17(cfg.rabi.area_max_pi);
  kv["rabi.n_points"] = std::to_string(cfg.rabi.n_points);
  kv["rabi.n_cycles_per_point"] = std::to_string(cfg.rabi.n_cycles_per_point);
  kv["fss.noise_sigma_ueV"] = fmt_g17(cfg.fss.noise_sigma_ueV);
  kv["fss.n_angles"] = std::to_string(cfg.fss.n_angles);
  kv["fss.phase_deg"] = fmt_g17(cfg.fss.phase_deg);
  kv["fss.offset_ueV"] = fmt_g17(cfg.fss.offset_ueV);
  return {kv.begin(), kv.end()};
}

}  // namespace qdc
