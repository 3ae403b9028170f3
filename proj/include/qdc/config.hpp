#pragma once
// Configuration-driven experiment runner: flat key-value text with dotted
// section prefixes, e.g.
//
//   experiment = tomography
//   seed = 42
//   output_dir = out/qd2
//   cascade.fss_ueV = 1.3
//   tomography.n_per_setting = 100000
//
// '#' starts a comment. Overrides of the form key=value are applied after
// the file parse. The seed is mandatory; nothing is ever seeded from the
// wall clock.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qdc/cascade.hpp"
#include "qdc/histogram.hpp"
#include "qdc/stream.hpp"

namespace qdc {

struct ScanConfig {
  std::vector<double> fss_grid = {0.0, 1.2, 6.5};
};

struct TomographyConfig {
  double n_per_setting = 100000;
};

struct CrossCorrConfig {
  // co/cross pairs per basis, in order
  std::vector<std::string> settings = {"HH", "HV", "DD", "DA", "RR", "RL"};
  double window_ns = 1.0;
};

struct HomRunConfig {
  double v_in = 0.93;
  std::string line = "XX";
  double p_prep = 1.0;
};

struct RabiConfig {
  double kappa = 0.1 / kPi;
  double area_max_pi = 4.0;
  int n_points = 17;
  std::uint64_t n_cycles_per_point = 20000;
};

struct FssRunConfig {
  double noise_sigma_ueV = 0.5;
  int n_angles = 19;
  double phase_deg = 0.0;
  double offset_ueV = 0.0;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string output_dir;

  CascadeParams cascade;
  ExperimentClock clock{12.5, 2.0, 100000};
  DetectorModel detector;
  BeamSplitterModel beamsplitter;
  HistSpec hist;

  ScanConfig scan;
  TomographyConfig tomography;
  CrossCorrConfig crosscorr;
  HomRunConfig hom;
  RabiConfig rabi;
  FssRunConfig fss;

  // full invariant check of every sub-config; returns one message per
  // problem, empty when the configuration is runnable
  std::vector<std::string> problems() const;
  void validate() const;  // throws ConfigError with the first problem
};

// parse errors carry the line number
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// key=value overrides, applied in order
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// normalized snapshot of every key, sorted; embedded in the run manifest
std::vector<std::pair<std::string, std::string>> config_snapshot(
    const ExperimentConfig& cfg);

}  // namespace qdc
