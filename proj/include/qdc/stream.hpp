#pragma once
// Event-level Monte Carlo of detection-time streams: polarization-resolved
// XX-X cross-correlation, same-line auto-correlation g2, and pulsed
// Hong-Ou-Mandel interference through the unbalanced Mach-Zehnder.
//
// Every kernel works in fixed 1024-cycle blocks, one RNG substream per
// block, results assembled in block order: output is bit-identical for any
// number of OpenMP workers, and the Serial path is the reference the
// parallel path is tested against.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdc/cascade.hpp"
#include "qdc/histogram.hpp"
#include "qdc/quantum.hpp"

namespace qdc {

struct ExperimentClock {
  double rep_period_ns = 12.5;
  double pulse_pair_sep_ns = 2.0;
  std::uint64_t n_cycles = 0;
  // 2 reproduces the interference drive (two pi pulses per cycle); the
  // correlation and tomography runs of the entanglement analysis use 1,
  // since the pulse doubler belongs to the interference setup only
  int pulses_per_cycle = 2;

  std::vector<std::string> problems(const std::string& prefix = "clock.") const;
  void validate() const;
};

struct DetectorModel {
  double jitter_sigma_ns = 0.2128;  // 500 ps FWHM
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;

  std::vector<std::string> problems(const std::string& prefix = "detector.") const;
  void validate() const;
};

struct BeamSplitterModel {
  double reflectance = 0.52;
  double transmittance = 0.48;
  double mode_overlap = 0.96;  // 1 - epsilon

  std::vector<std::string> problems(
      const std::string& prefix = "beamsplitter.") const;
  void validate() const;
};

enum class Line { XX, X };
const char* line_name(Line l);

// The background knob has two experimental manifestations and the stream
// simulator supports both:
//   PairReplacement - with probability beta the pair's polarization is
//     unpolarized and uncorrelated; the coincidence-level background
//     fraction is exactly beta, matching the density-matrix channel.
//     Used by the correlation/tomography pipelines.
//   PoissonSingles - extra unpolarized photons per pulse per line with a
//     rate chosen so the singles background fraction is beta, which gives
//     the purity signature g2(0) = beta(2-beta). Used by the g2 pipeline.
enum class BackgroundMode { PairReplacement, PoissonSingles };

struct EmissionEvent {
  std::uint64_t cycle_index = 0;
  int pulse_index = 0;
  // emission-frame times: cascade ordering x_time >= xx_time holds exactly;
  // detector jitter is applied to the per-line detection lists instead
  double xx_time_ns = 0.0;
  double x_time_ns = 0.0;
  bool xx_detected = true;
  bool x_detected = true;
  bool xx_passed = true;  // analyzer outcomes, true when no analyzer is set
  bool x_passed = true;
  bool is_background = false;
};

struct Detection {
  double t_ns = 0.0;
  bool passed = true;
  std::uint64_t slot = 0;  // cycle * 2 + pulse index (nearest, for darks)
};

struct Stream {
  std::vector<EmissionEvent> events;
  // detection lists consumed by the correlators: emitted pairs plus
  // background/dark singles, jitter applied, sorted by time
  std::vector<Detection> xx_hits;
  std::vector<Detection> x_hits;

  ExperimentClock clock;
  std::uint64_t seed = 0;
  std::string setting_label;  // empty when no analyzers were configured
};

struct StreamOptions {
  std::optional<MeasurementSetting> analyzers;
  double pulse_area_pi = 1.0;  // preparation via the damped Rabi model
  double rabi_kappa = 0.0;     // kappa = 0 makes the pi pulse exact
  BackgroundMode background_mode = BackgroundMode::PairReplacement;
  Exec exec = Exec::Parallel;
};

Stream simulate_stream(const CascadeParams& params, const ExperimentClock& clock,
                       const DetectorModel& det, const StreamOptions& opts,
                       std::uint64_t seed);

// histogram of pairwise delays between detections of the same line
CoincidenceHistogram g2_auto(const Stream& stream, Line line,
                             const HistSpec& spec, Exec exec = Exec::Parallel);

// g2(0) = central-cluster area over the mean side-cluster area at
// repetition-period offsets (the pulse-pair clusters at +-2 ns are excluded
// from the normalization). Cluster membership is resolved through the
// detections' pulse slots, so neighboring-peak tails cannot leak between
// clusters; this makes the beta = 0 value exactly zero.
double g2_zero(const Stream& stream, Line line, int max_side_clusters = 4);

// histogram of t_X - t_XX for detections passing the configured analyzers;
// the stream must have been generated under the same setting
CoincidenceHistogram cross_correlation(const Stream& stream,
                                       const MeasurementSetting& setting,
                                       const HistSpec& spec,
                                       Exec exec = Exec::Parallel);

struct HomResult {
  CoincidenceHistogram hist;  // D1 x D2 coincidences vs delay
  std::uint64_t interference_pairs = 0;         // photons met at the splitter
  std::uint64_t interference_coincidences = 0;  // of those, split D1/D2
};

// Pulsed two-photon interference of consecutive photons of one line through
// the unbalanced Mach-Zehnder (delay = pulse separation). Always drives the
// two-pulse cycle that defines this experiment. Peak-area model:
// photons meeting at the output splitter coalesce with probability
// 2RT (1-eps)^2 V_in overlap(dt), overlap(dt) = exp(-|dt|/T1_line) for the
// wavepacket-start mismatch (zero for the XX line under two-photon
// excitation, XX-decay jitter for the X line).
HomResult hom_simulate(const CascadeParams& params, const ExperimentClock& clock,
                       const DetectorModel& det, const BeamSplitterModel& bs,
                       double v_in, bool co_polarized, Line line,
                       const HistSpec& spec, std::uint64_t seed,
                       double p_prep = 1.0, Exec exec = Exec::Parallel);

}  // namespace qdc
