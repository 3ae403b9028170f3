#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qdc/cascade.hpp"
#include "qdc/fitting.hpp"
#include "qdc/metrics.hpp"
#include "qdc/stream.hpp"

using namespace qdc;

TEST_SUITE_BEGIN("stream");

namespace {

CascadeParams clean_params(double fss = 0.0) {
  CascadeParams p;
  p.fss_ueV = fss;
  p.t1_ps = 250.0;
  return p;
}

ExperimentClock clock_of(std::uint64_t n) { return {12.5, 2.0, n, 2}; }

// single-pulse drive used by the correlation experiments
ExperimentClock corr_clock(std::uint64_t n) { return {12.5, 2.0, n, 1}; }

}  // namespace

TEST_CASE("stream: ideal source emits exactly two pairs per cycle") {
  const Stream s = simulate_stream(clean_params(), clock_of(10000),
                                   DetectorModel{}, StreamOptions{}, 1);
  CHECK(s.events.size() == 20000);
  CHECK(s.xx_hits.size() == 20000);
  CHECK(s.x_hits.size() == 20000);
  for (std::size_t i = 0; i < 200; ++i)
    CHECK(s.events[i].x_time_ns >= s.events[i].xx_time_ns);
}

TEST_CASE("stream: mean X delay equals T1") {
  const Stream s = simulate_stream(clean_params(), clock_of(50000),
                                   DetectorModel{}, StreamOptions{}, 2);
  double sum = 0.0;
  for (const auto& e : s.events) sum += e.x_time_ns - e.xx_time_ns;
  const double mean_ns = sum / static_cast<double>(s.events.size());
  const double se = 0.25 / std::sqrt(static_cast<double>(s.events.size()));
  CHECK(std::abs(mean_ns - 0.25) < 3.0 * se);
}

TEST_CASE("stream: pulse area 2 pi prepares at the damped-Rabi minimum") {
  StreamOptions opts;
  opts.pulse_area_pi = 2.0;
  opts.rabi_kappa = 0.1 / kPi;
  const Stream s = simulate_stream(clean_params(), clock_of(50000),
                                   DetectorModel{}, opts, 3);
  const double p_hat =
      static_cast<double>(s.events.size()) / (2.0 * 50000.0);
  const double p_model = rabi_population(2.0, 0.1 / kPi);
  const double se = std::sqrt(p_model * (1.0 - p_model) / 1e5);
  CHECK(std::abs(p_hat - p_model) < 3.0 * se);
}

TEST_CASE("stream: deterministic per seed and identical across exec modes") {
  StreamOptions par;
  par.analyzers = MeasurementSetting::from_label("DD");
  StreamOptions ser = par;
  ser.exec = Exec::Serial;
  CascadeParams p = clean_params(1.2);
  p.overhauser_sigma_ueV = 0.5;
  p.background_fraction = 0.05;
  p.spin_flip_prob = 0.02;

  const Stream a = simulate_stream(p, clock_of(5000), DetectorModel{}, par, 9);
  const Stream b = simulate_stream(p, clock_of(5000), DetectorModel{}, par, 9);
  const Stream c = simulate_stream(p, clock_of(5000), DetectorModel{}, ser, 9);
  REQUIRE(a.xx_hits.size() == b.xx_hits.size());
  REQUIRE(a.xx_hits.size() == c.xx_hits.size());
  for (std::size_t i = 0; i < a.xx_hits.size(); ++i) {
    CHECK(a.xx_hits[i].t_ns == b.xx_hits[i].t_ns);
    CHECK(a.xx_hits[i].t_ns == c.xx_hits[i].t_ns);
    CHECK(a.xx_hits[i].passed == c.xx_hits[i].passed);
  }
  // a different seed produces a different stream
  const Stream d = simulate_stream(p, clock_of(5000), DetectorModel{}, par, 10);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.xx_hits.size() && i < d.xx_hits.size(); ++i)
    if (a.xx_hits[i].t_ns != d.xx_hits[i].t_ns) {
      any_diff = true;
      break;
    }
  CHECK(any_diff);
}

TEST_CASE("g2: clean source has an exactly empty central cluster") {
  StreamOptions opts;
  opts.background_mode = BackgroundMode::PoissonSingles;
  const Stream s = simulate_stream(clean_params(), clock_of(20000),
                                   DetectorModel{}, opts, 4);
  for (Line line : {Line::XX, Line::X}) {
    CHECK(g2_zero(s, line) == 0.0);
    // the time histogram still shows the pulse-pair structure
    const CoincidenceHistogram h = g2_auto(s, line, HistSpec{});
    CHECK(h.total() > 0);
    CHECK(h.area(1.5, 2.5) > 0.0);
  }
}

TEST_CASE("g2: background fraction 0.1 lands on the analytic oracle") {
  CascadeParams p = clean_params();
  p.background_fraction = 0.1;
  StreamOptions opts;
  opts.background_mode = BackgroundMode::PoissonSingles;
  const Stream s = simulate_stream(p, clock_of(200000), DetectorModel{}, opts, 5);
  const double beta = 0.1;
  const double oracle_g2 = beta * (2.0 - beta);
  for (Line line : {Line::XX, Line::X}) {
    const double g = g2_zero(s, line);
    CHECK(std::abs(g - oracle_g2) < 0.01);
  }
}

TEST_CASE("g2: source-grade purity from a 0.002 background") {
  CascadeParams p = clean_params();
  p.background_fraction = 0.002;
  StreamOptions opts;
  opts.background_mode = BackgroundMode::PoissonSingles;
  const Stream s = simulate_stream(p, clock_of(200000), DetectorModel{}, opts, 6);
  for (Line line : {Line::XX, Line::X}) {
    CHECK(g2_zero(s, line) <= 0.007);
  }
}

TEST_CASE("g2: empty stream is an error") {
  Stream s;
  s.clock = clock_of(1);
  CHECK_THROWS_AS(g2_auto(s, Line::X, HistSpec{}), Error);
  CHECK_THROWS_AS(g2_zero(s, Line::X), Error);
}

TEST_CASE("cross-correlation: Bell-state correlations are exact in-window") {
  StreamOptions opts;
  for (const char* label : {"HV", "RR"}) {
    opts.analyzers = MeasurementSetting::from_label(label);
    const Stream s = simulate_stream(clean_params(), corr_clock(20000),
                                     DetectorModel{}, opts, 7);
    const CoincidenceHistogram h =
        cross_correlation(s, *opts.analyzers, HistSpec{});
    CHECK(h.area(-1.0, 1.0) == 0.0);  // perfect antibunching
  }
  // the co-linear channel is bright by contrast
  opts.analyzers = MeasurementSetting::from_label("HH");
  const Stream s = simulate_stream(clean_params(), corr_clock(20000),
                                   DetectorModel{}, opts, 7);
  const CoincidenceHistogram h =
      cross_correlation(s, *opts.analyzers, HistSpec{});
  CHECK(h.area(-1.0, 1.0) > 8000.0);

  // circular-basis visibility of the Bell state is exactly -1: the
  // co-circular channel is empty while RL is bright
  opts.analyzers = MeasurementSetting::from_label("RR");
  const Stream s_rr = simulate_stream(clean_params(), corr_clock(20000),
                                      DetectorModel{}, opts, 7);
  const CoincidenceHistogram h_rr =
      cross_correlation(s_rr, *opts.analyzers, HistSpec{});
  opts.analyzers = MeasurementSetting::from_label("RL");
  const Stream s_rl = simulate_stream(clean_params(), corr_clock(20000),
                                      DetectorModel{}, opts, 8);
  const CoincidenceHistogram h_rl =
      cross_correlation(s_rl, *opts.analyzers, HistSpec{});
  CHECK(visibility_from_histograms(h_rr, h_rl) == -1.0);
}

TEST_CASE("cross-correlation: DD/DA visibility matches the model") {
  // single-pulse drive and a wide window (20 lifetimes) so the time
  // integration is not truncated and the model visibility applies exactly
  const CascadeParams p = clean_params(1.2);
  StreamOptions opts;
  auto central = [&](const char* label, std::uint64_t seed) {
    opts.analyzers = MeasurementSetting::from_label(label);
    const Stream s =
        simulate_stream(p, corr_clock(30000), DetectorModel{}, opts, seed);
    return cross_correlation(s, *opts.analyzers, HistSpec{}).area(-5.0, 5.0);
  };
  const double a_dd = central("DD", 21);
  const double a_da = central("DA", 22);
  const double c_meas = (a_dd - a_da) / (a_dd + a_da);
  const double x = precession_x(1.2, 250.0);
  const double c_pred = 1.0 / (1.0 + x * x);
  CHECK(std::abs(c_meas - c_pred) < 3.0 * oracle::visibility_sigma(a_dd, a_da));
}

TEST_CASE("cross-correlation: six canonical settings reproduce the triple") {
  CascadeParams p = clean_params(1.2);
  p.spin_flip_prob = 0.03;
  p.background_fraction = 0.05;  // PairReplacement matches the channel exactly
  const VisibilityTriple pred = predicted_visibilities(time_integrated_dm(p));

  StreamOptions opts;
  auto central = [&](const char* label, std::uint64_t seed) {
    opts.analyzers = MeasurementSetting::from_label(label);
    const Stream s =
        simulate_stream(p, corr_clock(30000), DetectorModel{}, opts, seed);
    return cross_correlation(s, *opts.analyzers, HistSpec{}).area(-5.0, 5.0);
  };
  const double hh = central("HH", 31), hv = central("HV", 32);
  const double dd = central("DD", 33), da = central("DA", 34);
  const double rr = central("RR", 35), rl = central("RL", 36);

  CHECK(std::abs((hh - hv) / (hh + hv) - pred.c_linear) <
        3.0 * oracle::visibility_sigma(hh, hv));
  CHECK(std::abs((dd - da) / (dd + da) - pred.c_diagonal) <
        3.0 * oracle::visibility_sigma(dd, da));
  CHECK(std::abs((rr - rl) / (rr + rl) - pred.c_circular) <
        3.0 * oracle::visibility_sigma(rr, rl));
}

TEST_CASE("cross-correlation: event-level Overhauser sampling matches the channel") {
  // nuclear-field spread comparable to the splitting; wide window so the
  // closed-form (decay-integrated, Gaussian-averaged) visibility applies
  CascadeParams p = clean_params(0.5);
  p.overhauser_sigma_ueV = 1.0;
  const VisibilityTriple pred = predicted_visibilities(time_integrated_dm(p));

  StreamOptions opts;
  auto central = [&](const char* label, std::uint64_t seed) {
    opts.analyzers = MeasurementSetting::from_label(label);
    const Stream s =
        simulate_stream(p, corr_clock(30000), DetectorModel{}, opts, seed);
    return cross_correlation(s, *opts.analyzers, HistSpec{}).area(-5.0, 5.0);
  };
  const double dd = central("DD", 61), da = central("DA", 62);
  const double rr = central("RR", 63), rl = central("RL", 64);
  CHECK(std::abs((dd - da) / (dd + da) - pred.c_diagonal) <
        3.0 * oracle::visibility_sigma(dd, da));
  CHECK(std::abs((rr - rl) / (rr + rl) - pred.c_circular) <
        3.0 * oracle::visibility_sigma(rr, rl));
}

TEST_CASE("cross-correlation: stream and setting must match") {
  StreamOptions opts;
  opts.analyzers = MeasurementSetting::from_label("HH");
  const Stream s = simulate_stream(clean_params(), clock_of(100),
                                   DetectorModel{}, opts, 1);
  CHECK_THROWS_AS(
      cross_correlation(s, MeasurementSetting::from_label("DD"), HistSpec{}),
      Error);
}

TEST_CASE("histograms: counts conserved and byte-identical across reruns") {
  StreamOptions opts;
  opts.analyzers = MeasurementSetting::from_label("DD");
  const CascadeParams p = clean_params(1.2);
  const Stream s1 = simulate_stream(p, clock_of(4000), DetectorModel{}, opts, 8);
  StreamOptions ser = opts;
  ser.exec = Exec::Serial;
  const Stream s2 = simulate_stream(p, clock_of(4000), DetectorModel{}, ser, 8);

  const CoincidenceHistogram h1 =
      cross_correlation(s1, *opts.analyzers, HistSpec{}, Exec::Parallel);
  const CoincidenceHistogram h2 =
      cross_correlation(s2, *opts.analyzers, HistSpec{}, Exec::Serial);
  CHECK(h1.counts == h2.counts);
  CHECK(histogram_to_csv(h1) == histogram_to_csv(h2));
  CHECK(h1.total() == h2.total());
}

TEST_CASE("hom: cross-polarized central peaks are equal, co-polarized ideal is empty") {
  const CascadeParams p = clean_params();
  DetectorModel det;
  det.jitter_sigma_ns = 0.0;  // keep the window areas clean for this check
  BeamSplitterModel measured_bs;

  const HomResult cross = hom_simulate(p, clock_of(200000), det, measured_bs, 0.93,
                                       false, Line::XX, HistSpec{}, 41);
  const double a_m2 = cross.hist.area(-3.0, -1.0);
  const double a_0 = cross.hist.area(-1.0, 1.0);
  const double a_p2 = cross.hist.area(1.0, 3.0);
  for (double pair : {a_0 / a_m2, a_0 / a_p2, a_m2 / a_p2}) {
    const double sigma = std::sqrt(1.0 / a_0 + 1.0 / a_m2);
    CHECK(std::abs(pair - 1.0) < 3.0 * sigma + 0.004);
  }

  // V_in = 1 through an ideal splitter: the interfering pairs never split,
  // so the zero-delay peak is empty up to tails of the +-2 ns neighbors
  BeamSplitterModel ideal{0.5, 0.5, 1.0};
  const HomResult co = hom_simulate(p, clock_of(50000), det, ideal, 1.0, true,
                                    Line::XX, HistSpec{}, 42);
  CHECK(co.interference_pairs > 10000);
  CHECK(co.interference_coincidences == 0);
  CHECK(co.hist.area(-0.9, 0.9) < 1e-3 * co.hist.area(1.0, 3.0));
}

TEST_CASE("hom: corrected visibility recovers the configured V_in") {
  const CascadeParams p = clean_params();
  const BeamSplitterModel bs;  // measured splitter: 0.52/0.48, overlap 0.96
  const std::vector<double> centers = {-4.0, -2.0, 0.0, 2.0, 4.0};
  for (double v_in : {0.93, 0.86}) {
    const HomResult co = hom_simulate(p, clock_of(200000), DetectorModel{}, bs,
                                      v_in, true, Line::XX, HistSpec{}, 43);
    const HomResult cross = hom_simulate(p, clock_of(200000), DetectorModel{},
                                         bs, v_in, false, Line::XX, HistSpec{},
                                         44);
    const LorentzianFit fit_co = fit_peaks_individually(co.hist, centers);
    const LorentzianFit fit_cross = fit_peaks_individually(cross.hist, centers);
    const HomVisibility v =
        hom_visibility(fit_co.peaks, fit_cross.peaks, bs.reflectance,
                       bs.transmittance, bs.mode_overlap);
    CHECK(std::abs(v.v_corrected - v_in) < 0.03);
  }
}

TEST_CASE("hom: X-line wavepacket jitter lowers the raw visibility") {
  const CascadeParams p = clean_params();
  const BeamSplitterModel ideal{0.5, 0.5, 1.0};
  const HomResult xx = hom_simulate(p, clock_of(60000), DetectorModel{}, ideal,
                                    1.0, true, Line::XX, HistSpec{}, 45);
  const HomResult x = hom_simulate(p, clock_of(60000), DetectorModel{}, ideal,
                                   1.0, true, Line::X, HistSpec{}, 46);
  // XX photons interfere perfectly; X photons lose coalescence through the
  // XX-decay start-time jitter
  CHECK(xx.interference_coincidences == 0);
  CHECK(x.interference_coincidences > 0);
}

TEST_CASE("stream: efficiency thins detections, dark counts add them") {
  DetectorModel det;
  det.efficiency = 0.5;
  const Stream s = simulate_stream(clean_params(), clock_of(20000), det,
                                   StreamOptions{}, 12);
  CHECK(s.events.size() == 40000);  // emission is unaffected
  const double n = static_cast<double>(s.xx_hits.size());
  CHECK(std::abs(n - 20000.0) < 3.0 * std::sqrt(40000.0 * 0.25));

  DetectorModel dark;
  dark.dark_rate_hz = 4e6;  // 0.05 expected per cycle per line
  const Stream sd = simulate_stream(clean_params(), clock_of(20000), dark,
                                    StreamOptions{}, 13);
  const double extra = static_cast<double>(sd.x_hits.size()) - 40000.0;
  const double mean_darks = 4e6 * 12.5e-9 * 20000.0;
  CHECK(std::abs(extra - mean_darks) < 3.0 * std::sqrt(mean_darks));
}

TEST_CASE("cross-correlation: histogram equals the brute-force pair count") {
  StreamOptions opts;
  opts.analyzers = MeasurementSetting::from_label("DD");
  const Stream s = simulate_stream(clean_params(1.2), corr_clock(300),
                                   DetectorModel{}, opts, 14);
  const HistSpec spec{-30.0, 30.0, 0.05};
  const CoincidenceHistogram h = cross_correlation(s, *opts.analyzers, spec);
  std::uint64_t brute = 0;
  for (const auto& xx : s.xx_hits)
    for (const auto& x : s.x_hits) {
      if (!xx.passed || !x.passed) continue;
      const double dt = x.t_ns - xx.t_ns;
      if (dt >= -30.0 && dt < 30.0) ++brute;
    }
  CHECK(h.total() == brute);
}

TEST_CASE("hom: co-polarized center/side ratio decreases with V_in") {
  const CascadeParams p = clean_params();
  double previous = 2.0;
  for (double v_in : {0.3, 0.6, 0.9}) {
    const HomResult r = hom_simulate(p, clock_of(60000), DetectorModel{},
                                     BeamSplitterModel{}, v_in, true, Line::XX,
                                     HistSpec{}, 48);
    const double ratio = r.hist.area(-1.0, 1.0) /
                         (0.5 * (r.hist.area(-3.0, -1.0) + r.hist.area(1.0, 3.0)));
    CHECK(ratio < previous);
    previous = ratio;
  }
}

TEST_CASE("hom: identical output for both exec modes") {
  const CascadeParams p = clean_params();
  const HomResult a =
      hom_simulate(p, clock_of(20000), DetectorModel{}, BeamSplitterModel{},
                   0.9, true, Line::XX, HistSpec{}, 47, 1.0, Exec::Parallel);
  const HomResult b =
      hom_simulate(p, clock_of(20000), DetectorModel{}, BeamSplitterModel{},
                   0.9, true, Line::XX, HistSpec{}, 47, 1.0, Exec::Serial);
  CHECK(a.hist.counts == b.hist.counts);
  CHECK(a.interference_pairs == b.interference_pairs);
  CHECK(a.interference_coincidences == b.interference_coincidences);
}

TEST_SUITE_END();
