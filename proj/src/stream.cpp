#include "qdc/stream.hpp"

#include <algorithm>
#include <cmath>

#include "qdc/fitting.hpp"
#include "qdc/rng.hpp"

namespace qdc {

namespace {
constexpr std::uint64_t kCycleBlock = 1024;
}

std::vector<std::string> ExperimentClock::problems(const std::string& prefix) const {
  std::vector<std::string> errs;
  if (!(pulse_pair_sep_ns > 0.0))
    errs.push_back(prefix + "pulse_pair_sep_ns must be > 0");
  if (!(rep_period_ns > pulse_pair_sep_ns))
    errs.push_back(prefix + "rep_period_ns must exceed pulse_pair_sep_ns");
  if (pulses_per_cycle != 1 && pulses_per_cycle != 2)
    errs.push_back(prefix + "pulses_per_cycle must be 1 or 2");
  return errs;
}

void ExperimentClock::validate() const {
  const auto errs = problems();
  if (!errs.empty()) throw ConfigError(errs.front());
}

std::vector<std::string> DetectorModel::problems(const std::string& prefix) const {
  std::vector<std::string> errs;
  if (jitter_sigma_ns < 0.0) errs.push_back(prefix + "jitter_sigma_ns must be >= 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    errs.push_back(prefix + "efficiency must be in (0,1]");
  if (dark_rate_hz < 0.0) errs.push_back(prefix + "dark_rate_hz must be >= 0");
  return errs;
}

void DetectorModel::validate() const {
  const auto errs = problems();
  if (!errs.empty()) throw ConfigError(errs.front());
}

std::vector<std::string> BeamSplitterModel::problems(
    const std::string& prefix) const {
  std::vector<std::string> errs;
  if (std::abs(reflectance + transmittance - 1.0) > 1e-9)
    errs.push_back(prefix + "reflectance + transmittance must equal 1");
  if (reflectance < 0.0 || transmittance < 0.0)
    errs.push_back(prefix + "coefficients must be >= 0");
  if (mode_overlap < 0.0 || mode_overlap > 1.0)
    errs.push_back(prefix + "mode_overlap must be in [0,1]");
  return errs;
}

void BeamSplitterModel::validate() const {
  const auto errs = problems();
  if (!errs.empty()) throw ConfigError(errs.front());
}

const char* line_name(Line l) { return l == Line::XX ? "XX" : "X"; }

// -----------------------------------------------------------------------
// stream generation
// -----------------------------------------------------------------------

namespace {

// 2x2 amplitude matrix of the event's pure two-photon state
struct EventState {
  cplx a[2][2];  // [xx polarization][x polarization] in the (H, V) basis
};

EventState make_event_state(double phase, bool x_flipped) {
  const double inv = 1.0 / std::sqrt(2.0);
  EventState s{};
  const int j0 = x_flipped ? 1 : 0;
  s.a[0][j0] = inv;
  s.a[1][1 - j0] = inv * std::exp(cplx(0.0, phase));
  return s;
}

// joint analyzer outcome probabilities for projectors |a>, |b>
void joint_probabilities(const EventState& st, const Ket2& a, const Ket2& b,
                         double& p11, double& p1x, double& px1) {
  cplx amp = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      amp += std::conj(a.a[i]) * std::conj(b.a[j]) * st.a[i][j];
  p11 = std::norm(amp);
  double pa = 0.0;
  for (int j = 0; j < 2; ++j) {
    cplx c = 0.0;
    for (int i = 0; i < 2; ++i) c += std::conj(a.a[i]) * st.a[i][j];
    pa += std::norm(c);
  }
  double pb = 0.0;
  for (int i = 0; i < 2; ++i) {
    cplx c = 0.0;
    for (int j = 0; j < 2; ++j) c += std::conj(b.a[j]) * st.a[i][j];
    pb += std::norm(c);
  }
  p1x = std::max(0.0, pa - p11);  // XX passes, X blocked
  px1 = std::max(0.0, pb - p11);  // XX blocked, X passes
}

struct BlockOut {
  std::vector<EmissionEvent> events;
  std::vector<Detection> xx_hits;
  std::vector<Detection> x_hits;
};

}  // namespace

Stream simulate_stream(const CascadeParams& params, const ExperimentClock& clock,
                       const DetectorModel& det, const StreamOptions& opts,
                       std::uint64_t seed) {
  params.validate();
  clock.validate();
  det.validate();
  if (clock.n_cycles == 0) throw Error("simulate_stream: n_cycles must be > 0");
  if (opts.pulse_area_pi < 0.0)
    throw Error("simulate_stream: pulse_area_pi must be >= 0");

  const double t1_ns = params.t1_ps * 1e-3;
  const double t1xx_ns = params.t1_xx_resolved() * 1e-3;
  const double p_prep = (opts.pulse_area_pi == 1.0 && opts.rabi_kappa == 0.0)
                            ? 1.0
                            : rabi_population(opts.pulse_area_pi, opts.rabi_kappa);
  const double beta = params.background_fraction;
  const bool poisson_bg =
      opts.background_mode == BackgroundMode::PoissonSingles && beta > 0.0;
  const double lambda_bg = poisson_bg ? beta * p_prep / (1.0 - beta) : 0.0;
  const bool pair_bg =
      opts.background_mode == BackgroundMode::PairReplacement && beta > 0.0;
  const double dark_per_cycle = det.dark_rate_hz * clock.rep_period_ns * 1e-9;

  const std::uint64_t n_blocks = (clock.n_cycles + kCycleBlock - 1) / kCycleBlock;
  std::vector<BlockOut> blocks(n_blocks);

  auto run_block = [&](std::uint64_t b) {
    Rng rng(seed, stream_id::kPhotonStream, b);
    BlockOut& out = blocks[b];
    const std::uint64_t lo = b * kCycleBlock;
    const std::uint64_t hi = std::min(clock.n_cycles, lo + kCycleBlock);
    for (std::uint64_t c = lo; c < hi; ++c) {
      const double cycle_t = static_cast<double>(c) * clock.rep_period_ns;
      for (int q = 0; q < clock.pulses_per_cycle; ++q) {
        const double pulse_t = cycle_t + q * clock.pulse_pair_sep_ns;
        const std::uint64_t slot = 2 * c + static_cast<std::uint64_t>(q);
        if (!(rng.u01() < p_prep)) continue;

        const double s_eff =
            params.overhauser_sigma_ueV > 0.0
                ? params.fss_ueV + params.overhauser_sigma_ueV * rng.normal()
                : params.fss_ueV;
        const bool is_bg = pair_bg && rng.bernoulli(beta);
        const double xx_delay = rng.exponential(t1xx_ns);
        const double x_delay = rng.exponential(t1_ns);
        const bool flipped =
            params.spin_flip_prob > 0.0 &&
            rng.bernoulli(0.5 * params.spin_flip_prob);

        EmissionEvent ev;
        ev.cycle_index = c;
        ev.pulse_index = q;
        ev.xx_time_ns = pulse_t + xx_delay;
        ev.x_time_ns = ev.xx_time_ns + x_delay;
        ev.is_background = is_bg;

        if (opts.analyzers) {
          if (is_bg) {
            ev.xx_passed = rng.bernoulli(0.5);
            ev.x_passed = rng.bernoulli(0.5);
          } else {
            // phase accumulated while the X state precesses
            const double phase = s_eff * (x_delay * 1e3) / kHbarUevPs;
            const EventState st = make_event_state(phase, flipped);
            double p11, p1x, px1;
            joint_probabilities(st, opts.analyzers->xx.direction,
                                opts.analyzers->x.direction, p11, p1x, px1);
            const double u = rng.u01();
            ev.xx_passed = u < p11 + p1x;
            ev.x_passed = u < p11 || (u >= p11 + p1x && u < p11 + p1x + px1);
          }
        }

        double jit_xx = 0.0, jit_x = 0.0;
        if (det.jitter_sigma_ns > 0.0) {
          jit_xx = det.jitter_sigma_ns * rng.normal();
          jit_x = det.jitter_sigma_ns * rng.normal();
        }
        if (det.efficiency < 1.0) {
          ev.xx_detected = rng.bernoulli(det.efficiency);
          ev.x_detected = rng.bernoulli(det.efficiency);
        }
        if (ev.xx_detected)
          out.xx_hits.push_back({ev.xx_time_ns + jit_xx, ev.xx_passed, slot});
        if (ev.x_detected)
          out.x_hits.push_back({ev.x_time_ns + jit_x, ev.x_passed, slot});
        out.events.push_back(ev);

        // unpolarized background singles sharing the line's time profile
        if (poisson_bg) {
          for (int line = 0; line < 2; ++line) {
            const std::uint64_t k = rng.poisson(lambda_bg);
            for (std::uint64_t n = 0; n < k; ++n) {
              double t = pulse_t + rng.exponential(t1xx_ns);
              if (line == 1) t += rng.exponential(t1_ns);
              if (det.jitter_sigma_ns > 0.0)
                t += det.jitter_sigma_ns * rng.normal();
              const bool pass = opts.analyzers ? rng.bernoulli(0.5) : true;
              if (det.efficiency < 1.0 && !rng.bernoulli(det.efficiency))
                continue;
              (line == 0 ? out.xx_hits : out.x_hits).push_back({t, pass, slot});
            }
          }
        }
      }
      if (dark_per_cycle > 0.0) {
        for (int line = 0; line < 2; ++line) {
          const std::uint64_t k = rng.poisson(dark_per_cycle);
          for (std::uint64_t n = 0; n < k; ++n) {
            const double t_in = rng.uniform(0.0, clock.rep_period_ns);
            const bool pass = opts.analyzers ? rng.bernoulli(0.5) : true;
            // attribute the dark count to the nearest pulse slot
            std::uint64_t slot = 2 * c;
            if (clock.pulses_per_cycle == 2 &&
                t_in > 0.5 * clock.pulse_pair_sep_ns &&
                t_in < 0.5 * (clock.pulse_pair_sep_ns + clock.rep_period_ns))
              slot = 2 * c + 1;
            (line == 0 ? out.xx_hits : out.x_hits)
                .push_back({cycle_t + t_in, pass, slot});
          }
        }
      }
    }
  };

  if (opts.exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(n_blocks); ++b)
      run_block(static_cast<std::uint64_t>(b));
  } else {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  }

  Stream s;
  s.clock = clock;
  s.seed = seed;
  if (opts.analyzers) s.setting_label = opts.analyzers->label;
  std::size_t ne = 0, nxx = 0, nx = 0;
  for (const auto& blk : blocks) {
    ne += blk.events.size();
    nxx += blk.xx_hits.size();
    nx += blk.x_hits.size();
  }
  s.events.reserve(ne);
  s.xx_hits.reserve(nxx);
  s.x_hits.reserve(nx);
  for (const auto& blk : blocks) {
    s.events.insert(s.events.end(), blk.events.begin(), blk.events.end());
    s.xx_hits.insert(s.xx_hits.end(), blk.xx_hits.begin(), blk.xx_hits.end());
    s.x_hits.insert(s.x_hits.end(), blk.x_hits.begin(), blk.x_hits.end());
  }
  auto by_time = [](const Detection& a, const Detection& b) {
    return a.t_ns < b.t_ns;
  };
  std::stable_sort(s.xx_hits.begin(), s.xx_hits.end(), by_time);
  std::stable_sort(s.x_hits.begin(), s.x_hits.end(), by_time);
  return s;
}

// -----------------------------------------------------------------------
// pair binning
// -----------------------------------------------------------------------

namespace {

// fills t_b - t_a for all cross pairs within the histogram range;
// integer accumulation commutes, so the merge order cannot matter
void bin_cross_pairs(const std::vector<double>& a, const std::vector<double>& b,
                     CoincidenceHistogram& h, Exec exec) {
  if (a.empty() || b.empty()) return;
  const double lo = h.bin_edges_ns.front();
  const double hi = h.bin_edges_ns.back();
  const std::size_t n = a.size();
  const int n_bins = static_cast<int>(h.counts.size());
  const double bin_w = (hi - lo) / n_bins;

  auto worker = [&](std::size_t i_lo, std::size_t i_hi,
                    std::vector<std::uint64_t>& local) {
    std::size_t j0 = std::lower_bound(b.begin(), b.end(), a[i_lo] + lo) -
                     b.begin();
    for (std::size_t i = i_lo; i < i_hi; ++i) {
      const double t0 = a[i];
      while (j0 < b.size() && b[j0] < t0 + lo) ++j0;
      for (std::size_t j = j0; j < b.size() && b[j] < t0 + hi; ++j) {
        const double r = std::max(0.0, b[j] - t0 - lo);
        auto bin = static_cast<std::size_t>(r / bin_w);
        if (bin >= local.size()) bin = local.size() - 1;
        ++local[bin];
      }
    }
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      std::vector<std::uint64_t> local(n_bins, 0);
#pragma omp for schedule(static) nowait
      for (long long i = 0; i < static_cast<long long>(n); ++i)
        worker(static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1,
               local);
#pragma omp critical
      for (int k = 0; k < n_bins; ++k) h.counts[k] += local[k];
    }
  } else {
    std::vector<std::uint64_t> local(n_bins, 0);
    worker(0, n, local);
    for (int k = 0; k < n_bins; ++k) h.counts[k] += local[k];
  }
}

// same-line version: all ordered pairs i != j
void bin_auto_pairs(const std::vector<double>& a, CoincidenceHistogram& h,
                    Exec exec) {
  if (a.empty()) return;
  const double lo = h.bin_edges_ns.front();
  const double hi = h.bin_edges_ns.back();
  const int n_bins = static_cast<int>(h.counts.size());
  const double bin_w = (hi - lo) / n_bins;

  auto worker = [&](std::size_t i, std::vector<std::uint64_t>& local) {
    const double t0 = a[i];
    std::size_t j =
        std::lower_bound(a.begin(), a.end(), t0 + lo) - a.begin();
    for (; j < a.size() && a[j] < t0 + hi; ++j) {
      if (j == i) continue;
      const double r = std::max(0.0, a[j] - t0 - lo);
      auto bin = static_cast<std::size_t>(r / bin_w);
      if (bin >= local.size()) bin = local.size() - 1;
      ++local[bin];
    }
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      std::vector<std::uint64_t> local(n_bins, 0);
#pragma omp for schedule(static) nowait
      for (long long i = 0; i < static_cast<long long>(a.size()); ++i)
        worker(static_cast<std::size_t>(i), local);
#pragma omp critical
      for (int k = 0; k < n_bins; ++k) h.counts[k] += local[k];
    }
  } else {
    std::vector<std::uint64_t> local(n_bins, 0);
    for (std::size_t i = 0; i < a.size(); ++i) worker(i, local);
    for (int k = 0; k < n_bins; ++k) h.counts[k] += local[k];
  }
}

std::vector<double> times_of(const std::vector<Detection>& hits,
                             bool passed_only) {
  std::vector<double> t;
  t.reserve(hits.size());
  for (const auto& d : hits)
    if (!passed_only || d.passed) t.push_back(d.t_ns);
  return t;
}

}  // namespace

CoincidenceHistogram g2_auto(const Stream& stream, Line line,
                             const HistSpec& spec, Exec exec) {
  const auto& hits = line == Line::XX ? stream.xx_hits : stream.x_hits;
  if (hits.empty()) throw Error("g2_auto: empty stream");
  CoincidenceHistogram h = CoincidenceHistogram::from_spec(spec);
  h.seed = stream.seed;
  h.n_cycles = stream.clock.n_cycles;
  h.label = std::string("g2_") + line_name(line);
  const std::vector<double> t = times_of(hits, false);
  bin_auto_pairs(t, h, exec);
  h.n_start_events = t.size();
  return h;
}

double g2_zero(const Stream& stream, Line line, int max_side_clusters) {
  const auto& hits = line == Line::XX ? stream.xx_hits : stream.x_hits;
  if (hits.empty()) throw Error("g2_zero: empty stream");
  const std::uint64_t n_cycles = stream.clock.n_cycles;
  const int ppc = stream.clock.pulses_per_cycle;

  // detections per pulse slot
  std::vector<std::uint32_t> n_slot(2 * n_cycles, 0);
  for (const auto& d : hits)
    if (d.slot < n_slot.size()) ++n_slot[d.slot];

  // central cluster: ordered same-slot pairs, sum n(n-1)
  double central = 0.0;
  for (std::uint64_t c = 0; c < n_cycles; ++c)
    for (int q = 0; q < ppc; ++q) {
      const double n = n_slot[2 * c + q];
      central += n * (n - 1.0);
    }

  // side clusters at k repetition periods: ordered pairs between slots of
  // the same pulse index k cycles apart
  double side = 0.0;
  double side_pairs = 0.0;
  const std::uint64_t k_max = std::min<std::uint64_t>(
      max_side_clusters, n_cycles > 0 ? n_cycles - 1 : 0);
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    for (std::uint64_t c = 0; c + k < n_cycles; ++c)
      for (int q = 0; q < ppc; ++q)
        side += 2.0 * static_cast<double>(n_slot[2 * c + q]) *
                static_cast<double>(n_slot[2 * (c + k) + q]);
    side_pairs += 2.0 * ppc * static_cast<double>(n_cycles - k);
  }
  if (side <= 0.0) {
    if (central == 0.0) return 0.0;
    throw Error("g2_zero: no side clusters to normalize against");
  }
  const double per_pulse_center =
      central / (static_cast<double>(ppc) * static_cast<double>(n_cycles));
  const double per_pair_side = side / side_pairs;
  return per_pulse_center / per_pair_side;
}

CoincidenceHistogram cross_correlation(const Stream& stream,
                                       const MeasurementSetting& setting,
                                       const HistSpec& spec, Exec exec) {
  if (stream.setting_label != setting.label)
    throw Error("cross_correlation: stream was generated under setting '" +
                stream.setting_label + "', not '" + setting.label + "'");
  CoincidenceHistogram h = CoincidenceHistogram::from_spec(spec);
  h.seed = stream.seed;
  h.n_cycles = stream.clock.n_cycles;
  h.label = setting.label;
  const std::vector<double> xx = times_of(stream.xx_hits, true);
  const std::vector<double> x = times_of(stream.x_hits, true);
  bin_cross_pairs(xx, x, h, exec);
  h.n_start_events = xx.size();
  return h;
}

// -----------------------------------------------------------------------
// Hong-Ou-Mandel
// -----------------------------------------------------------------------

HomResult hom_simulate(const CascadeParams& params, const ExperimentClock& clock,
                       const DetectorModel& det, const BeamSplitterModel& bs,
                       double v_in, bool co_polarized, Line line,
                       const HistSpec& spec, std::uint64_t seed, double p_prep,
                       Exec exec) {
  params.validate();
  clock.validate();
  det.validate();
  bs.validate();
  if (v_in < 0.0 || v_in > 1.0) throw Error("hom_simulate: v_in must be in [0,1]");
  if (p_prep < 0.0 || p_prep > 1.0)
    throw Error("hom_simulate: p_prep must be in [0,1]");
  if (clock.n_cycles == 0) throw Error("hom_simulate: n_cycles must be > 0");

  const double t1_ns = params.t1_ps * 1e-3;
  const double t1xx_ns = params.t1_xx_resolved() * 1e-3;
  const double line_decay_ns = line == Line::XX ? t1xx_ns : t1_ns;
  const double r = bs.reflectance;
  const double t = bs.transmittance;
  const double eps = 1.0 - bs.mode_overlap;
  const double zeta_max = co_polarized ? v_in * (1.0 - eps) * (1.0 - eps) : 0.0;
  const double dark_per_cycle = det.dark_rate_hz * clock.rep_period_ns * 1e-9;

  struct HomBlock {
    std::vector<double> d1, d2;
    std::uint64_t pairs = 0;
    std::uint64_t coincidences = 0;
  };

  const std::uint64_t n_blocks = (clock.n_cycles + kCycleBlock - 1) / kCycleBlock;
  std::vector<HomBlock> blocks(n_blocks);

  auto run_block = [&](std::uint64_t b) {
    Rng rng(seed, stream_id::kHom, b);
    HomBlock& out = blocks[b];
    const std::uint64_t lo = b * kCycleBlock;
    const std::uint64_t hi = std::min(clock.n_cycles, lo + kCycleBlock);
    for (std::uint64_t c = lo; c < hi; ++c) {
      const double cycle_t = static_cast<double>(c) * clock.rep_period_ns;
      // per photon: presence, wavepacket start jitter, decay, arm choice
      bool present[2] = {false, false};
      double start[2] = {0.0, 0.0};
      double arrive[2] = {0.0, 0.0};
      bool long_arm[2] = {false, false};
      for (int q = 0; q < 2; ++q) {
        present[q] = p_prep >= 1.0 || rng.bernoulli(p_prep);
        if (!present[q]) continue;
        const double pulse_t = cycle_t + q * clock.pulse_pair_sep_ns;
        const double s = line == Line::X ? rng.exponential(t1xx_ns) : 0.0;
        const double e = rng.exponential(line_decay_ns);
        long_arm[q] = rng.bernoulli(0.5);
        start[q] = pulse_t + s;
        arrive[q] = pulse_t + s + e +
                    (long_arm[q] ? clock.pulse_pair_sep_ns : 0.0);
      }

      auto detect = [&](double arrival, std::vector<double>& det_list) {
        if (det.efficiency < 1.0 && !rng.bernoulli(det.efficiency)) return false;
        double ts = arrival;
        if (det.jitter_sigma_ns > 0.0) ts += det.jitter_sigma_ns * rng.normal();
        det_list.push_back(ts);
        return true;
      };

      const bool interfering =
          present[0] && present[1] && long_arm[0] && !long_arm[1];
      if (interfering) {
        ++out.pairs;
        // wavepacket-start mismatch at the splitter: the MZ delay on the
        // early photon cancels the pulse separation of the late one
        const double delta =
            start[1] - (start[0] + clock.pulse_pair_sep_ns);
        const double zeta =
            zeta_max * std::exp(-std::abs(delta) / line_decay_ns);
        const double p_cc = r * r + t * t - 2.0 * r * t * zeta;
        const double u = rng.u01();
        if (u < p_cc) {
          // one photon per output port; random assignment of the arrivals
          const bool swap = rng.bernoulli(0.5);
          const bool got1 = detect(swap ? arrive[1] : arrive[0], out.d1);
          const bool got2 = detect(swap ? arrive[0] : arrive[1], out.d2);
          if (got1 && got2) ++out.coincidences;
        } else {
          // both photons coalesce into one port
          auto& port = rng.bernoulli(0.5) ? out.d1 : out.d2;
          detect(arrive[0], port);
          detect(arrive[1], port);
        }
      } else {
        for (int q = 0; q < 2; ++q) {
          if (!present[q]) continue;
          // short port: D1 on transmission; long port: D1 on reflection
          const double p_d1 = long_arm[q] ? r : t;
          detect(arrive[q], rng.bernoulli(p_d1) ? out.d1 : out.d2);
        }
      }
      if (dark_per_cycle > 0.0) {
        for (int d = 0; d < 2; ++d) {
          const std::uint64_t k = rng.poisson(dark_per_cycle);
          for (std::uint64_t nn = 0; nn < k; ++nn)
            (d == 0 ? out.d1 : out.d2)
                .push_back(cycle_t + rng.uniform(0.0, clock.rep_period_ns));
        }
      }
    }
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(n_blocks); ++b)
      run_block(static_cast<std::uint64_t>(b));
  } else {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  }

  std::vector<double> d1, d2;
  HomResult res;
  for (const auto& blk : blocks) {
    d1.insert(d1.end(), blk.d1.begin(), blk.d1.end());
    d2.insert(d2.end(), blk.d2.begin(), blk.d2.end());
    res.interference_pairs += blk.pairs;
    res.interference_coincidences += blk.coincidences;
  }
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());

  res.hist = CoincidenceHistogram::from_spec(spec);
  res.hist.seed = seed;
  res.hist.n_cycles = clock.n_cycles;
  res.hist.label = std::string("hom_") + line_name(line) +
                   (co_polarized ? "_co" : "_cross");
  bin_cross_pairs(d1, d2, res.hist, exec);
  res.hist.n_start_events = d1.size();
  return res;
}

}  // namespace qdc
