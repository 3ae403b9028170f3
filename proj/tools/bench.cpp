// Benchmark of the OpenMP kernels against their serial reference paths.
// Both must produce identical output; this target reports timing and
// checks the equality on the fly.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qdc/cascade.hpp"
#include "qdc/io_util.hpp"
#include "qdc/stream.hpp"

using namespace qdc;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

template <typename F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return ms_since(t0);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp max threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled\n");
#endif

  CascadeParams params;
  params.fss_ueV = 1.2;
  params.t1_ps = 250.0;
  params.overhauser_sigma_ueV = 0.8;

  {
    const std::uint64_t n = 400000;
    DensityMatrix4 serial = overhauser_average(params, n, 7, Exec::Serial);
    DensityMatrix4 parallel = overhauser_average(params, n, 7, Exec::Parallel);
    const double diff = trace_distance(serial.m, parallel.m);
    const double t_s =
        timed([&] { (void)overhauser_average(params, n, 7, Exec::Serial); });
    const double t_p =
        timed([&] { (void)overhauser_average(params, n, 7, Exec::Parallel); });
    std::printf("overhauser_average n=%llu: serial %.1f ms, parallel %.1f ms, "
                "speedup %.2fx, identical=%d\n",
                static_cast<unsigned long long>(n), t_s, t_p, t_s / t_p,
                diff == 0.0);
  }

  {
    ExperimentClock clock{12.5, 2.0, 200000};
    DetectorModel det;
    StreamOptions opts;
    opts.analyzers = MeasurementSetting::from_label("DD");
    opts.exec = Exec::Serial;
    Stream s1;
    const double t_s = timed(
        [&] { s1 = simulate_stream(params, clock, det, opts, 11); });
    opts.exec = Exec::Parallel;
    Stream s2;
    const double t_p = timed(
        [&] { s2 = simulate_stream(params, clock, det, opts, 11); });
    bool same = s1.events.size() == s2.events.size() &&
                s1.xx_hits.size() == s2.xx_hits.size();
    if (same)
      for (std::size_t i = 0; i < s1.xx_hits.size(); ++i)
        if (s1.xx_hits[i].t_ns != s2.xx_hits[i].t_ns) {
          same = false;
          break;
        }
    std::printf("simulate_stream n_cycles=%llu: serial %.1f ms, parallel %.1f "
                "ms, speedup %.2fx, identical=%d\n",
                static_cast<unsigned long long>(clock.n_cycles), t_s, t_p,
                t_s / t_p, same);

    HistSpec spec;
    const MeasurementSetting setting = MeasurementSetting::from_label("DD");
    CoincidenceHistogram h1, h2;
    const double t_bs =
        timed([&] { h1 = cross_correlation(s1, setting, spec, Exec::Serial); });
    const double t_bp = timed(
        [&] { h2 = cross_correlation(s2, setting, spec, Exec::Parallel); });
    std::printf("cross_correlation binning: serial %.1f ms, parallel %.1f ms, "
                "speedup %.2fx, identical=%d\n",
                t_bs, t_bp, t_bs / t_bp, h1.counts == h2.counts);
  }

  {
    ExperimentClock clock{12.5, 2.0, 150000};
    DetectorModel det;
    BeamSplitterModel bs;
    HistSpec spec;
    HomResult r1, r2;
    const double t_s = timed([&] {
      r1 = hom_simulate(params, clock, det, bs, 0.93, true, Line::XX, spec, 3,
                        1.0, Exec::Serial);
    });
    const double t_p = timed([&] {
      r2 = hom_simulate(params, clock, det, bs, 0.93, true, Line::XX, spec, 3,
                        1.0, Exec::Parallel);
    });
    std::printf("hom_simulate n_cycles=%llu: serial %.1f ms, parallel %.1f ms, "
                "speedup %.2fx, identical=%d\n",
                static_cast<unsigned long long>(clock.n_cycles), t_s, t_p,
                t_s / t_p, r1.hist.counts == r2.hist.counts);
  }
  return 0;
}
