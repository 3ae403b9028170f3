#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qdc/cascade.hpp"
#include "qdc/metrics.hpp"
#include "qdc/tomography.hpp"

using namespace qdc;

TEST_SUITE_BEGIN("tomography");

namespace {

TomographyCounts exact_counts(const DensityMatrix4& rho, double n) {
  const auto settings = canonical_settings();
  TomographyCounts c;
  c.settings.assign(settings.begin(), settings.end());
  c.exposure.assign(16, 1.0);
  for (const auto& s : c.settings) {
    const Ket4 v = s.ket();
    const double p = std::max(0.0, inner(v, rho.m.apply_raw(v)).real());
    c.counts.push_back(static_cast<std::uint64_t>(std::llround(n * p)));
  }
  return c;
}

}  // namespace

TEST_CASE("canonical settings: count, distinctness, informational completeness") {
  const auto settings = canonical_settings();
  CHECK(settings.size() == 16);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = i + 1; j < 16; ++j)
      CHECK(settings[i].label != settings[j].label);

  // Gram matrix of the 16 projectors over Hermitian space has rank 16
  std::vector<double> gram(16 * 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      const Matrix4 a = settings[i].projector4();
      const Matrix4 b = settings[j].projector4();
      cplx tr = 0.0;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) tr += a.at(r, c) * b.at(c, r);
      gram[i * 16 + j] = tr.real();
    }
  CHECK(oracle::matrix_rank(gram, 16, 1e-9) == 16);

  // setting HH on psi+ has probability 1/2
  const Ket4 hh = settings[0].ket();
  CHECK(std::norm(inner(hh, psi_plus())) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("simulate_counts: Poisson means and exact zeros") {
  const DensityMatrix4 mixed =
      DensityMatrix4::from(0.25 * Matrix4::identity());
  const auto settings = canonical_settings();
  const std::vector<MeasurementSetting> sv(settings.begin(), settings.end());

  // every setting projects the maximally mixed state with probability 1/4
  double total = 0.0;
  const double n = 10000.0;
  const int reps = 10;
  for (int rep = 0; rep < reps; ++rep) {
    const TomographyCounts c = simulate_counts(mixed, sv, n, 100 + rep);
    for (auto k : c.counts) total += static_cast<double>(k);
  }
  const double mean = total / (16.0 * reps);
  CHECK(std::abs(mean - n / 4.0) < 3.0 * std::sqrt(n / 4.0 / (16.0 * reps)));

  // psi+ never passes the HV analyzer pair
  const DensityMatrix4 bell =
      DensityMatrix4::from(outer(psi_plus(), psi_plus()));
  const TomographyCounts c = simulate_counts(bell, sv, 1e6, 5);
  CHECK(c.counts[1] == 0);  // label HV

  // determinism
  const TomographyCounts c2 = simulate_counts(bell, sv, 1e6, 5);
  CHECK(c.counts == c2.counts);
}

TEST_CASE("linear inversion: exact round trip on noiseless probabilities") {
  const DensityMatrix4 bell =
      DensityMatrix4::from(outer(psi_plus(), psi_plus()));
  const LinearInversionResult r = linear_inversion(exact_counts(bell, 1e9));
  CHECK(trace_distance(r.rho, bell.m) < 1e-8);

  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix4 rho = oracle::random_state(rng);
    // huge scale so integer rounding is negligible against 1e-10
    const LinearInversionResult rr = linear_inversion(exact_counts(rho, 1e14));
    CHECK(trace_distance(rr.rho, rho.m) < 1e-10);
    CHECK(std::abs(rr.rho.trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("linear inversion: low counts can go negative, flag says so") {
  const DensityMatrix4 bell =
      DensityMatrix4::from(outer(psi_plus(), psi_plus()));
  const auto settings = canonical_settings();
  const std::vector<MeasurementSetting> sv(settings.begin(), settings.end());
  int negative_seen = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const TomographyCounts c = simulate_counts(bell, sv, 50, seed);
    const LinearInversionResult r = linear_inversion(c);
    if (!r.physical) {
      ++negative_seen;
      CHECK(r.min_eigenvalue < -1e-9);
    }
  }
  CHECK(negative_seen > 0);  // documents why the MLE stage exists
}

TEST_CASE("linear inversion: deficient settings are named") {
  TomographyCounts c;
  for (const char* l : {"DD", "DR", "RD", "RR"}) {
    c.settings.push_back(MeasurementSetting::from_label(l));
    c.counts.push_back(100);
    c.exposure.push_back(1.0);
  }
  CHECK_THROWS_WITH_AS(linear_inversion(c),
                       "linear_inversion: settings must include the "
                       "rectilinear basis HH,HV,VH,VV to fix the pair flux",
                       Error);
}

TEST_CASE("mle: analytic gradient matches central finite differences") {
  Rng rng(404);
  const DensityMatrix4 rho = oracle::random_state(rng);
  const auto settings = canonical_settings();
  const TomographyCounts data = simulate_counts(
      rho, {settings.begin(), settings.end()}, 20000, 9);

  for (int point = 0; point < 10; ++point) {
    std::array<double, 16> t;
    for (auto& v : t) v = rng.normal() * 50.0 + (rng.u01() < 0.5 ? 60.0 : 90.0);
    // keep diagonals away from zero so mu stays positive
    for (int i = 0; i < 4; ++i) t[i] = std::abs(t[i]) + 20.0;

    std::array<double, 16> grad;
    (void)mle_log_likelihood(data, t, &grad);
    for (int j = 0; j < 16; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(t[j]));
      std::array<double, 16> tp = t, tm = t;
      tp[j] += h;
      tm[j] -= h;
      const double fd =
          (mle_log_likelihood(data, tp) - mle_log_likelihood(data, tm)) /
          (2.0 * h);
      const double scale = std::max({1.0, std::abs(grad[j]), std::abs(fd)});
      CHECK(std::abs(grad[j] - fd) / scale < 1e-4);
    }
  }
}

TEST_CASE("mle: noiseless counts recover the truth") {
  Rng rng(2718);
  const DensityMatrix4 rho = oracle::random_state(rng);
  const MleResult r = mle_reconstruct(exact_counts(rho, 1e7));
  CHECK(trace_distance(r.rho.m, rho.m) < 1e-6);
  CHECK_NOTHROW(validate_density_matrix(r.rho.m));
}

TEST_CASE("mle: Poisson round trip at a million pairs per setting") {
  const DensityMatrix4 bell =
      DensityMatrix4::from(outer(psi_plus(), psi_plus()));
  const auto settings = canonical_settings();
  const TomographyCounts counts = simulate_counts(
      bell, {settings.begin(), settings.end()}, 1e6, 31);
  const MleResult r = mle_reconstruct(counts);
  CHECK(trace_distance(r.rho.m, bell.m) < 0.01);
  CHECK(r.rho.m.at(0, 0).real() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("mle: monotone improvement over the projected linear inversion") {
  const DensityMatrix4 bell =
      DensityMatrix4::from(outer(psi_plus(), psi_plus()));
  const auto settings = canonical_settings();
  const TomographyCounts counts = simulate_counts(
      bell, {settings.begin(), settings.end()}, 300, 17);

  // likelihood of the clipped linear-inversion start, rebuilt externally
  const LinearInversionResult lin = linear_inversion(counts);
  const EigSystem es = eig_hermitian(lin.rho);
  Matrix4 proj;
  double tr = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double l = std::max(es.values[i], 1e-6);
    proj = proj + l * outer(es.vectors[i], es.vectors[i]);
    tr += l;
  }
  proj = (1.0 / tr) * proj;
  double flux = 0.0, q = 0.0;
  for (std::size_t s = 0; s < counts.settings.size(); ++s) {
    const Ket4 v = counts.settings[s].ket();
    flux += static_cast<double>(counts.counts[s]);
    q += std::max(1e-12, inner(v, proj.apply_raw(v)).real());
  }
  double ll_init = 0.0;
  for (std::size_t s = 0; s < counts.settings.size(); ++s) {
    const Ket4 v = counts.settings[s].ket();
    const double mu =
        (flux / q) * std::max(1e-300, inner(v, proj.apply_raw(v)).real());
    const double k = static_cast<double>(counts.counts[s]);
    ll_init += (k > 0 ? k * std::log(mu) : 0.0) - mu;
  }

  const MleResult r = mle_reconstruct(counts);
  CHECK(r.report.log_likelihood >= ll_init - 1e-9);
}

TEST_CASE("mle: equivariant under relabeling of the settings") {
  const DensityMatrix4 bell =
      DensityMatrix4::from(outer(psi_plus(), psi_plus()));
  const auto settings = canonical_settings();
  TomographyCounts counts = simulate_counts(
      bell, {settings.begin(), settings.end()}, 10000, 23);

  TomographyCounts permuted = counts;
  std::vector<std::size_t> order(16);
  for (std::size_t i = 0; i < 16; ++i) order[i] = (i * 7 + 3) % 16;
  for (std::size_t i = 0; i < 16; ++i) {
    permuted.settings[i] = counts.settings[order[i]];
    permuted.counts[i] = counts.counts[order[i]];
    permuted.exposure[i] = counts.exposure[order[i]];
  }
  const MleResult a = mle_reconstruct(counts);
  const MleResult b = mle_reconstruct(permuted);
  for (int i = 0; i < 16; ++i)
    CHECK(std::abs(a.rho.m.m[i] - b.rho.m.m[i]) < 1e-10);
}

TEST_CASE("mle output is physical even for hostile counts") {
  TomographyCounts c;
  const auto settings = canonical_settings();
  c.settings.assign(settings.begin(), settings.end());
  c.exposure.assign(16, 1.0);
  Rng rng(99);
  for (int i = 0; i < 16; ++i)
    c.counts.push_back(rng.next() % 7);  // tiny, jagged
  const MleResult r = mle_reconstruct(c);
  CHECK_NOTHROW(validate_density_matrix(r.rho.m));
  const EigSystem es = eig_hermitian(r.rho.m);
  CHECK(es.values[3] >= -1e-12);
}

TEST_CASE("mle: unequal exposure weights are honored") {
  // counts scaled by per-setting acquisition weights still reconstruct rho
  CascadeParams p;
  p.fss_ueV = 1.2;
  p.t1_ps = 250.0;
  const DensityMatrix4 truth = time_integrated_dm(p);
  const auto settings = canonical_settings();
  TomographyCounts counts;
  counts.settings.assign(settings.begin(), settings.end());
  Rng rng(606);
  for (std::size_t s = 0; s < 16; ++s) {
    const double w = 0.5 + 2.0 * rng.u01();
    counts.exposure.push_back(w);
    const Ket4 v = counts.settings[s].ket();
    const double prob = std::max(0.0, inner(v, truth.m.apply_raw(v)).real());
    counts.counts.push_back(rng.poisson(50000.0 * w * prob));
  }
  const MleResult r = mle_reconstruct(counts);
  CHECK(trace_distance(r.rho.m, truth.m) < 0.02);
}

TEST_CASE("counts file: round trip and bad lines") {
  const DensityMatrix4 bell =
      DensityMatrix4::from(outer(psi_plus(), psi_plus()));
  const auto settings = canonical_settings();
  TomographyCounts counts = simulate_counts(
      bell, {settings.begin(), settings.end()}, 5000, 3);
  counts.exposure[4] = 2.5;
  const std::string text = counts_to_text(counts, {"test file"});
  const TomographyCounts back = counts_from_text(text);
  CHECK(back.counts == counts.counts);
  CHECK(back.exposure[4] == 2.5);
  REQUIRE(back.settings.size() == 16);
  for (int i = 0; i < 16; ++i)
    CHECK(back.settings[i].label == counts.settings[i].label);

  CHECK_THROWS_AS(counts_from_text("HH,12,1.0,extra\n"), Error);
}

TEST_SUITE_END();
