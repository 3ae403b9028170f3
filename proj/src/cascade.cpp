#include "qdc/cascade.hpp"

#include <cmath>
#include <string>

#include "qdc/io_util.hpp"
#include "qdc/metrics.hpp"
#include "qdc/rng.hpp"

namespace qdc {

std::vector<std::string> CascadeParams::problems(const std::string& prefix) const {
  std::vector<std::string> errs;
  if (!(t1_ps > 0.0)) errs.push_back(prefix + "t1_ps must be > 0");
  if (fss_ueV < 0.0) errs.push_back(prefix + "fss_ueV must be >= 0");
  if (overhauser_sigma_ueV < 0.0)
    errs.push_back(prefix + "overhauser_sigma_ueV must be >= 0");
  if (spin_flip_prob < 0.0 || spin_flip_prob > 1.0)
    errs.push_back(prefix + "spin_flip_prob must be in [0,1]");
  if (background_fraction < 0.0 || background_fraction > 1.0)
    errs.push_back(prefix + "background_fraction must be in [0,1]");
  if (t1_xx_ps < 0.0) errs.push_back(prefix + "t1_xx_ps must be >= 0");
  return errs;
}

void CascadeParams::validate() const {
  const auto errs = problems();
  if (!errs.empty()) throw ConfigError(errs.front());
}

double precession_x(double fss_ueV, double t1_ps) {
  return fss_ueV * t1_ps / kHbarUevPs;
}

cplx fss_coherence(double x) { return 0.5 / cplx(1.0, -x); }

Ket4 instantaneous_state(const CascadeParams& params, double t_ps) {
  if (t_ps < 0.0) throw Error("instantaneous_state: t_ps must be >= 0");
  const double phi = params.fss_ueV * t_ps / kHbarUevPs;
  const double a = 1.0 / std::sqrt(2.0);
  return Ket4::raw({cplx(a, 0.0), 0.0, 0.0, a * std::exp(cplx(0.0, phi))});
}

Matrix4 apply_spin_flip(const Matrix4& rho, double p) {
  if (p == 0.0) return rho;
  // flip the X photon (right tensor factor) with weight p/2
  const Matrix4 flip = tensor(Mat2::identity(), Mat2::pauli_x());
  const Matrix4 flipped = flip * rho * flip;
  return (1.0 - 0.5 * p) * rho + (0.5 * p) * flipped;
}

Matrix4 apply_background(const Matrix4& rho, double beta) {
  if (beta == 0.0) return rho;
  return (1.0 - beta) * rho + (0.25 * beta) * Matrix4::identity();
}

namespace {

// assemble the X-state with populations 1/2 on HH and VV and the given
// VV,HH coherence, then apply the noise channels
Matrix4 assemble(const CascadeParams& params, cplx coherence_vv_hh) {
  Matrix4 rho;
  rho.at(0, 0) = 0.5;
  rho.at(3, 3) = 0.5;
  rho.at(3, 0) = coherence_vv_hh;
  rho.at(0, 3) = std::conj(coherence_vv_hh);
  rho = apply_spin_flip(rho, params.spin_flip_prob);
  rho = apply_background(rho, params.background_fraction);
  return rho;
}

// Gaussian average of fss_coherence over S_eff ~ Normal(S, sigma) using
// composite Simpson on +-10 sigma (the tail mass beyond is < 1e-23)
cplx overhauser_coherence(const CascadeParams& params) {
  const double s0 = params.fss_ueV;
  const double sig = params.overhauser_sigma_ueV;
  if (sig == 0.0) return fss_coherence(precession_x(s0, params.t1_ps));
  const int n = 4000;  // intervals, even
  const double lo = s0 - 10.0 * sig;
  const double hi = s0 + 10.0 * sig;
  const double h = (hi - lo) / n;
  const double inv = 1.0 / (sig * std::sqrt(2.0 * kPi));
  auto f = [&](double s) -> cplx {
    const double u = (s - s0) / sig;
    return inv * std::exp(-0.5 * u * u) *
           fss_coherence(precession_x(s, params.t1_ps));
  };
  cplx acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return acc * (h / 3.0);
}

}  // namespace

DensityMatrix4 time_integrated_dm(const CascadeParams& params) {
  params.validate();
  return DensityMatrix4::from(assemble(params, overhauser_coherence(params)));
}

DensityMatrix4 overhauser_average(const CascadeParams& params,
                                  std::uint64_t n_samples, std::uint64_t seed,
                                  Exec exec) {
  params.validate();
  if (n_samples < 1) throw Error("overhauser_average: n_samples must be >= 1");

  const std::uint64_t kBlock = 4096;
  const std::uint64_t n_blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<cplx> partial(n_blocks, cplx(0.0, 0.0));

  auto run_block = [&](std::uint64_t b) {
    Rng rng(seed, stream_id::kOverhauser, b);
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(n_samples, lo + kBlock);
    cplx acc(0.0, 0.0);
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double s_eff =
          params.fss_ueV + params.overhauser_sigma_ueV * rng.normal();
      acc += fss_coherence(precession_x(s_eff, params.t1_ps));
    }
    partial[b] = acc;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(n_blocks); ++b)
      run_block(static_cast<std::uint64_t>(b));
  } else {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  }

  // combine in block order: result is independent of the worker count
  cplx sum(0.0, 0.0);
  for (const cplx& p : partial) sum += p;
  const cplx mean = sum / static_cast<double>(n_samples);
  return DensityMatrix4::from(assemble(params, mean));
}

VisibilityTriple predicted_visibilities(const DensityMatrix4& rho) {
  auto vis = [&](Pol b1, Pol b2) {
    const Ket2 k1 = standard_ket(b1);
    const Ket2 k2 = standard_ket(b2);
    auto prob = [&](const Ket2& a, const Ket2& b) {
      const Ket4 k = tensor_ket(a, b);
      const Ket4 rk = rho.m.apply_raw(k);
      return inner(k, rk).real();
    };
    const double n_co = prob(k1, k1) + prob(k2, k2);
    const double n_cross = prob(k1, k2) + prob(k2, k1);
    return (n_co - n_cross) / (n_co + n_cross);
  };
  VisibilityTriple v;
  v.c_linear = vis(Pol::H, Pol::V);
  v.c_diagonal = vis(Pol::D, Pol::A);
  v.c_circular = vis(Pol::R, Pol::L);
  return v;
}

std::vector<FssScanRow> fss_fidelity_scan(const CascadeParams& tmpl,
                                          const std::vector<double>& fss_grid) {
  std::vector<FssScanRow> rows;
  rows.reserve(fss_grid.size());
  for (double fss : fss_grid) {
    if (fss < 0.0) throw Error("fss_fidelity_scan: grid values must be >= 0");
    CascadeParams p = tmpl;
    p.fss_ueV = fss;
    const DensityMatrix4 rho = time_integrated_dm(p);
    rows.push_back({fss, fidelity_to_psi_plus(rho), concurrence(rho)});
  }
  return rows;
}

std::string fss_scan_to_csv(const std::vector<FssScanRow>& rows) {
  std::string out = "fss_ueV,fidelity,concurrence\n";
  for (const auto& r : rows) {
    out += fmt_g10(r.fss_ueV);
    out += ',';
    out += fmt_g6(r.fidelity);
    out += ',';
    out += fmt_g6(r.concurrence);
    out += '\n';
  }
  return out;
}

}  // namespace qdc
