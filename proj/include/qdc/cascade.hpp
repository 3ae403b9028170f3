#pragma once
// Time-integrated two-photon polarization state of the XX-X cascade.
//
// Model, applied in this order:
//   1. fine-structure precession during the X lifetime, integrated over the
//      exponential decay: the VV,HH coherence of the noiseless state is
//      0.5 / (1 - i x) with x = S*T1/hbar;
//   2. Overhauser dephasing: the nuclear field is reduced to a scalar random
//      addition to the splitting, S_eff ~ Normal(S, sigma), static per
//      emission event;
//   3. X spin flip: symmetric mixing of each population with its X-flipped
//      partner, weight spin_flip_prob/2 (so spin_flip_prob = 1 mixes fully
//      and the linear-basis visibility vanishes);
//   4. unpolarized background: rho -> (1-beta) rho + beta I/4.

#include <cstdint>
#include <vector>

#include "qdc/common.hpp"
#include "qdc/quantum.hpp"

namespace qdc {

struct CascadeParams {
  double fss_ueV = 0.0;
  double t1_ps = 250.0;
  double overhauser_sigma_ueV = 0.0;
  double spin_flip_prob = 0.0;
  double background_fraction = 0.0;
  // XX lifetime; <= 0 means the default T1/2
  double t1_xx_ps = 0.0;

  double t1_xx_resolved() const { return t1_xx_ps > 0.0 ? t1_xx_ps : 0.5 * t1_ps; }
  // returns one message per violated invariant, empty when valid
  std::vector<std::string> problems(const std::string& prefix = "cascade.") const;
  void validate() const;
};

// dimensionless precession parameter x = S*T1/hbar
double precession_x(double fss_ueV, double t1_ps);

// VV,HH matrix element of the time-integrated noiseless state, 0.5/(1 - i x)
cplx fss_coherence(double x);

// |psi(t)> = (|HH> + e^{i S t / hbar} |VV>)/sqrt(2)
Ket4 instantaneous_state(const CascadeParams& params, double t_ps);

// Full closed-form model: decay-averaged FSS state, Gaussian Overhauser
// average (fixed-grid Simpson over +-10 sigma), spin-flip and background
// channels.
DensityMatrix4 time_integrated_dm(const CascadeParams& params);

// Monte Carlo version of the Overhauser average: S_eff drawn per sample,
// noise channels applied to the mean. Identical to time_integrated_dm in
// the sigma -> 0 limit. Deterministic per seed and independent of the
// number of workers (fixed 4096-sample blocks with per-block substreams).
DensityMatrix4 overhauser_average(const CascadeParams& params,
                                  std::uint64_t n_samples, std::uint64_t seed,
                                  Exec exec = Exec::Parallel);

// channels, exposed for the event-level simulator and tests
Matrix4 apply_spin_flip(const Matrix4& rho, double spin_flip_prob);
Matrix4 apply_background(const Matrix4& rho, double background_fraction);

struct VisibilityTriple {
  double c_linear = 0.0;
  double c_diagonal = 0.0;
  double c_circular = 0.0;
};

// correlation visibilities (N_co - N_cross)/(N_co + N_cross) in the
// (H,V), (D,A), (R,L) bases
VisibilityTriple predicted_visibilities(const DensityMatrix4& rho);

struct FssScanRow {
  double fss_ueV;
  double fidelity;
  double concurrence;
};

// one row per grid value; all other parameters from the template
std::vector<FssScanRow> fss_fidelity_scan(const CascadeParams& tmpl,
                                          const std::vector<double>& fss_grid);

std::string fss_scan_to_csv(const std::vector<FssScanRow>& rows);

}  // namespace qdc
