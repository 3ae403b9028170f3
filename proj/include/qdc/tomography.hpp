#pragma once
// Two-qubit polarization state tomography: the 16 canonical settings,
// synthetic Poisson counts, linear inversion, and maximum-likelihood
// reconstruction over a Cholesky parameterization (rho = T'T / tr(T'T),
// so the output is physical by construction).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdc/quantum.hpp"

namespace qdc {

// {H,V,D,R} x {H,V,D,R}, XX arm first; informationally complete
std::array<MeasurementSetting, 16> canonical_settings();

struct TomographyCounts {
  std::vector<MeasurementSetting> settings;
  std::vector<std::uint64_t> counts;
  std::vector<double> exposure;  // per-setting acquisition weights

  void validate() const;
};

// counts ~ Poisson(n_per_setting * exposure_s * tr(rho Pi_s))
TomographyCounts simulate_counts(const DensityMatrix4& rho,
                                 const std::vector<MeasurementSetting>& settings,
                                 double n_per_setting, std::uint64_t seed);

struct LinearInversionResult {
  Matrix4 rho;            // Hermitian, unit trace, possibly non-positive
  double min_eigenvalue;
  bool physical;          // min eigenvalue >= -1e-9
};

// exact solve of tr(rho Pi_s) = p_s; needs the four rectilinear settings
// (HH, HV, VH, VV) to estimate the pair flux
LinearInversionResult linear_inversion(const TomographyCounts& data);

struct MleReport {
  double log_likelihood = 0.0;
  int iterations = 0;
  double grad_inf_norm = 0.0;
  bool converged = false;
};

struct MleResult {
  DensityMatrix4 rho;
  MleReport report;
};

// Maximizes the Poisson log-likelihood sum_s [k_s ln mu_s - mu_s] with
// mu_s = exposure_s * <v_s| T'T |v_s> over the 16 real Cholesky parameters
// (BFGS ascent with backtracking line search). Convergence when the
// gradient infinity-norm drops below 1e-8, cap 1e4 iterations; on
// non-convergence the best iterate is still returned with converged=false.
MleResult mle_reconstruct(const TomographyCounts& data,
                          const std::optional<Matrix4>& init = std::nullopt);

// log-likelihood and its analytic gradient at a raw parameter vector;
// exposed for the finite-difference checks
double mle_log_likelihood(const TomographyCounts& data,
                          const std::array<double, 16>& t,
                          std::array<double, 16>* grad = nullptr);

// file format: lines of label,count[,exposure]; '#' starts a comment
std::string counts_to_text(const TomographyCounts& data,
                           const std::vector<std::string>& comments = {});
TomographyCounts counts_from_text(const std::string& text);

}  // namespace qdc
