#pragma once
// Nonlinear least squares for the three model families used by the
// analysis chain: multi-Lorentzian peak fits, damped Rabi oscillations,
// and the wave-plate FSS scan. The engine is a damped Gauss-Newton
// (Levenberg-Marquardt) with analytic Jacobians; the FSS model is linear
// in its reparameterized form and is solved directly.

#include <cmath>
#include <string>
#include <vector>

#include "qdc/common.hpp"
#include "qdc/histogram.hpp"

namespace qdc {

struct FitReport {
  std::string model;
  bool converged = false;
  int iterations = 0;
  double residual_rms = 0.0;
};

struct LorentzianPeak {
  double center_ns = 0.0;
  double fwhm_ns = 0.0;
  double area = 0.0;  // integrated counts
  double se_center = 0.0;
  double se_fwhm = 0.0;
  double se_area = 0.0;
};

struct LorentzianFit {
  std::vector<LorentzianPeak> peaks;  // sorted by center
  FitReport report;
};

// least-squares fit of a sum of n_peaks Lorentzians to the histogram;
// convergence on relative cost change < 1e-10 or 500 iterations.
// Throws on initial centers closer than 1e-6 ns or outside the histogram.
LorentzianFit fit_lorentzians(const CoincidenceHistogram& hist, int n_peaks,
                              const std::vector<double>& init_centers);

// same fit on raw samples; y is counts-per-bin with the given bin width
LorentzianFit fit_lorentzians_xy(const std::vector<double>& x,
                                 const std::vector<double>& y, double bin_w,
                                 int n_peaks,
                                 const std::vector<double>& init_centers);

// one single-Lorentzian fit per peak, each on its own +-half_window_ns
// slice; robust against the cluster tails a joint fit has to model
LorentzianFit fit_peaks_individually(const CoincidenceHistogram& hist,
                                     const std::vector<double>& centers,
                                     double half_window_ns = 1.0);

struct BeamSplitterModel;  // stream.hpp

struct HomVisibility {
  double v_raw = 0.0;
  double v_corrected = 0.0;
  bool clipped = false;
};

// v_raw = (A_cross(0) - A_co(0))/A_cross(0); the correction divides out the
// beam-splitter imperfection factor 2RT(1-eps)^2/(R^2+T^2). Throws when a
// central peak (|center| <= 0.5 ns) is missing from either list.
HomVisibility hom_visibility(const std::vector<LorentzianPeak>& peaks_co,
                             const std::vector<LorentzianPeak>& peaks_cross,
                             double reflectance, double transmittance,
                             double mode_overlap);

// XX population after a pulse of area theta (radians):
// P = 1/2 (1 - e^{-kappa theta} cos theta)
inline double rabi_population(double pulse_area_pi, double kappa) {
  const double theta = pulse_area_pi * kPi;
  return 0.5 * (1.0 - std::exp(-kappa * theta) * std::cos(theta));
}

struct RabiCurve {
  std::vector<double> pulse_areas_pi;
  std::vector<double> populations;
};

struct RabiFit {
  double amplitude = 0.0;
  double kappa = 0.0;
  double offset = 0.0;
  double se_amplitude = 0.0;
  double se_kappa = 0.0;
  double se_offset = 0.0;
  FitReport report;
};

// fits offset + amplitude * rabi_population(theta, kappa); requires >= 8
// samples spanning at least 2 pi of pulse area
RabiFit fit_damped_rabi(const RabiCurve& curve);

struct FssScan {
  std::vector<double> angles_deg;    // half-wave-plate angles, [0, 180)
  std::vector<double> delta_e_ueV;   // X-XX energy difference samples
};

struct FssFit {
  double fss_ueV = 0.0;    // >= 0, sign folded into the phase
  double phase_deg = 0.0;
  double offset_ueV = 0.0;
  double se_fss = 0.0;
  FitReport report;
};

// fits delta_e(theta) = offset + fss * cos(4 theta * pi/180 + phase);
// requires >= 8 angles spanning >= 90 degrees
FssFit fit_fss(const FssScan& scan);

// fit report serialization (model, parameters with standard errors,
// residual RMS, convergence flag)
std::string lorentzian_fit_to_text(const LorentzianFit& fit);
std::string rabi_fit_to_text(const RabiFit& fit);
std::string fss_fit_to_text(const FssFit& fit);

}  // namespace qdc
