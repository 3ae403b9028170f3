#pragma once
// Scalar figures of merit: concurrence, fidelity (direct projection and the
// three-visibility formula), Bell parameters, dominant eigenstate with its
// relative phase, and visibilities extracted from coincidence histograms.

#include <optional>
#include <string>

#include "qdc/cascade.hpp"
#include "qdc/histogram.hpp"
#include "qdc/quantum.hpp"

namespace qdc {

struct BellParameters {
  double s_rc = 0.0;
  double s_dc = 0.0;
  double s_rd = 0.0;
};

// Wootters concurrence, C = max(0, l1 - l2 - l3 - l4) with l_i the
// descending square roots of eig(rho * (sy x sy) rho* (sy x sy))
double concurrence(const DensityMatrix4& rho);

// <psi+|rho|psi+>
double fidelity_to_psi_plus(const DensityMatrix4& rho);

// (1 + C_linear + C_diagonal - C_circular) / 4
double fidelity_from_visibilities(const VisibilityTriple& v);

// S_RC = sqrt(2)(C_lin - C_circ), S_DC = sqrt(2)(C_diag - C_circ),
// S_RD = sqrt(2)(C_lin + C_diag)
BellParameters bell_parameters(const VisibilityTriple& v);

struct DominantEigenstate {
  double eigenvalue = 0.0;
  Ket4 state;
  double alpha = 0.0;       // phase of the VV amplitude in units of pi, (-1, 1]
  bool alpha_defined = false;
  bool degenerate = false;  // top eigenvalue gap < 1e-9
};

DominantEigenstate dominant_eigenstate(const DensityMatrix4& rho);

// (A_co - A_cross)/(A_co + A_cross) over the central-peak window; throws on
// zero denominator or mismatched binning
double visibility_from_histograms(const CoincidenceHistogram& co,
                                  const CoincidenceHistogram& cross,
                                  double window_ns = 1.0);

// report document; fields left unset are omitted from the text
struct MetricsReport {
  std::optional<double> concurrence;
  std::optional<double> fidelity_direct;
  std::optional<double> fidelity_eq1;
  std::optional<double> s_rc, s_dc, s_rd;
  std::optional<double> top_eigenvalue;
  std::optional<double> alpha;  // omitted when undefined
  bool alpha_undefined = false;
  std::optional<double> c_linear, c_diagonal, c_circular;
};

// all figures of merit derivable from a density matrix
MetricsReport metrics_from_dm(const DensityMatrix4& rho);

std::string metrics_to_text(const MetricsReport& r);

}  // namespace qdc
