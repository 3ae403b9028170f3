#include "qdc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "qdc/io_util.hpp"

namespace qdc {

namespace {

Matrix4 matrix_sqrt_psd(const Matrix4& rho) {
  const EigSystem es = eig_hermitian(rho);
  Matrix4 r;
  for (int n = 0; n < 4; ++n) {
    const double l = std::sqrt(std::max(0.0, es.values[n]));
    if (l == 0.0) continue;
    r = r + l * outer(es.vectors[n], es.vectors[n]);
  }
  return r;
}

}  // namespace

double concurrence(const DensityMatrix4& rho) {
  const Matrix4 spin_flip = tensor(Mat2::pauli_y(), Mat2::pauli_y());
  const Matrix4 rho_tilde = spin_flip * rho.m.conj() * spin_flip;
  // eig(rho * rho_tilde) through the Hermitian similarity
  // sqrt(rho) rho_tilde sqrt(rho)
  const Matrix4 root = matrix_sqrt_psd(rho.m);
  const Matrix4 r = root * rho_tilde * root;
  const EigSystem es = eig_hermitian(r);
  // eigenvalues at the solver's noise level are exact zeros; without the
  // floor the square root amplifies 1e-12 noise to 1e-6 in the result
  const double floor_ = 1e-11 * std::max(es.values[0], 0.0);
  double lam[4];
  for (int i = 0; i < 4; ++i)
    lam[i] = std::sqrt(es.values[i] > floor_ ? es.values[i] : 0.0);
  std::sort(lam, lam + 4, std::greater<double>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double fidelity_to_psi_plus(const DensityMatrix4& rho) {
  const Ket4 psi = psi_plus();
  return inner(psi, rho.m.apply_raw(psi)).real();
}

double fidelity_from_visibilities(const VisibilityTriple& v) {
  return 0.25 * (1.0 + v.c_linear + v.c_diagonal - v.c_circular);
}

BellParameters bell_parameters(const VisibilityTriple& v) {
  const double s2 = std::sqrt(2.0);
  BellParameters b;
  b.s_rc = s2 * (v.c_linear - v.c_circular);
  b.s_dc = s2 * (v.c_diagonal - v.c_circular);
  b.s_rd = s2 * (v.c_linear + v.c_diagonal);
  return b;
}

DominantEigenstate dominant_eigenstate(const DensityMatrix4& rho) {
  const EigSystem es = eig_hermitian(rho.m);
  DominantEigenstate d;
  d.eigenvalue = es.values[0];
  d.state = es.vectors[0];
  d.degenerate = (es.values[0] - es.values[1]) < 1e-9;
  if (d.degenerate) return d;

  const cplx v_hh = d.state.a[0];
  if (std::abs(v_hh) < 1e-6) return d;  // alpha undefined

  // fix the global phase so the HH amplitude is real positive
  const cplx phase = std::conj(v_hh) / std::abs(v_hh);
  for (auto& c : d.state.a) c *= phase;
  const cplx v_vv = d.state.a[3];
  d.alpha = std::arg(v_vv) / kPi;  // (-1, 1]
  d.alpha_defined = true;
  return d;
}

double visibility_from_histograms(const CoincidenceHistogram& co,
                                  const CoincidenceHistogram& cross,
                                  double window_ns) {
  if (co.bin_edges_ns != cross.bin_edges_ns)
    throw Error("visibility_from_histograms: binning mismatch");
  const double a_co = co.area(-window_ns, window_ns);
  const double a_cross = cross.area(-window_ns, window_ns);
  if (a_co + a_cross == 0.0)
    throw Error("visibility_from_histograms: no counts in window");
  return (a_co - a_cross) / (a_co + a_cross);
}

MetricsReport metrics_from_dm(const DensityMatrix4& rho) {
  MetricsReport r;
  r.concurrence = concurrence(rho);
  r.fidelity_direct = fidelity_to_psi_plus(rho);
  const VisibilityTriple v = predicted_visibilities(rho);
  r.c_linear = v.c_linear;
  r.c_diagonal = v.c_diagonal;
  r.c_circular = v.c_circular;
  r.fidelity_eq1 = fidelity_from_visibilities(v);
  const BellParameters b = bell_parameters(v);
  r.s_rc = b.s_rc;
  r.s_dc = b.s_dc;
  r.s_rd = b.s_rd;
  const DominantEigenstate d = dominant_eigenstate(rho);
  r.top_eigenvalue = d.eigenvalue;
  if (d.alpha_defined)
    r.alpha = d.alpha;
  else
    r.alpha_undefined = true;
  return r;
}

std::string metrics_to_text(const MetricsReport& r) {
  std::string out = "# qdcascade metrics report\n";
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) out += std::string(key) + " = " + fmt_g6(*v) + "\n";
  };
  put("concurrence", r.concurrence);
  put("fidelity_direct", r.fidelity_direct);
  put("fidelity_eq1", r.fidelity_eq1);
  put("c_linear", r.c_linear);
  put("c_diagonal", r.c_diagonal);
  put("c_circular", r.c_circular);
  put("s_rc", r.s_rc);
  put("s_dc", r.s_dc);
  put("s_rd", r.s_rd);
  put("top_eigenvalue", r.top_eigenvalue);
  if (r.alpha)
    put("alpha", r.alpha);
  else if (r.alpha_undefined)
    out += "alpha = undefined\n";
  return out;
}

}  // namespace qdc
