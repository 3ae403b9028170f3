#include "qdc/fitting.hpp"

#include <algorithm>
#include <functional>

#include "qdc/io_util.hpp"

namespace qdc {

namespace {

// residuals r_i = model(x_i; p) - y_i and the m x np Jacobian, row-major
using ResidualFn =
    std::function<void(const std::vector<double>& p, std::vector<double>& r,
                       std::vector<double>& jac)>;

struct LmResult {
  std::vector<double> params;
  std::vector<double> se;  // asymptotic standard errors
  double cost = 0.0;       // 0.5 sum r^2
  int iterations = 0;
  bool converged = false;
};

// solves a x = b (n x n, symmetric positive-ish) by Gaussian elimination
bool solve_sym(std::vector<double> a, std::vector<double> b, int n,
               std::vector<double>& x) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return true;
}

LmResult levenberg_marquardt(const ResidualFn& fn, std::vector<double> p,
                             int m, int max_iter) {
  const int np = static_cast<int>(p.size());
  std::vector<double> r(m), jac(m * np);
  std::vector<double> r_try(m), jac_try(m * np);

  auto cost_of = [&](const std::vector<double>& res) {
    double c = 0.0;
    for (double v : res) c += v * v;
    return 0.5 * c;
  };

  fn(p, r, jac);
  double cost = cost_of(r);
  double lambda = 1e-3;
  LmResult out;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // normal equations (J'J + lambda diag(J'J)) delta = -J'r
    std::vector<double> jtj(np * np, 0.0), jtr(np, 0.0);
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < np; ++a) {
        const double ja = jac[i * np + a];
        if (ja == 0.0) continue;
        jtr[a] += ja * r[i];
        for (int b = a; b < np; ++b) jtj[a * np + b] += ja * jac[i * np + b];
      }
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < a; ++b) jtj[a * np + b] = jtj[b * np + a];

    bool improved = false;
    for (int attempt = 0; attempt < 50; ++attempt) {
      std::vector<double> damped = jtj;
      for (int a = 0; a < np; ++a) {
        const double d = jtj[a * np + a];
        damped[a * np + a] = d + lambda * (d > 0.0 ? d : 1.0);
      }
      std::vector<double> neg_jtr(np), delta;
      for (int a = 0; a < np; ++a) neg_jtr[a] = -jtr[a];
      if (!solve_sym(std::move(damped), std::move(neg_jtr), np, delta)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> p_try(np);
      for (int a = 0; a < np; ++a) p_try[a] = p[a] + delta[a];
      fn(p_try, r_try, jac_try);
      const double cost_try = cost_of(r_try);
      if (std::isfinite(cost_try) && cost_try <= cost) {
        const double rel =
            (cost - cost_try) / std::max(cost, 1e-300);
        p = p_try;
        r = r_try;
        jac = jac_try;
        const bool done = rel < 1e-10;
        cost = cost_try;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        if (done) {
          out.converged = true;
        }
        break;
      }
      lambda = std::min(lambda * 10.0, 1e14);
    }
    if (out.converged || !improved) break;
  }

  out.params = p;
  out.cost = cost;
  out.iterations = iter + 1;

  // asymptotic errors from sigma^2 (J'J)^-1
  out.se.assign(np, 0.0);
  if (m > np) {
    const double sigma2 = 2.0 * cost / (m - np);
    std::vector<double> jtj(np * np, 0.0);
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < np; ++a)
        for (int b = 0; b < np; ++b)
          jtj[a * np + b] += jac[i * np + a] * jac[i * np + b];
    for (int a = 0; a < np; ++a) {
      std::vector<double> e(np, 0.0), col;
      e[a] = 1.0;
      if (solve_sym(jtj, std::move(e), np, col) && col[a] > 0.0)
        out.se[a] = std::sqrt(sigma2 * col[a]);
    }
  }
  return out;
}

// unit-area Lorentzian shape and its partials; gamma = fwhm/2
struct LorShape {
  double value, d_center, d_fwhm;
};

LorShape lorentz(double x, double center, double fwhm) {
  const double f = std::abs(fwhm);
  const double u = x - center;
  const double q = 4.0 * u * u / (f * f);
  const double g = 1.0 / (1.0 + q);
  const double pref = 2.0 / (kPi * f);
  LorShape s;
  s.value = pref * g;
  s.d_center = pref * g * g * 8.0 * u / (f * f);
  const double d_abs = (2.0 / kPi) * (-g / (f * f) + g * g * 8.0 * u * u / (f * f * f * f));
  s.d_fwhm = (fwhm >= 0.0 ? d_abs : -d_abs);
  return s;
}

}  // namespace

LorentzianFit fit_lorentzians(const CoincidenceHistogram& hist, int n_peaks,
                              const std::vector<double>& init_centers) {
  const int m = static_cast<int>(hist.counts.size());
  const double bin_w =
      (hist.bin_edges_ns.back() - hist.bin_edges_ns.front()) / m;
  std::vector<double> x(m), y(m);
  for (int i = 0; i < m; ++i) {
    x[i] = hist.bin_center(i);
    y[i] = static_cast<double>(hist.counts[i]);
  }
  return fit_lorentzians_xy(x, y, bin_w, n_peaks, init_centers);
}

LorentzianFit fit_lorentzians_xy(const std::vector<double>& x,
                                 const std::vector<double>& y, double bin_w,
                                 int n_peaks,
                                 const std::vector<double>& init_centers) {
  if (n_peaks < 1) throw Error("fit_lorentzians: n_peaks must be >= 1");
  if (static_cast<int>(init_centers.size()) != n_peaks)
    throw Error("fit_lorentzians: need one initial center per peak");
  if (x.size() != y.size() || x.empty())
    throw Error("fit_lorentzians: bad sample arrays");
  const double lo = x.front();
  const double hi = x.back();
  for (double c : init_centers)
    if (c < lo || c > hi)
      throw Error("fit_lorentzians: initial center " + fmt_g10(c) +
                  " outside histogram range");
  for (int i = 0; i < n_peaks; ++i)
    for (int j = i + 1; j < n_peaks; ++j)
      if (std::abs(init_centers[i] - init_centers[j]) < 1e-6)
        throw Error("fit_lorentzians: degenerate initial centers");

  const int m = static_cast<int>(x.size());

  // init: fwhm half a nanosecond, area = windowed counts around each center
  std::vector<double> p(3 * n_peaks);
  for (int k = 0; k < n_peaks; ++k) {
    double windowed = 0.0;
    for (int i = 0; i < m; ++i)
      if (std::abs(x[i] - init_centers[k]) <= 1.0) windowed += y[i];
    p[3 * k] = init_centers[k];
    p[3 * k + 1] = 0.5;
    p[3 * k + 2] = std::max(1.0, windowed);
  }

  // model in counts per bin: bin_w * sum_k area_k * shape_k(x)
  ResidualFn fn = [&](const std::vector<double>& par, std::vector<double>& r,
                      std::vector<double>& jac) {
    const int np = static_cast<int>(par.size());
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int k = 0; k < n_peaks; ++k) {
        const LorShape s = lorentz(x[i], par[3 * k], par[3 * k + 1]);
        const double a = par[3 * k + 2];
        v += a * s.value * bin_w;
        jac[i * np + 3 * k] = a * s.d_center * bin_w;
        jac[i * np + 3 * k + 1] = a * s.d_fwhm * bin_w;
        jac[i * np + 3 * k + 2] = s.value * bin_w;
      }
      r[i] = v - y[i];
    }
  };

  const LmResult lm = levenberg_marquardt(fn, p, m, 500);

  LorentzianFit out;
  out.report.model = "lorentzian_sum_" + std::to_string(n_peaks);
  out.report.converged = lm.converged;
  out.report.iterations = lm.iterations;
  out.report.residual_rms = std::sqrt(2.0 * lm.cost / m);
  for (int k = 0; k < n_peaks; ++k) {
    LorentzianPeak pk;
    pk.center_ns = lm.params[3 * k];
    pk.fwhm_ns = std::abs(lm.params[3 * k + 1]);
    pk.area = lm.params[3 * k + 2];
    pk.se_center = lm.se[3 * k];
    pk.se_fwhm = lm.se[3 * k + 1];
    pk.se_area = lm.se[3 * k + 2];
    out.peaks.push_back(pk);
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const LorentzianPeak& a, const LorentzianPeak& b) {
              return a.center_ns < b.center_ns;
            });
  return out;
}

LorentzianFit fit_peaks_individually(const CoincidenceHistogram& hist,
                                     const std::vector<double>& centers,
                                     double half_window_ns) {
  LorentzianFit out;
  out.report.model = "lorentzian_per_peak";
  out.report.converged = true;
  const int m = static_cast<int>(hist.counts.size());
  const double bin_w =
      (hist.bin_edges_ns.back() - hist.bin_edges_ns.front()) / m;
  double cost2 = 0.0;
  int n_samples = 0;
  for (double c : centers) {
    std::vector<double> x, y;
    histogram_slice(hist, c - half_window_ns, c + half_window_ns, x, y);
    const LorentzianFit one = fit_lorentzians_xy(x, y, bin_w, 1, {c});
    out.peaks.push_back(one.peaks.front());
    out.report.converged = out.report.converged && one.report.converged;
    out.report.iterations += one.report.iterations;
    cost2 += one.report.residual_rms * one.report.residual_rms *
             static_cast<double>(x.size());
    n_samples += static_cast<int>(x.size());
  }
  out.report.residual_rms =
      n_samples ? std::sqrt(cost2 / n_samples) : 0.0;
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const LorentzianPeak& a, const LorentzianPeak& b) {
              return a.center_ns < b.center_ns;
            });
  return out;
}

HomVisibility hom_visibility(const std::vector<LorentzianPeak>& peaks_co,
                             const std::vector<LorentzianPeak>& peaks_cross,
                             double reflectance, double transmittance,
                             double mode_overlap) {
  auto central = [](const std::vector<LorentzianPeak>& pk,
                    const char* which) -> const LorentzianPeak& {
    const LorentzianPeak* best = nullptr;
    for (const auto& q : pk)
      if (std::abs(q.center_ns) <= 0.5 &&
          (!best || std::abs(q.center_ns) < std::abs(best->center_ns)))
        best = &q;
    if (!best)
      throw Error(std::string("hom_visibility: no central peak in ") + which +
                  " data");
    return *best;
  };
  const LorentzianPeak& co = central(peaks_co, "co-polarized");
  const LorentzianPeak& cross = central(peaks_cross, "cross-polarized");
  if (cross.area <= 0.0)
    throw Error("hom_visibility: empty cross-polarized central peak");

  HomVisibility v;
  v.v_raw = (cross.area - co.area) / cross.area;
  const double r = reflectance, t = transmittance;
  const double eps = 1.0 - mode_overlap;
  const double denom = 2.0 * r * t * (1.0 - eps) * (1.0 - eps);
  if (denom <= 0.0) throw Error("hom_visibility: degenerate beam splitter");
  v.v_corrected = v.v_raw * (r * r + t * t) / denom;
  if (v.v_corrected < 0.0 || v.v_corrected > 1.0) {
    v.v_corrected = std::clamp(v.v_corrected, 0.0, 1.0);
    v.clipped = true;
  }
  return v;
}

RabiFit fit_damped_rabi(const RabiCurve& curve) {
  const int m = static_cast<int>(curve.pulse_areas_pi.size());
  if (m != static_cast<int>(curve.populations.size()))
    throw Error("fit_damped_rabi: length mismatch");
  if (m < 8) throw Error("fit_damped_rabi: need at least 8 samples");
  const auto [mn, mx] = std::minmax_element(curve.pulse_areas_pi.begin(),
                                            curve.pulse_areas_pi.end());
  if (*mx - *mn < 2.0)
    throw Error("fit_damped_rabi: samples must span at least 2 pi");

  const auto [pmn, pmx] =
      std::minmax_element(curve.populations.begin(), curve.populations.end());
  std::vector<double> p = {std::max(*pmx - *pmn, 0.1), 0.05, *pmn};

  ResidualFn fn = [&](const std::vector<double>& par, std::vector<double>& r,
                      std::vector<double>& jac) {
    const double amp = par[0], kap = std::abs(par[1]), off = par[2];
    const double sgn = par[1] >= 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < m; ++i) {
      const double theta = curve.pulse_areas_pi[i] * kPi;
      const double e = std::exp(-kap * theta);
      const double c = std::cos(theta);
      const double shape = 0.5 * (1.0 - e * c);
      r[i] = off + amp * shape - curve.populations[i];
      jac[i * 3 + 0] = shape;
      jac[i * 3 + 1] = sgn * amp * 0.5 * theta * e * c;
      jac[i * 3 + 2] = 1.0;
    }
  };

  const LmResult lm = levenberg_marquardt(fn, p, m, 500);
  RabiFit out;
  out.amplitude = lm.params[0];
  out.kappa = std::abs(lm.params[1]);
  out.offset = lm.params[2];
  out.se_amplitude = lm.se[0];
  out.se_kappa = lm.se[1];
  out.se_offset = lm.se[2];
  out.report.model = "damped_rabi";
  out.report.converged = lm.converged;
  out.report.iterations = lm.iterations;
  out.report.residual_rms = std::sqrt(2.0 * lm.cost / m);
  return out;
}

FssFit fit_fss(const FssScan& scan) {
  const int m = static_cast<int>(scan.angles_deg.size());
  if (m != static_cast<int>(scan.delta_e_ueV.size()))
    throw Error("fit_fss: length mismatch");
  if (m < 8) throw Error("fit_fss: need at least 8 angle samples");
  for (double a : scan.angles_deg)
    if (a < 0.0 || a >= 180.0)
      throw Error("fit_fss: angles must lie in [0, 180)");
  const auto [mn, mx] =
      std::minmax_element(scan.angles_deg.begin(), scan.angles_deg.end());
  if (*mx - *mn < 90.0)
    throw Error("fit_fss: scan must span at least 90 degrees of rotation");

  // linear model delta_e = offset + A cos(4 theta) + B sin(4 theta)
  std::vector<double> xtx(9, 0.0), xty(3, 0.0);
  for (int i = 0; i < m; ++i) {
    const double arg = 4.0 * scan.angles_deg[i] * kPi / 180.0;
    const double row[3] = {1.0, std::cos(arg), std::sin(arg)};
    for (int a = 0; a < 3; ++a) {
      xty[a] += row[a] * scan.delta_e_ueV[i];
      for (int b = 0; b < 3; ++b) xtx[a * 3 + b] += row[a] * row[b];
    }
  }
  std::vector<double> beta;
  if (!solve_sym(xtx, xty, 3, beta))
    throw Error("fit_fss: underdetermined scan");

  const double off = beta[0], ca = beta[1], sb = beta[2];
  FssFit out;
  out.offset_ueV = off;
  out.fss_ueV = std::hypot(ca, sb);
  out.phase_deg = std::atan2(-sb, ca) * 180.0 / kPi;

  // residuals and covariance
  double rss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double arg = 4.0 * scan.angles_deg[i] * kPi / 180.0;
    const double fit = off + ca * std::cos(arg) + sb * std::sin(arg);
    const double r = fit - scan.delta_e_ueV[i];
    rss += r * r;
  }
  out.report.model = "fss_waveplate";
  out.report.converged = true;
  out.report.iterations = 1;
  out.report.residual_rms = std::sqrt(rss / m);
  if (m > 3) {
    const double sigma2 = rss / (m - 3);
    double var_a = 0.0, var_b = 0.0, cov_ab = 0.0;
    for (int a = 0; a < 3; ++a) {
      std::vector<double> e(3, 0.0), col;
      e[a] = 1.0;
      if (!solve_sym(xtx, std::move(e), 3, col)) continue;
      if (a == 1) {
        var_a = sigma2 * col[1];
        cov_ab = sigma2 * col[2];
      }
      if (a == 2) var_b = sigma2 * col[2];
    }
    if (out.fss_ueV > 1e-12) {
      const double v = (ca * ca * var_a + sb * sb * var_b +
                        2.0 * ca * sb * cov_ab) /
                       (out.fss_ueV * out.fss_ueV);
      out.se_fss = std::sqrt(std::max(0.0, v));
    } else {
      out.se_fss = std::sqrt(std::max(var_a, var_b));
    }
  }
  return out;
}

namespace {
std::string report_header(const FitReport& r) {
  std::string out = "# fit report: model=" + r.model;
  out += " converged=" + std::to_string(r.converged ? 1 : 0);
  out += " iterations=" + std::to_string(r.iterations);
  out += " residual_rms=" + fmt_g6(r.residual_rms) + "\n";
  return out;
}
}  // namespace

std::string lorentzian_fit_to_text(const LorentzianFit& fit) {
  std::string out = report_header(fit.report);
  out += "center_ns,fwhm_ns,area,se_center,se_fwhm,se_area\n";
  for (const auto& p : fit.peaks) {
    out += fmt_g10(p.center_ns) + "," + fmt_g10(p.fwhm_ns) + "," +
           fmt_g10(p.area) + "," + fmt_g6(p.se_center) + "," +
           fmt_g6(p.se_fwhm) + "," + fmt_g6(p.se_area) + "\n";
  }
  return out;
}

std::string rabi_fit_to_text(const RabiFit& fit) {
  std::string out = report_header(fit.report);
  out += "amplitude = " + fmt_g6(fit.amplitude) + " +- " +
         fmt_g6(fit.se_amplitude) + "\n";
  out += "kappa = " + fmt_g6(fit.kappa) + " +- " + fmt_g6(fit.se_kappa) + "\n";
  out += "offset = " + fmt_g6(fit.offset) + " +- " + fmt_g6(fit.se_offset) +
         "\n";
  return out;
}

std::string fss_fit_to_text(const FssFit& fit) {
  std::string out = report_header(fit.report);
  out += "fss_ueV = " + fmt_g6(fit.fss_ueV) + " +- " + fmt_g6(fit.se_fss) +
         "\n";
  out += "phase_deg = " + fmt_g6(fit.phase_deg) + "\n";
  out += "offset_ueV = " + fmt_g6(fit.offset_ueV) + "\n";
  return out;
}

}  // namespace qdc
