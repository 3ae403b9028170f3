#include "qdc/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdc/io_util.hpp"
#include "qdc/rng.hpp"

namespace qdc {

namespace {

// parameter layout of the lower-triangular factor T:
//   t[0..3]   real diagonal
//   t[4..15]  (re, im) pairs for (1,0), (2,0), (2,1), (3,0), (3,1), (3,2)
constexpr int kOffRow[6] = {1, 2, 2, 3, 3, 3};
constexpr int kOffCol[6] = {0, 0, 1, 0, 1, 2};

Matrix4 t_from_params(const std::array<double, 16>& t) {
  Matrix4 m;
  for (int i = 0; i < 4; ++i) m.at(i, i) = t[i];
  for (int k = 0; k < 6; ++k)
    m.at(kOffRow[k], kOffCol[k]) = cplx(t[4 + 2 * k], t[5 + 2 * k]);
  return m;
}

Matrix4 rho_unnormalized(const Matrix4& t) { return t.adjoint() * t; }

// lower-triangular T with a = T^dagger T: factor the index-reversed matrix
// with standard Cholesky (L L^dagger) and map back through the reversal
Matrix4 cholesky_factor(const Matrix4& a) {
  Matrix4 ar;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ar.at(i, j) = a.at(3 - i, 3 - j);
  Matrix4 l;
  for (int j = 0; j < 4; ++j) {
    cplx diag = ar.at(j, j);
    for (int k = 0; k < j; ++k) diag -= l.at(j, k) * std::conj(l.at(j, k));
    const double d = diag.real();
    if (d <= 0.0) throw Error("cholesky: matrix not positive definite");
    l.at(j, j) = std::sqrt(d);
    for (int i = j + 1; i < 4; ++i) {
      cplx v = ar.at(i, j);
      for (int k = 0; k < j; ++k) v -= l.at(i, k) * std::conj(l.at(j, k));
      l.at(i, j) = v / l.at(j, j).real();
    }
  }
  Matrix4 t;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j <= i; ++j) t.at(i, j) = std::conj(l.at(3 - j, 3 - i));
  return t;
}

std::array<double, 16> params_from_t(const Matrix4& t) {
  std::array<double, 16> p{};
  for (int i = 0; i < 4; ++i) p[i] = t.at(i, i).real();
  for (int k = 0; k < 6; ++k) {
    p[4 + 2 * k] = t.at(kOffRow[k], kOffCol[k]).real();
    p[5 + 2 * k] = t.at(kOffRow[k], kOffCol[k]).imag();
  }
  return p;
}

// Gaussian elimination with partial pivoting; solves a x = b in place
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                int n, const char* what) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-12)
      throw Error(std::string(what) + ": singular system");
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
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

// Hermitian operator basis: 4 diagonal units, 6 symmetric pairs, 6
// antisymmetric pairs
Matrix4 hermitian_basis(int k) {
  Matrix4 m;
  if (k < 4) {
    m.at(k, k) = 1.0;
    return m;
  }
  static const int pr[6] = {0, 0, 0, 1, 1, 2};
  static const int pc[6] = {1, 2, 3, 2, 3, 3};
  if (k < 10) {
    const int i = pr[k - 4], j = pc[k - 4];
    m.at(i, j) = 1.0;
    m.at(j, i) = 1.0;
  } else {
    const int i = pr[k - 10], j = pc[k - 10];
    m.at(i, j) = cplx(0.0, 1.0);
    m.at(j, i) = cplx(0.0, -1.0);
  }
  return m;
}

double real_trace_product(const Matrix4& a, const Matrix4& b) {
  cplx s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += a.at(i, j) * b.at(j, i);
  return s.real();
}

}  // namespace

std::array<MeasurementSetting, 16> canonical_settings() {
  static const Pol basis[4] = {Pol::H, Pol::V, Pol::D, Pol::R};
  std::array<MeasurementSetting, 16> out;
  int n = 0;
  for (Pol a : basis)
    for (Pol b : basis) {
      std::string label{pol_label(a), pol_label(b)};
      out[n++] = MeasurementSetting::from_label(label);
    }
  return out;
}

void TomographyCounts::validate() const {
  if (settings.size() != counts.size() ||
      (!exposure.empty() && exposure.size() != settings.size()))
    throw Error("tomography counts: length mismatch");
  if (settings.empty()) throw Error("tomography counts: empty");
  for (double w : exposure)
    if (!(w > 0.0)) throw Error("tomography counts: exposure must be > 0");
}

TomographyCounts simulate_counts(const DensityMatrix4& rho,
                                 const std::vector<MeasurementSetting>& settings,
                                 double n_per_setting, std::uint64_t seed) {
  if (!(n_per_setting > 0.0))
    throw Error("simulate_counts: n_per_setting must be > 0");
  TomographyCounts out;
  out.settings = settings;
  out.exposure.assign(settings.size(), 1.0);
  out.counts.resize(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const Ket4 v = settings[s].ket();
    const double p = std::max(0.0, inner(v, rho.m.apply_raw(v)).real());
    Rng rng(seed, stream_id::kTomography, s);
    out.counts[s] = rng.poisson(n_per_setting * p);
  }
  return out;
}

LinearInversionResult linear_inversion(const TomographyCounts& data) {
  data.validate();
  const std::size_t ns = data.settings.size();
  const auto& w = data.exposure;
  auto weight = [&](std::size_t s) { return w.empty() ? 1.0 : w[s]; };

  // pair flux from the rectilinear subset, which forms a complete basis
  double flux = 0.0;
  int flux_terms = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    const std::string& l = data.settings[s].label;
    if (l == "HH" || l == "HV" || l == "VH" || l == "VV") {
      flux += static_cast<double>(data.counts[s]) / weight(s);
      ++flux_terms;
    }
  }
  if (flux_terms != 4)
    throw Error(
        "linear_inversion: settings must include the rectilinear basis "
        "HH,HV,VH,VV to fix the pair flux");
  if (flux <= 0.0) throw Error("linear_inversion: no counts");

  if (ns < 16)
    throw Error("linear_inversion: need at least 16 settings, got " +
                std::to_string(ns));

  // least-squares design over the 16-dimensional Hermitian space (exact
  // solve when ns == 16)
  std::vector<double> m(16 * 16, 0.0);
  std::vector<double> rhs(16, 0.0);
  std::vector<double> design(ns * 16);
  for (std::size_t s = 0; s < ns; ++s) {
    const Matrix4 proj = data.settings[s].projector4();
    for (int k = 0; k < 16; ++k)
      design[s * 16 + k] = real_trace_product(hermitian_basis(k), proj);
  }
  for (std::size_t s = 0; s < ns; ++s) {
    const double p = static_cast<double>(data.counts[s]) / (weight(s) * flux);
    for (int i = 0; i < 16; ++i) {
      rhs[i] += design[s * 16 + i] * p;
      for (int j = 0; j < 16; ++j)
        m[i * 16 + j] += design[s * 16 + i] * design[s * 16 + j];
    }
  }
  std::vector<double> c;
  try {
    c = solve_dense(std::move(m), std::move(rhs), 16, "linear_inversion");
  } catch (const Error&) {
    throw Error(
        "linear_inversion: singular design matrix, settings are not "
        "informationally complete");
  }

  Matrix4 rho;
  for (int k = 0; k < 16; ++k) rho = rho + c[k] * hermitian_basis(k);
  // exact re-Hermitization and unit trace
  for (int i = 0; i < 4; ++i) {
    rho.at(i, i) = rho.at(i, i).real();
    for (int j = i + 1; j < 4; ++j) {
      const cplx v = 0.5 * (rho.at(i, j) + std::conj(rho.at(j, i)));
      rho.at(i, j) = v;
      rho.at(j, i) = std::conj(v);
    }
  }
  const double tr = rho.trace().real();
  if (tr <= 0.0) throw Error("linear_inversion: non-positive trace");
  rho = (1.0 / tr) * rho;

  LinearInversionResult res;
  res.rho = rho;
  res.min_eigenvalue = eig_hermitian(rho).values[3];
  res.physical = res.min_eigenvalue >= -1e-9;
  return res;
}

double mle_log_likelihood(const TomographyCounts& data,
                          const std::array<double, 16>& t,
                          std::array<double, 16>* grad) {
  const Matrix4 tm = t_from_params(t);
  if (grad) grad->fill(0.0);
  double ll = 0.0;
  for (std::size_t s = 0; s < data.settings.size(); ++s) {
    const double w = data.exposure.empty() ? 1.0 : data.exposure[s];
    const Ket4 v = data.settings[s].ket();
    const Ket4 tv = tm.apply_raw(v);
    double mu = 0.0;
    for (const auto& c : tv.a) mu += std::norm(c);
    mu *= w;
    const double k = static_cast<double>(data.counts[s]);
    const double mu_safe = std::max(mu, 1e-300);
    ll += (k > 0.0 ? k * std::log(mu_safe) : 0.0) - mu;
    if (grad) {
      const double f = (k / mu_safe - 1.0) * w;
      // d mu / d t over the triangular layout
      for (int i = 0; i < 4; ++i)
        (*grad)[i] += f * 2.0 * (std::conj(tv.a[i]) * v.a[i]).real();
      for (int q = 0; q < 6; ++q) {
        const cplx g = std::conj(tv.a[kOffRow[q]]) * v.a[kOffCol[q]];
        (*grad)[4 + 2 * q] += f * 2.0 * g.real();
        (*grad)[5 + 2 * q] += f * -2.0 * g.imag();
      }
    }
  }
  return ll;
}

MleResult mle_reconstruct(const TomographyCounts& data,
                          const std::optional<Matrix4>& init) {
  data.validate();

  // initialization: positive projection of linear inversion (or the given
  // matrix), eigenvalues clipped at 1e-6, scaled to the observed flux
  Matrix4 rho0 = init ? *init : linear_inversion(data).rho;
  {
    const EigSystem es = eig_hermitian(rho0);
    Matrix4 fixed;
    double tr = 0.0;
    for (int n = 0; n < 4; ++n) {
      const double l = std::max(es.values[n], 1e-6);
      fixed = fixed + l * outer(es.vectors[n], es.vectors[n]);
      tr += l;
    }
    rho0 = (1.0 / tr) * fixed;
  }
  double flux_num = 0.0, flux_den = 0.0;
  for (std::size_t s = 0; s < data.settings.size(); ++s) {
    const double w = data.exposure.empty() ? 1.0 : data.exposure[s];
    const Ket4 v = data.settings[s].ket();
    flux_num += static_cast<double>(data.counts[s]);
    flux_den += w * std::max(1e-12, inner(v, rho0.apply_raw(v)).real());
  }
  const double scale = std::max(flux_num / flux_den, 1e-6);
  std::array<double, 16> t = params_from_t(cholesky_factor(scale * rho0));

  // BFGS ascent on ll(t) with Armijo backtracking
  const int kMaxIter = 10000;
  const double kGradTol = 1e-8;
  std::array<double, 16> g{};
  double ll = mle_log_likelihood(data, t, &g);

  std::array<std::array<double, 16>, 16> h{};  // inverse Hessian approx
  for (int i = 0; i < 16; ++i) h[i][i] = 1.0;

  auto inf_norm = [](const std::array<double, 16>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  };

  MleReport rep;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    const double gn = inf_norm(g);
    if (gn < kGradTol) {
      rep.converged = true;
      break;
    }
    // direction d = H g (ascent)
    std::array<double, 16> d{};
    for (int i = 0; i < 16; ++i) {
      double s = 0.0;
      for (int j = 0; j < 16; ++j) s += h[i][j] * g[j];
      d[i] = s;
    }
    double slope = 0.0;
    for (int i = 0; i < 16; ++i) slope += d[i] * g[i];
    if (!(slope > 0.0)) {
      // reset curvature information if the direction degenerated
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) h[i][j] = (i == j) ? 1.0 : 0.0;
      d = g;
      slope = 0.0;
      for (int i = 0; i < 16; ++i) slope += g[i] * g[i];
    }

    double step = 1.0;
    std::array<double, 16> t_new{};
    std::array<double, 16> g_new{};
    double ll_new = -1e308;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < 16; ++i) t_new[i] = t[i] + step * d[i];
      ll_new = mle_log_likelihood(data, t_new, &g_new);
      if (std::isfinite(ll_new) && ll_new >= ll + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled; report best iterate

    // BFGS update of the inverse Hessian
    std::array<double, 16> sv{}, yv{};
    for (int i = 0; i < 16; ++i) {
      sv[i] = t_new[i] - t[i];
      yv[i] = -(g_new[i] - g[i]);  // minimize -ll
    }
    double sy = 0.0;
    for (int i = 0; i < 16; ++i) sy += sv[i] * yv[i];
    if (sy > 1e-12) {
      std::array<double, 16> hy{};
      for (int i = 0; i < 16; ++i) {
        double s = 0.0;
        for (int j = 0; j < 16; ++j) s += h[i][j] * yv[j];
        hy[i] = s;
      }
      double yhy = 0.0;
      for (int i = 0; i < 16; ++i) yhy += yv[i] * hy[i];
      const double c1 = (sy + yhy) / (sy * sy);
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
          h[i][j] += c1 * sv[i] * sv[j] -
                     (hy[i] * sv[j] + sv[i] * hy[j]) / sy;
    }

    t = t_new;
    g = g_new;
    ll = ll_new;
  }

  rep.iterations = iter;
  rep.grad_inf_norm = inf_norm(g);
  rep.log_likelihood = ll;
  if (rep.grad_inf_norm < kGradTol) rep.converged = true;

  Matrix4 raw = rho_unnormalized(t_from_params(t));
  const double tr = raw.trace().real();
  if (!(tr > 0.0)) throw Error("mle_reconstruct: degenerate factor");
  raw = (1.0 / tr) * raw;
  MleResult res{DensityMatrix4::from(raw), rep};
  return res;
}

std::string counts_to_text(const TomographyCounts& data,
                           const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  for (std::size_t s = 0; s < data.settings.size(); ++s) {
    out += data.settings[s].label + "," + std::to_string(data.counts[s]);
    const double w = data.exposure.empty() ? 1.0 : data.exposure[s];
    if (w != 1.0) out += "," + fmt_g17(w);
    out += "\n";
  }
  return out;
}

TomographyCounts counts_from_text(const std::string& text) {
  TomographyCounts out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto parts = split(s, ',');
    if (parts.size() < 2 || parts.size() > 3)
      throw Error("counts file line " + std::to_string(lineno) +
                  ": expected label,count[,exposure]");
    out.settings.push_back(MeasurementSetting::from_label(trim(parts[0])));
    out.counts.push_back(std::stoull(trim(parts[1])));
    out.exposure.push_back(parts.size() == 3 ? std::stod(trim(parts[2])) : 1.0);
  }
  out.validate();
  return out;
}

}  // namespace qdc
