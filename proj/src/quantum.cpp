#include "qdc/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qdc {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite value");
}

}  // namespace

char pol_label(Pol p) {
  switch (p) {
    case Pol::H: return 'H';
    case Pol::V: return 'V';
    case Pol::D: return 'D';
    case Pol::A: return 'A';
    case Pol::R: return 'R';
    case Pol::L: return 'L';
  }
  throw Error("pol_label: bad enum");
}

Pol pol_from_label(char c) {
  switch (c) {
    case 'H': return Pol::H;
    case 'V': return Pol::V;
    case 'D': return Pol::D;
    case 'A': return Pol::A;
    case 'R': return Pol::R;
    case 'L': return Pol::L;
    default: break;
  }
  throw Error(std::string("unknown polarization label '") + c + "'");
}

// -----------------------------------------------------------------------
// kets
// -----------------------------------------------------------------------

Ket2::Ket2(cplx h, cplx v) {
  a = {h, v};
  const double n = std::sqrt(std::norm(h) + std::norm(v));
  check_finite(n, "Ket2");
  if (n == 0.0) throw Error("Ket2: cannot normalize zero vector");
  a[0] /= n;
  a[1] /= n;
}

double Ket2::norm() const {
  return std::sqrt(std::norm(a[0]) + std::norm(a[1]));
}

cplx inner(const Ket2& x, const Ket2& y) {
  return std::conj(x.a[0]) * y.a[0] + std::conj(x.a[1]) * y.a[1];
}

Ket4::Ket4(cplx hh, cplx hv, cplx vh, cplx vv) {
  a = {hh, hv, vh, vv};
  double n2 = 0.0;
  for (const auto& c : a) n2 += std::norm(c);
  const double n = std::sqrt(n2);
  check_finite(n, "Ket4");
  if (n == 0.0) throw Error("Ket4: cannot normalize zero vector");
  for (auto& c : a) c /= n;
}

double Ket4::norm() const {
  double n2 = 0.0;
  for (const auto& c : a) n2 += std::norm(c);
  return std::sqrt(n2);
}

cplx inner(const Ket4& x, const Ket4& y) {
  cplx s = 0.0;
  for (int i = 0; i < 4; ++i) s += std::conj(x.a[i]) * y.a[i];
  return s;
}

Ket2 standard_ket(Pol p) {
  switch (p) {
    case Pol::H: return Ket2(1.0, 0.0);
    case Pol::V: return Ket2(0.0, 1.0);
    case Pol::D: return Ket2(kInvSqrt2, kInvSqrt2);
    case Pol::A: return Ket2(kInvSqrt2, -kInvSqrt2);
    case Pol::R: return Ket2(kInvSqrt2, cplx(0.0, -kInvSqrt2));
    case Pol::L: return Ket2(kInvSqrt2, cplx(0.0, kInvSqrt2));
  }
  throw Error("standard_ket: bad enum");
}

std::array<Ket2, 6> standard_kets() {
  return {standard_ket(Pol::H), standard_ket(Pol::V), standard_ket(Pol::D),
          standard_ket(Pol::A), standard_ket(Pol::R), standard_ket(Pol::L)};
}

Ket4 psi_plus() { return Ket4(kInvSqrt2, 0.0, 0.0, kInvSqrt2); }

// -----------------------------------------------------------------------
// operators
// -----------------------------------------------------------------------

Mat2 Mat2::identity() {
  Mat2 r;
  r.at(0, 0) = 1.0;
  r.at(1, 1) = 1.0;
  return r;
}

Mat2 Mat2::pauli_x() {
  Mat2 r;
  r.at(0, 1) = 1.0;
  r.at(1, 0) = 1.0;
  return r;
}

Mat2 Mat2::pauli_y() {
  Mat2 r;
  r.at(0, 1) = cplx(0.0, -1.0);
  r.at(1, 0) = cplx(0.0, 1.0);
  return r;
}

Mat2 outer(const Ket2& x, const Ket2& y) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.at(i, j) = x.a[i] * std::conj(y.a[j]);
  return r;
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < 2; ++k) s += a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Matrix4 Matrix4::identity() {
  Matrix4 r;
  for (int i = 0; i < 4; ++i) r.at(i, i) = 1.0;
  return r;
}

Matrix4 Matrix4::adjoint() const {
  Matrix4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.at(i, j) = std::conj(at(j, i));
  return r;
}

Matrix4 Matrix4::conj() const {
  Matrix4 r;
  for (int i = 0; i < 16; ++i) r.m[i] = std::conj(m[i]);
  return r;
}

cplx Matrix4::trace() const {
  return at(0, 0) + at(1, 1) + at(2, 2) + at(3, 3);
}

Ket4 Matrix4::apply_raw(const Ket4& v) const {
  Ket4 r;
  for (int i = 0; i < 4; ++i) {
    cplx s = 0.0;
    for (int j = 0; j < 4; ++j) s += at(i, j) * v.a[j];
    r.a[i] = s;
  }
  return r;
}

double Matrix4::max_abs() const {
  double m0 = 0.0;
  for (const auto& c : m) m0 = std::max(m0, std::abs(c));
  return m0;
}

Matrix4 operator+(const Matrix4& a, const Matrix4& b) {
  Matrix4 r;
  for (int i = 0; i < 16; ++i) r.m[i] = a.m[i] + b.m[i];
  return r;
}

Matrix4 operator-(const Matrix4& a, const Matrix4& b) {
  Matrix4 r;
  for (int i = 0; i < 16; ++i) r.m[i] = a.m[i] - b.m[i];
  return r;
}

Matrix4 operator*(const Matrix4& a, const Matrix4& b) {
  Matrix4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Matrix4 operator*(cplx s, const Matrix4& a) {
  Matrix4 r;
  for (int i = 0; i < 16; ++i) r.m[i] = s * a.m[i];
  return r;
}

Matrix4 operator*(double s, const Matrix4& a) { return cplx(s, 0.0) * a; }

Matrix4 tensor(const Mat2& xx, const Mat2& x) {
  Matrix4 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          r.at(2 * i + k, 2 * j + l) = xx.at(i, j) * x.at(k, l);
  return r;
}

Ket4 tensor_ket(const Ket2& xx, const Ket2& x) {
  return Ket4::raw({xx.a[0] * x.a[0], xx.a[0] * x.a[1], xx.a[1] * x.a[0],
                    xx.a[1] * x.a[1]});
}

Matrix4 outer(const Ket4& x, const Ket4& y) {
  Matrix4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.at(i, j) = x.a[i] * std::conj(y.a[j]);
  return r;
}

MeasurementSetting MeasurementSetting::from_label(const std::string& label) {
  if (label.size() != 2)
    throw Error("measurement setting label must have two letters, got '" +
                label + "'");
  MeasurementSetting s;
  s.xx = Projector2{standard_ket(pol_from_label(label[0]))};
  s.x = Projector2{standard_ket(pol_from_label(label[1]))};
  s.label = label;
  return s;
}

// -----------------------------------------------------------------------
// density matrix validation
// -----------------------------------------------------------------------

void validate_density_matrix(const Matrix4& rho) {
  for (const auto& c : rho.m) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error("density matrix: non-finite entry");
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const cplx d = rho.at(i, j) - std::conj(rho.at(j, i));
      if (std::abs(d) > 1e-10)
        throw Error("density matrix: not Hermitian (entry " +
                    std::to_string(i) + "," + std::to_string(j) + ")");
    }
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-10)
    throw Error("density matrix: trace " + std::to_string(tr.real()) +
                " != 1");
  const EigSystem es = eig_hermitian(rho);
  if (es.values[3] < -1e-9)
    throw Error("density matrix: negative eigenvalue " +
                std::to_string(es.values[3]));
}

DensityMatrix4 DensityMatrix4::from(const Matrix4& rho) {
  validate_density_matrix(rho);
  DensityMatrix4 d;
  // exact re-Hermitization so downstream arithmetic sees a symmetric object
  for (int i = 0; i < 4; ++i) {
    d.m.at(i, i) = rho.at(i, i).real();
    for (int j = i + 1; j < 4; ++j) {
      const cplx v = 0.5 * (rho.at(i, j) + std::conj(rho.at(j, i)));
      d.m.at(i, j) = v;
      d.m.at(j, i) = std::conj(v);
    }
  }
  return d;
}

// -----------------------------------------------------------------------
// complex Jacobi eigensolver
// -----------------------------------------------------------------------

namespace {

double offdiag_norm(const Matrix4& a) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) s += std::norm(a.at(i, j));
  return std::sqrt(s);
}

}  // namespace

EigSystem eig_hermitian(const Matrix4& hermitian) {
  Matrix4 a = hermitian;
  // enforce exact Hermitian form before iterating
  for (int i = 0; i < 4; ++i) {
    a.at(i, i) = a.at(i, i).real();
    for (int j = i + 1; j < 4; ++j) {
      const cplx v = 0.5 * (a.at(i, j) + std::conj(a.at(j, i)));
      a.at(i, j) = v;
      a.at(j, i) = std::conj(v);
    }
  }

  Matrix4 v = Matrix4::identity();
  const double scale = std::max(1.0, a.max_abs());
  const double tol = 1e-12 * scale;
  const int kMaxSweeps = 200;

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (offdiag_norm(a) <= tol) break;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 4; ++q) {
        const cplx apq = a.at(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-300) continue;
        // phase that makes the pivot real, then a real Jacobi rotation
        const cplx phase = apq / r;  // e^{i phi}
        const double app = a.at(p, p).real();
        const double aqq = a.at(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // unitary U: U(p,p)=c, U(p,q)=s, U(q,p)=-s*conj(phase), U(q,q)=c*conj(phase)
        const cplx upq = s;
        const cplx uqp = -s * std::conj(phase);
        const cplx uqq = c * std::conj(phase);
        // columns: B = A U
        for (int k = 0; k < 4; ++k) {
          const cplx akp = a.at(k, p);
          const cplx akq = a.at(k, q);
          a.at(k, p) = c * akp + uqp * akq;
          a.at(k, q) = upq * akp + uqq * akq;
        }
        // rows: A' = U^dagger B
        for (int k = 0; k < 4; ++k) {
          const cplx apk = a.at(p, k);
          const cplx aqk = a.at(q, k);
          a.at(p, k) = c * apk + std::conj(uqp) * aqk;
          a.at(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        a.at(p, p) = a.at(p, p).real();
        a.at(q, q) = a.at(q, q).real();
        // accumulate eigenvectors
        for (int k = 0; k < 4; ++k) {
          const cplx vkp = v.at(k, p);
          const cplx vkq = v.at(k, q);
          v.at(k, p) = c * vkp + uqp * vkq;
          v.at(k, q) = upq * vkp + uqq * vkq;
        }
      }
  }
  if (sweep == kMaxSweeps && offdiag_norm(a) > tol)
    throw Error("eig_hermitian: no convergence after 200 sweeps, residual " +
                std::to_string(offdiag_norm(a)));

  std::array<int, 4> order = {0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const double di = a.at(i, i).real();
    const double dj = a.at(j, j).real();
    if (di != dj) return di > dj;
    return i < j;
  });

  EigSystem es;
  for (int n = 0; n < 4; ++n) {
    const int k = order[n];
    es.values[n] = a.at(k, k).real();
    std::array<cplx, 4> col;
    double n2 = 0.0;
    for (int i = 0; i < 4; ++i) {
      col[i] = v.at(i, k);
      n2 += std::norm(col[i]);
    }
    const double nn = std::sqrt(n2);
    for (auto& c : col) c /= nn;
    es.vectors[n] = Ket4::raw(col);
  }
  return es;
}

double trace_distance(const Matrix4& a, const Matrix4& b) {
  const EigSystem es = eig_hermitian(a - b);
  double s = 0.0;
  for (double v : es.values) s += std::abs(v);
  return 0.5 * s;
}

// -----------------------------------------------------------------------
// serialization
// -----------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string dm_to_text(const Matrix4& rho,
                       const std::vector<std::string>& header_comments) {
  std::string out;
  for (const auto& c : header_comments) out += "# " + c + "\n";
  out += "basis HH,HV,VH,VV\n";
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j) out += ' ';
      out += fmt17(rho.at(i, j).real());
      out += ' ';
      out += fmt17(rho.at(i, j).imag());
    }
    out += '\n';
  }
  return out;
}

Matrix4 dm_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool basis_seen = false;
  Matrix4 rho;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!basis_seen) {
      if (line != "basis HH,HV,VH,VV")
        throw Error("density matrix file: expected 'basis HH,HV,VH,VV', got '" +
                    line + "'");
      basis_seen = true;
      continue;
    }
    if (row >= 4) throw Error("density matrix file: too many rows");
    std::istringstream ls(line);
    for (int j = 0; j < 4; ++j) {
      double re = 0.0, im = 0.0;
      if (!(ls >> re >> im))
        throw Error("density matrix file: bad row " + std::to_string(row));
      rho.at(row, j) = cplx(re, im);
    }
    ++row;
  }
  if (!basis_seen || row != 4)
    throw Error("density matrix file: incomplete");
  return rho;
}

}  // namespace qdc
