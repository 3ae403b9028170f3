#pragma once
// Exact 2x2 / 4x4 complex linear algebra on the two-photon polarization
// space. The basis order is fixed everywhere as (HH, HV, VH, VV) with the
// XX photon as the left tensor factor; construction helpers assert it so
// the ordering cannot silently drift.
//
// Circular convention (frozen): R = (H - iV)/sqrt(2), L = (H + iV)/sqrt(2).

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "qdc/common.hpp"

namespace qdc {

using cplx = std::complex<double>;

enum class Pol { H, V, D, A, R, L };
char pol_label(Pol p);
Pol pol_from_label(char c);

// -----------------------------------------------------------------------
// kets
// -----------------------------------------------------------------------

struct Ket2 {
  std::array<cplx, 2> a{};  // (H, V) amplitudes

  Ket2() = default;
  Ket2(cplx h, cplx v);  // normalizes; throws on zero norm
  double norm() const;
};

cplx inner(const Ket2& x, const Ket2& y);  // <x|y>

struct Ket4 {
  std::array<cplx, 4> a{};  // (HH, HV, VH, VV) amplitudes

  Ket4() = default;
  Ket4(cplx hh, cplx hv, cplx vh, cplx vv);  // normalizes; throws on zero norm
  static Ket4 raw(const std::array<cplx, 4>& amps) {
    Ket4 k;
    k.a = amps;
    return k;
  }
  double norm() const;
};

cplx inner(const Ket4& x, const Ket4& y);

Ket2 standard_ket(Pol p);
// the six polarization states {H, V, D, A, R, L} in enum order
std::array<Ket2, 6> standard_kets();
Ket4 psi_plus();  // (|HH> + |VV>)/sqrt(2)

// -----------------------------------------------------------------------
// operators
// -----------------------------------------------------------------------

struct Mat2 {
  std::array<cplx, 4> m{};

  cplx& at(int i, int j) { return m[2 * i + j]; }
  const cplx& at(int i, int j) const { return m[2 * i + j]; }
  static Mat2 identity();
  static Mat2 pauli_x();
  static Mat2 pauli_y();
};

Mat2 outer(const Ket2& x, const Ket2& y);  // |x><y|
Mat2 operator*(const Mat2& a, const Mat2& b);

struct Matrix4 {
  std::array<cplx, 16> m{};

  cplx& at(int i, int j) { return m[4 * i + j]; }
  const cplx& at(int i, int j) const { return m[4 * i + j]; }

  static Matrix4 identity();
  static Matrix4 zero() { return Matrix4{}; }

  Matrix4 adjoint() const;
  Matrix4 conj() const;  // entrywise conjugate
  cplx trace() const;
  Ket4 apply_raw(const Ket4& v) const;  // matrix-vector, no normalization
  double max_abs() const;
};

Matrix4 operator+(const Matrix4& a, const Matrix4& b);
Matrix4 operator-(const Matrix4& a, const Matrix4& b);
Matrix4 operator*(const Matrix4& a, const Matrix4& b);
Matrix4 operator*(cplx s, const Matrix4& a);
Matrix4 operator*(double s, const Matrix4& a);

// Kronecker product, XX-photon factor on the left.
Matrix4 tensor(const Mat2& xx, const Mat2& x);
Ket4 tensor_ket(const Ket2& xx, const Ket2& x);
Matrix4 outer(const Ket4& x, const Ket4& y);  // |x><y|

// -----------------------------------------------------------------------
// projectors and measurement settings
// -----------------------------------------------------------------------

struct Projector2 {
  Ket2 direction;
  Mat2 matrix() const { return outer(direction, direction); }
};

// One tomography / correlation configuration: projector on the XX arm and
// on the X arm, with a two-letter label like "HH" or "DR".
struct MeasurementSetting {
  Projector2 xx;
  Projector2 x;
  std::string label;

  static MeasurementSetting from_label(const std::string& label);
  Matrix4 projector4() const { return tensor(xx.matrix(), x.matrix()); }
  Ket4 ket() const { return tensor_ket(xx.direction, x.direction); }
};

// -----------------------------------------------------------------------
// density matrices
// -----------------------------------------------------------------------

// Shared validator: Hermitian within 1e-10 entrywise, trace 1 within 1e-10,
// minimum eigenvalue >= -1e-9. Throws Error naming the violated invariant.
void validate_density_matrix(const Matrix4& rho);

struct DensityMatrix4 {
  Matrix4 m;

  // Validates, then stores the exactly re-Hermitized matrix.
  static DensityMatrix4 from(const Matrix4& rho);
};

// -----------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic complex Jacobi, fixed 4x4)
// -----------------------------------------------------------------------

struct EigSystem {
  std::array<double, 4> values;  // descending
  std::array<Ket4, 4> vectors;   // orthonormal, vectors[i] for values[i]
};

// Input must be Hermitian (within roundoff). Iteration cap 200 sweeps,
// off-diagonal tolerance 1e-12 relative to the matrix scale; on failure
// throws Error carrying the residual norm.
EigSystem eig_hermitian(const Matrix4& hermitian);

// 0.5 * sum |eig(a - b)|
double trace_distance(const Matrix4& a, const Matrix4& b);

// -----------------------------------------------------------------------
// serialization: structured text, bit-faithful at 17 significant digits
// -----------------------------------------------------------------------

std::string dm_to_text(const Matrix4& rho,
                       const std::vector<std::string>& header_comments = {});
Matrix4 dm_from_text(const std::string& text);

}  // namespace qdc
