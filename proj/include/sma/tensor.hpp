#pragma once

#include <array>
#include <cmath>

namespace sma {

/// Symmetric second-order tensor in 3D stored as six independent components.
/// All contractions and norms use full-matrix (Frobenius) semantics, so the
/// off-diagonal components count twice in inner products.
struct SymTensor3 {
  double xx = 0.0, yy = 0.0, zz = 0.0;
  double xy = 0.0, yz = 0.0, zx = 0.0;

  static SymTensor3 identity() { return {1.0, 1.0, 1.0, 0.0, 0.0, 0.0}; }

  SymTensor3& operator+=(const SymTensor3& o) {
    xx += o.xx; yy += o.yy; zz += o.zz;
    xy += o.xy; yz += o.yz; zx += o.zx;
    return *this;
  }
  SymTensor3& operator-=(const SymTensor3& o) {
    xx -= o.xx; yy -= o.yy; zz -= o.zz;
    xy -= o.xy; yz -= o.yz; zx -= o.zx;
    return *this;
  }
  SymTensor3& operator*=(double c) {
    xx *= c; yy *= c; zz *= c;
    xy *= c; yz *= c; zx *= c;
    return *this;
  }
};

inline SymTensor3 operator+(SymTensor3 a, const SymTensor3& b) { return a += b; }
inline SymTensor3 operator-(SymTensor3 a, const SymTensor3& b) { return a -= b; }
inline SymTensor3 operator*(double c, SymTensor3 a) { return a *= c; }
inline SymTensor3 operator*(SymTensor3 a, double c) { return a *= c; }
inline SymTensor3 operator-(const SymTensor3& a) { return -1.0 * a; }

inline double trace(const SymTensor3& a) { return a.xx + a.yy + a.zz; }

/// Frobenius contraction a:b of the reconstructed 3x3 matrices.
inline double frob_inner(const SymTensor3& a, const SymTensor3& b) {
  return a.xx * b.xx + a.yy * b.yy + a.zz * b.zz +
         2.0 * (a.xy * b.xy + a.yz * b.yz + a.zx * b.zx);
}

inline double frob_norm(const SymTensor3& a) { return std::sqrt(frob_inner(a, a)); }

/// Trace-free symmetric tensor. Only constructed through dev() or
/// trace-closed arithmetic, which keeps the trace at roundoff level.
struct DevTensor3 : SymTensor3 {
  DevTensor3() = default;
};

namespace detail {
inline DevTensor3 as_dev(const SymTensor3& a) {
  DevTensor3 d;
  static_cast<SymTensor3&>(d) = a;
  return d;
}
}  // namespace detail

/// Deviatoric part a - (tr a / 3) I.
inline DevTensor3 dev(const SymTensor3& a) {
  const double m = trace(a) / 3.0;
  DevTensor3 d;
  d.xx = a.xx - m; d.yy = a.yy - m; d.zz = a.zz - m;
  d.xy = a.xy;     d.yz = a.yz;     d.zx = a.zx;
  return d;
}

inline DevTensor3 operator+(const DevTensor3& a, const DevTensor3& b) {
  return detail::as_dev(static_cast<const SymTensor3&>(a) + b);
}
inline DevTensor3 operator-(const DevTensor3& a, const DevTensor3& b) {
  return detail::as_dev(static_cast<const SymTensor3&>(a) - b);
}
inline DevTensor3 operator*(double c, const DevTensor3& a) {
  return detail::as_dev(c * static_cast<const SymTensor3&>(a));
}
inline DevTensor3 operator*(const DevTensor3& a, double c) { return c * a; }
inline DevTensor3 operator-(const DevTensor3& a) { return -1.0 * a; }

/// a / ||a||; returns the zero tensor when ||a|| == 0.
inline DevTensor3 normalized_or_zero(const DevTensor3& a) {
  const double n = frob_norm(a);
  if (n == 0.0) return {};
  return (1.0 / n) * a;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 to_matrix(const SymTensor3& a) {
  return {{{a.xx, a.xy, a.zx}, {a.xy, a.yy, a.yz}, {a.zx, a.yz, a.zz}}};
}

inline SymTensor3 from_matrix_symmetric(const Mat3& m) {
  return {m[0][0], m[1][1], m[2][2],
          0.5 * (m[0][1] + m[1][0]),
          0.5 * (m[1][2] + m[2][1]),
          0.5 * (m[2][0] + m[0][2])};
}

/// Congruence transform R a R^T for an orthogonal R.
inline SymTensor3 rotated(const SymTensor3& a, const Mat3& r) {
  const Mat3 m = to_matrix(a);
  Mat3 rm{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) rm[i][j] += r[i][k] * m[k][j];
  Mat3 rmrt{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) rmrt[i][j] += rm[i][k] * r[j][k];
  return from_matrix_symmetric(rmrt);
}

inline DevTensor3 rotated(const DevTensor3& a, const Mat3& r) {
  return detail::as_dev(rotated(static_cast<const SymTensor3&>(a), r));
}

/// Unit deviator along the uniaxial direction diag(2,-1,-1)/sqrt(6).
inline DevTensor3 axial_unit_deviator() {
  const double s = 1.0 / std::sqrt(6.0);
  DevTensor3 d;
  d.xx = 2.0 * s; d.yy = -s; d.zz = -s;
  return d;
}

}  // namespace sma
