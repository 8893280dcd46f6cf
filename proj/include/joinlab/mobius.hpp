#pragma once

// Numerically careful 2x2 unit-determinant kernel for the rank-one factors:
// PSL(2,R) acting on H^2 (boundary S^1) and PSL(2,C) acting on H^3
// (boundary S^2). Everything is a free function templated on the scalar;
// the pipeline instantiates with std::complex<double>, where real input
// matrices keep exactly zero imaginary parts under products.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>

#include "joinlab/common.hpp"

namespace joinlab {

using Complex = std::complex<double>;
template <class Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
using Mat2d = Mat2<double>;
using Mat2c = Mat2<Complex>;

enum class FactorKind : uint8_t { Real2 = 0, Complex3 = 1 };

inline int boundary_dim(FactorKind kind) {
  return kind == FactorKind::Real2 ? 2 : 3;
}

inline const char* factor_kind_name(FactorKind kind) {
  return kind == FactorKind::Real2 ? "real2" : "complex3";
}

namespace detail {
inline double abs2(double x) { return x * x; }
inline double abs2(const Complex& z) { return std::norm(z); }
inline double real_part(double x) { return x; }
inline double real_part(const Complex& z) { return z.real(); }
}  // namespace detail

// Squared Frobenius norm, sum of squared absolute values of the entries.
template <class Scalar>
double frobenius2(const Mat2<Scalar>& g) {
  return detail::abs2(g(0, 0)) + detail::abs2(g(0, 1)) + detail::abs2(g(1, 0)) +
         detail::abs2(g(1, 1));
}

// Rescale so det = 1 and pick the projective representative with
// Re(tr) >= 0. Throws if the matrix is numerically singular.
template <class Scalar>
Mat2<Scalar> normalized(Mat2<Scalar> g) {
  const Scalar det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const double mag = std::sqrt(detail::abs2(det));
  if (!(mag > 1e-14)) throw ConfigError("matrix is not invertible");
  if constexpr (std::is_same_v<Scalar, double>) {
    if (det < 0) throw ConfigError("negative determinant: not orientation preserving");
    g /= std::sqrt(det);
  } else {
    g /= std::sqrt(det);
  }
  if (detail::real_part(g(0, 0) + g(1, 1)) < 0) g = -g;
  return g;
}

template <class Scalar>
Mat2<Scalar> inverse_unit_det(const Mat2<Scalar>& g) {
  Mat2<Scalar> inv;
  inv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
  return inv;
}

// Hyperbolic displacement of the basepoint: d(g o, o) = arccosh(|g|_F^2 / 2).
// With det = 1 the argument is >= 1 save for rounding; tiny undershoot is
// clamped, anything worse signals a corrupted matrix.
template <class Scalar>
double displacement(const Mat2<Scalar>& g) {
  double a = 0.5 * frobenius2(g);
  if (a < 1.0) {
    if (a < 1.0 - 1e-12) throw DomainError("arccosh argument below 1: matrix not unit-determinant");
    a = 1.0;
  }
  return std::acosh(a);
}

// Eigenvalue of larger modulus. det = 1 so the pair is (lambda, 1/lambda).
template <class Scalar>
Complex dominant_eigenvalue(const Mat2<Scalar>& g) {
  Complex t;
  if constexpr (std::is_same_v<Scalar, double>) {
    t = Complex(g(0, 0) + g(1, 1), 0.0);
  } else {
    t = g(0, 0) + g(1, 1);
  }
  const Complex disc = std::sqrt(t * t - Complex(4.0));
  const Complex l1 = 0.5 * (t + disc);
  const Complex l2 = 0.5 * (t - disc);
  return std::abs(l1) >= std::abs(l2) ? l1 : l2;
}

template <class Scalar>
bool is_loxodromic(const Mat2<Scalar>& g) {
  const double m = std::abs(dominant_eigenvalue(g));
  return m - 1.0 / m > 1e-9;
}

// Translation length 2 log|lambda| of a loxodromic element.
template <class Scalar>
double translation_length(const Mat2<Scalar>& g) {
  const double m = std::abs(dominant_eigenvalue(g));
  if (!(m - 1.0 / m > 1e-9)) throw NonLoxodromicError("translation length needs a loxodromic element");
  return 2.0 * std::log(m);
}

// Boundary coordinate in C u {inf} (real axis u {inf} for real scalars).
struct BoundaryCoord {
  Complex z{0.0, 0.0};
  bool at_infinity = false;
};

// Attracting fixed point as a boundary coordinate: ratio x/y of the
// dominant eigenvector (x, y).
template <class Scalar>
BoundaryCoord attracting_coordinate(const Mat2<Scalar>& g) {
  const Complex lambda = dominant_eigenvalue(g);
  if (!(std::abs(lambda) - 1.0 / std::abs(lambda) > 1e-9))
    throw NonLoxodromicError("attracting point needs a loxodromic element");
  Complex a, b, c, d;
  if constexpr (std::is_same_v<Scalar, double>) {
    a = Complex(g(0, 0), 0);
    b = Complex(g(0, 1), 0);
    c = Complex(g(1, 0), 0);
    d = Complex(g(1, 1), 0);
  } else {
    a = g(0, 0);
    b = g(0, 1);
    c = g(1, 0);
    d = g(1, 1);
  }
  // (g - lambda I) v = 0; take the row with better conditioning.
  const Complex v1x = b, v1y = lambda - a;        // from row 1
  const Complex v2x = lambda - d, v2y = c;        // from row 2
  Complex x, y;
  if (std::norm(v1x) + std::norm(v1y) >= std::norm(v2x) + std::norm(v2y)) {
    x = v1x;
    y = v1y;
  } else {
    x = v2x;
    y = v2y;
  }
  BoundaryCoord out;
  const double xn = std::abs(x), yn = std::abs(y);
  if (yn <= xn * 1e-14) {
    out.at_infinity = true;
  } else {
    out.z = x / y;
  }
  return out;
}

// Moebius action on a boundary coordinate.
template <class Scalar>
BoundaryCoord mobius_apply(const Mat2<Scalar>& g, const BoundaryCoord& p) {
  Complex a, b, c, d;
  if constexpr (std::is_same_v<Scalar, double>) {
    a = Complex(g(0, 0), 0);
    b = Complex(g(0, 1), 0);
    c = Complex(g(1, 0), 0);
    d = Complex(g(1, 1), 0);
  } else {
    a = g(0, 0);
    b = g(0, 1);
    c = g(1, 0);
    d = g(1, 1);
  }
  BoundaryCoord out;
  if (p.at_infinity) {
    if (std::abs(c) < 1e-300) {
      out.at_infinity = true;
    } else {
      out.z = a / c;
    }
    return out;
  }
  const Complex num = a * p.z + b;
  const Complex den = c * p.z + d;
  if (std::abs(den) <= std::abs(num) * 1e-14 || std::abs(den) < 1e-300) {
    out.at_infinity = true;
  } else {
    out.z = num / den;
  }
  return out;
}

// Boundary points live on the unit sphere S^{n-1} in R^n (n = 2 or 3),
// stored as Vector3d with trailing zero for the circle. The chart is the
// inverse stereographic projection; infinity maps to the pole on the last
// active axis.
inline Eigen::Vector3d to_boundary_point(const BoundaryCoord& c, FactorKind kind) {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  if (kind == FactorKind::Real2) {
    if (c.at_infinity) {
      p << 0.0, 1.0, 0.0;
    } else {
      const double x = c.z.real();
      const double w = 1.0 + x * x;
      p << 2.0 * x / w, (x * x - 1.0) / w, 0.0;
    }
  } else {
    if (c.at_infinity) {
      p << 0.0, 0.0, 1.0;
    } else {
      const double n2 = std::norm(c.z);
      const double w = 1.0 + n2;
      p << 2.0 * c.z.real() / w, 2.0 * c.z.imag() / w, (n2 - 1.0) / w;
    }
  }
  return p;
}

template <class Scalar>
Eigen::Vector3d attracting_point(const Mat2<Scalar>& g, FactorKind kind) {
  return to_boundary_point(attracting_coordinate(g), kind);
}

inline double chordal_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a - b).norm();
}

}  // namespace joinlab
