#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

// Reference values computed independently of the library.
namespace oracle {

inline double quad(auto f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14, &err);
}

// e^{-t} int_0^t e^s n log(1 + (c - 1) e^{-s}) ds: the potential of the
// spatially constant solution starting from c theta_0.
inline double homogeneous_u(double t, double c, int n) {
  if (t == 0.0) return 0.0;
  const double I = quad([&](double s) { return std::exp(s) * n * std::log1p((c - 1.0) * std::exp(-s)); },
                        0.0, t);
  return std::exp(-t) * I;
}

inline double homogeneous_udot(double t, double c, int n) {
  return n * std::log1p((c - 1.0) * std::exp(-t)) - homogeneous_u(t, c, n);
}

// Metric ratio of the constant solution: 1 + (c - 1) e^{-t}.
inline double homogeneous_ratio(double t, double c) { return 1.0 + (c - 1.0) * std::exp(-t); }

inline double E(double s, double s1) {
  return (1.0 + s1 * std::exp(s1 - s)) / ((1.0 - std::exp(-s)) * (1.0 - std::exp(s1 - s)));
}

// Poincare disc coefficient 2 / (1 - r^2)^2 and its derivatives in z, z-bar.
inline double disc_h(double r) { return 2.0 / ((1.0 - r * r) * (1.0 - r * r)); }

}  // namespace oracle
