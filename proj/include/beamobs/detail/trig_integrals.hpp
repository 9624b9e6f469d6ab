#pragma once

// Closed-form integrals of products of sin and sinh with (possibly distinct)
// wavenumbers, used for the mass-weighted inner product and bending energy.

#include <cmath>

namespace beamobs::detail {

/// sin(d t) / d, continuous through d = 0.
inline double sin_over(double d, double t) {
  const double x = d * t;
  if (std::abs(x) < 1e-4) return t * (1.0 - x * x / 6.0 * (1.0 - x * x / 20.0));
  return std::sin(x) / d;
}

/// sinh(d t) / d, continuous through d = 0.
inline double sinh_over(double d, double t) {
  const double x = d * t;
  if (std::abs(x) < 1e-4) return t * (1.0 + x * x / 6.0 * (1.0 + x * x / 20.0));
  return std::sinh(x) / d;
}

/// Antiderivative of sin(a t) sin(b t).
inline double sin_sin_primitive(double a, double b, double t) {
  return 0.5 * (sin_over(a - b, t) - sin_over(a + b, t));
}

/// Antiderivative of sinh(a t) sinh(b t).
inline double sinh_sinh_primitive(double a, double b, double t) {
  return 0.5 * (sinh_over(a + b, t) - sinh_over(a - b, t));
}

/// Antiderivative of sin(a t) sinh(b t); requires a^2 + b^2 > 0.
inline double sin_sinh_primitive(double a, double b, double t) {
  return (b * std::sin(a * t) * std::cosh(b * t) - a * std::cos(a * t) * std::sinh(b * t)) /
         (a * a + b * b);
}

/// f(t) = sin_coeff * sin(k t) + sinh_coeff * sinh(k t)
struct SinSinhTerm {
  double sin_coeff;
  double sinh_coeff;
  double wavenumber;
};

/// Integral over [t0, t1] of f(t) * g(t), both of SinSinhTerm form.
inline double integrate_product(const SinSinhTerm& f, const SinSinhTerm& g, double t0,
                                double t1) {
  const double a = f.wavenumber;
  const double b = g.wavenumber;
  const auto span = [](auto&& prim, double lo, double hi) { return prim(hi) - prim(lo); };
  const double ss = span([&](double t) { return sin_sin_primitive(a, b, t); }, t0, t1);
  const double hh = span([&](double t) { return sinh_sinh_primitive(a, b, t); }, t0, t1);
  const double sh = span([&](double t) { return sin_sinh_primitive(a, b, t); }, t0, t1);
  const double hs = span([&](double t) { return sin_sinh_primitive(b, a, t); }, t0, t1);
  return f.sin_coeff * g.sin_coeff * ss + f.sinh_coeff * g.sinh_coeff * hh +
         f.sin_coeff * g.sinh_coeff * sh + f.sinh_coeff * g.sin_coeff * hs;
}

}  // namespace beamobs::detail
