#pragma once

// Spectral problem of the hinged beam with a shaker: on each side of the
// attachment point the mode shape is a combination of sin and sinh with a
// common wavenumber mu = (lambda rho / EI)^(1/4), W and its first two
// derivatives are continuous at l0, and the third derivative jumps by
// ((kappa - lambda m) / EI) W(l0).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beamobs/detail/trig_integrals.hpp"
#include "beamobs/model.hpp"

namespace beamobs {

/// One eigenpair. Left of the shaker W(x) = left_sin sin(mu x) +
/// left_sinh sinh(mu x); right of it W(x) = right_sin sin(mu (x - l)) +
/// right_sinh sinh(mu (x - l)).
struct Mode {
  double lambda = 0.0;  // s^-2
  double mu = 0.0;      // 1/m
  double left_sin = 0.0;
  double left_sinh = 0.0;
  double right_sin = 0.0;
  double right_sinh = 0.0;
  double norm_h_sq = 0.0;  // <W, W>_H
  double attach_point = 0.0;
  double length = 0.0;

  /// Multiplies the four amplitudes by alpha and keeps norm_h_sq consistent.
  [[nodiscard]] Mode scaled(double alpha) const {
    Mode m = *this;
    m.left_sin *= alpha;
    m.left_sinh *= alpha;
    m.right_sin *= alpha;
    m.right_sinh *= alpha;
    m.norm_h_sq *= alpha * alpha;
    return m;
  }
};

struct ModeSeed {
  double lambda = 0.0;
  double mu = 0.0;
};

/// Which one-sided limit to take at the attachment point.
enum class Side { unspecified, left, right };

/// Settings of the root scan. Defaults follow the documented search window.
struct RootSearchOptions {
  int steps_per_spacing = 200;   // grid points per hinged-root spacing pi/l
  int extra_spacings = 4;        // window upper end (N + extra) pi / l
  double relative_tolerance = 1e-12;
  int max_iterations = 200;
};

/// Relative tolerance for continuity and interface residuals of a mode.
inline constexpr double kInterfaceTolerance = 1e-7;
/// Grid used to max-normalize mode shapes.
inline constexpr int kNormalizationGridPoints = 2001;

namespace detail {

/// (kappa - lambda m) / (EI mu^3) written without forming lambda.
inline double interface_coupling(double mu, const BeamSystem& sys) {
  const double ei = sys.flexural_rigidity();
  return sys.shaker_stiffness / (ei * mu * mu * mu) - sys.shaker_mass * mu / sys.mass_per_length;
}

inline void require_positive_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw ValidationError("wavenumber mu must be positive and finite");
}

}  // namespace detail

[[nodiscard]] inline double wavenumber_of(double lambda, const BeamSystem& sys) {
  return std::sqrt(std::sqrt(lambda * sys.mass_per_length / sys.flexural_rigidity()));
}

[[nodiscard]] inline double eigenvalue_of(double mu, const BeamSystem& sys) {
  const double mu2 = mu * mu;
  return mu2 * mu2 * sys.flexural_rigidity() / sys.mass_per_length;
}

/// Interface system acting on (C1, C2, B1, B2) with the sinh columns divided
/// by cosh(mu l0) and cosh(mu (l0 - l)); finite for any mu > 0.
[[nodiscard]] inline Eigen::Matrix4d interface_matrix(double mu, const BeamSystem& sys) {
  detail::require_positive_mu(mu);
  const double l0 = sys.attach_point;
  const double d = l0 - sys.length;
  const double s0 = std::sin(mu * l0), c0 = std::cos(mu * l0), t0 = std::tanh(mu * l0);
  const double s1 = std::sin(mu * d), c1 = std::cos(mu * d), t1 = std::tanh(mu * d);
  const double k = detail::interface_coupling(mu, sys);
  Eigen::Matrix4d m;
  // clang-format off
  m << s0,          -t0,         -s1,  t1,
       s0,           t0,         -s1, -t1,
       c0,           1.0,        -c1, -1.0,
       c0 + k * s0,  k * t0 - 1, -c1,  1.0;
  // clang-format on
  return m;
}

/// Rescaled characteristic determinant; same zero set as the unscaled one
/// for mu > 0.
[[nodiscard]] inline double char_det(double mu, const BeamSystem& sys) {
  return interface_matrix(mu, sys).partialPivLu().determinant();
}

/// Hadamard bound of the rescaled matrix (product of column norms), the
/// natural magnitude against which char_det is judged small.
[[nodiscard]] inline double char_det_scale(double mu, const BeamSystem& sys) {
  return interface_matrix(mu, sys).colwise().norm().prod();
}

/// The count smallest positive eigenvalues, strictly increasing.
[[nodiscard]] inline std::vector<ModeSeed> find_eigenvalues(const BeamSystem& sys, int count,
                                                            const RootSearchOptions& opt = {}) {
  if (count < 1) throw ValidationError("number of modes must be at least 1");
  const double spacing = std::numbers::pi / sys.length;
  const double mu_lo = 1e-6 / sys.length;
  const double mu_hi = (count + opt.extra_spacings) * spacing;
  const double step = spacing / opt.steps_per_spacing;
  const auto steps = static_cast<long>(std::ceil((mu_hi - mu_lo) / step));

  std::vector<ModeSeed> roots;
  auto push = [&](double mu) { roots.push_back({eigenvalue_of(mu, sys), mu}); };

  double a = mu_lo;
  double fa = char_det(a, sys);
  for (long i = 1; i <= steps && static_cast<int>(roots.size()) < count; ++i) {
    const double b = mu_lo + static_cast<double>(i) * step;
    const double fb = char_det(b, sys);
    if (fb == 0.0) {
      push(b);
    } else if (fa != 0.0 && std::signbit(fa) != std::signbit(fb)) {
      double lo = a, hi = b, flo = fa;
      int it = 0;
      for (; it < opt.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= opt.relative_tolerance * mid || mid <= lo || mid >= hi) break;
        const double fm = char_det(mid, sys);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (std::signbit(fm) == std::signbit(flo)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      if (it == opt.max_iterations) {
        std::ostringstream os;
        os.precision(17);
        os << "bisection did not converge within " << opt.max_iterations
           << " iterations on bracket mu in [" << a << ", " << b << "]";
        throw SolverError(os.str());
      }
      push(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }

  if (static_cast<int>(roots.size()) < count) {
    std::ostringstream os;
    os.precision(10);
    os << "found only " << roots.size() << " of " << count
       << " eigenvalues in the scan window mu in (" << mu_lo << ", " << mu_hi << "]";
    throw SolverError(os.str());
  }
  return roots;
}

/// Value of the mode shape's derivative of the given order (0..4) at x.
/// Order 3 at exactly x = l0 needs a side.
[[nodiscard]] inline double mode_eval(const Mode& mode, double x, int order,
                                      Side side = Side::unspecified) {
  if (order < 0 || order > 4) throw std::invalid_argument("derivative order must be 0..4");
  if (order == 3 && x == mode.attach_point && side == Side::unspecified)
    throw std::invalid_argument("third derivative at the attachment point needs a side");
  const bool right = x > mode.attach_point || (x == mode.attach_point && side == Side::right);
  const double t = right ? x - mode.length : x;
  const double a = right ? mode.right_sin : mode.left_sin;
  const double b = right ? mode.right_sinh : mode.left_sinh;
  const double mu = mode.mu;
  const double arg = mu * t;
  double trig = 0.0;
  switch (order % 4) {
    case 0: trig = std::sin(arg); break;
    case 1: trig = std::cos(arg); break;
    case 2: trig = -std::sin(arg); break;
    case 3: trig = -std::cos(arg); break;
  }
  const double hyp = (order % 2 == 0) ? std::sinh(arg) : std::cosh(arg);
  return std::pow(mu, order) * (a * trig + b * hyp);
}

/// Max of |W| over the uniform normalization grid on [0, l].
[[nodiscard]] inline double max_abs_on_grid(const Mode& mode,
                                            int points = kNormalizationGridPoints) {
  double peak = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = mode.length * static_cast<double>(i) / (points - 1);
    peak = std::max(peak, std::abs(mode_eval(mode, x, 0)));
  }
  return peak;
}

namespace detail {

/// Coefficients of the even-order derivative W^(order) on the left and right
/// segments, each in SinSinhTerm form in the local variable t.
inline std::pair<SinSinhTerm, SinSinhTerm> segment_terms(const Mode& m, int order) {
  const double mu_pow = std::pow(m.mu, order);
  const double sin_sign = (order % 4 == 0) ? 1.0 : -1.0;
  return {SinSinhTerm{sin_sign * mu_pow * m.left_sin, mu_pow * m.left_sinh, m.mu},
          SinSinhTerm{sin_sign * mu_pow * m.right_sin, mu_pow * m.right_sinh, m.mu}};
}

/// Integral over [0, l] of W_i^(oi) W_j^(oj) for even derivative orders.
inline double product_integral(const Mode& mi, int oi, const Mode& mj, int oj) {
  if (mi.attach_point != mj.attach_point || mi.length != mj.length)
    throw std::invalid_argument("modes belong to different beam geometries");
  const auto [li, ri] = segment_terms(mi, oi);
  const auto [lj, rj] = segment_terms(mj, oj);
  const double l0 = mi.attach_point;
  return integrate_product(li, lj, 0.0, l0) + integrate_product(ri, rj, l0 - mi.length, 0.0);
}

}  // namespace detail

/// <W_i, W_j>_H = int rho W_i W_j dx + m W_i(l0) W_j(l0), in closed form.
[[nodiscard]] inline double inner_h(const Mode& mi, const Mode& mj, const BeamSystem& sys) {
  const double l0 = sys.attach_point;
  return sys.mass_per_length * detail::product_integral(mi, 0, mj, 0) +
         sys.shaker_mass * mode_eval(mi, l0, 0) * mode_eval(mj, l0, 0);
}

/// int EI W_i'' W_j'' dx + kappa W_i(l0) W_j(l0); equals lambda <W, W>_H on
/// the diagonal.
[[nodiscard]] inline double bending_form(const Mode& mi, const Mode& mj, const BeamSystem& sys) {
  const double l0 = sys.attach_point;
  return sys.flexural_rigidity() * detail::product_integral(mi, 2, mj, 2) +
         sys.shaker_stiffness * mode_eval(mi, l0, 0) * mode_eval(mj, l0, 0);
}

/// <L W_i, W_j> for the beam-shaker operator: the fourth-derivative term plus
/// the spring and the third-derivative jump at l0.
[[nodiscard]] inline double operator_form(const Mode& mi, const Mode& mj, const BeamSystem& sys) {
  const double l0 = sys.attach_point;
  const double ei = sys.flexural_rigidity();
  const double wi = mode_eval(mi, l0, 0);
  const double wj = mode_eval(mj, l0, 0);
  const double jump = mode_eval(mi, l0, 3, Side::left) - mode_eval(mi, l0, 3, Side::right);
  return ei * detail::product_integral(mi, 4, mj, 0) + sys.shaker_stiffness * wi * wj -
         ei * jump * wj;
}

/// Relative residuals of the attachment-point conditions of a mode.
struct InterfaceResiduals {
  double value = 0.0;      // |W(l0-) - W(l0+)| / max|W|
  double slope = 0.0;      // first derivative, scaled by mu max|W|
  double curvature = 0.0;  // second derivative, scaled by mu^2 max|W|
  double shear_jump = 0.0; // jump condition, scaled by mu^3 max|W|

  [[nodiscard]] double worst() const {
    return std::max({value, slope, curvature, shear_jump});
  }
};

[[nodiscard]] inline InterfaceResiduals interface_residuals(const Mode& mode,
                                                            const BeamSystem& sys) {
  const double l0 = sys.attach_point;
  const double peak = max_abs_on_grid(mode);
  const double mu = mode.mu;
  auto one_sided_gap = [&](int order) {
    return std::abs(mode_eval(mode, l0, order, Side::left) -
                    mode_eval(mode, l0, order, Side::right));
  };
  InterfaceResiduals r;
  r.value = one_sided_gap(0) / peak;
  r.slope = one_sided_gap(1) / (mu * peak);
  r.curvature = one_sided_gap(2) / (mu * mu * peak);
  const double jump = mode_eval(mode, l0, 3, Side::left) - mode_eval(mode, l0, 3, Side::right);
  const double expected = (sys.shaker_stiffness - mode.lambda * sys.shaker_mass) /
                          sys.flexural_rigidity() * mode_eval(mode, l0, 0, Side::left);
  r.shear_jump = std::abs(jump - expected) / (mu * mu * mu * peak);
  return r;
}

/// Builds the mode shape for a located eigenvalue from the null space of the
/// interface system, with W'(0) > 0 and max |W| = 1 on the normalization grid.
[[nodiscard]] inline Mode eigenfunction(const BeamSystem& sys, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("eigenvalue must be positive");
  const double mu = wavenumber_of(lambda, sys);
  const Eigen::Matrix4d m = interface_matrix(mu, sys);
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(m, Eigen::ComputeFullV);
  const Eigen::Vector4d sigma = svd.singularValues();
  if (sigma(2) <= 1e-8 * sigma(0)) {
    std::ostringstream os;
    os.precision(17);
    os << "degenerate eigenvalue lambda = " << lambda
       << ": interface null space is two-dimensional (singular values " << sigma(2) << ", "
       << sigma(3) << " relative to " << sigma(0) << ")";
    throw DegenerateRootError(os.str());
  }
  if (sigma(3) > 1e-6 * sigma(0)) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda = " << lambda << " is not an eigenvalue (smallest singular value "
       << sigma(3) / sigma(0) << " relative)";
    throw SolverError(os.str());
  }
  const Eigen::Vector4d v = svd.matrixV().col(3);

  Mode mode;
  mode.lambda = lambda;
  mode.mu = mu;
  mode.attach_point = sys.attach_point;
  mode.length = sys.length;
  mode.left_sin = v(0);
  mode.left_sinh = v(1) / std::cosh(mu * sys.attach_point);
  mode.right_sin = v(2);
  mode.right_sinh = v(3) / std::cosh(mu * (sys.attach_point - sys.length));

  const double slope0 = mode.left_sin + mode.left_sinh;
  const double sign = slope0 < 0.0 ? -1.0 : 1.0;
  mode = mode.scaled(sign / max_abs_on_grid(mode));
  mode.norm_h_sq = inner_h(mode, mode, sys);

  const InterfaceResiduals res = interface_residuals(mode, sys);
  if (res.worst() > kInterfaceTolerance) {
    std::ostringstream os;
    os << "mode at lambda = " << lambda << " violates the interface conditions (residual "
       << res.worst() << ")";
    throw SolverError(os.str());
  }
  return mode;
}

/// The first count modes of the system.
[[nodiscard]] inline std::vector<Mode> compute_modes(const BeamSystem& sys, int count,
                                                     const RootSearchOptions& opt = {}) {
  std::vector<Mode> modes;
  for (const auto& seed : find_eigenvalues(sys, count, opt))
    modes.push_back(eigenfunction(sys, seed.lambda));
  return modes;
}

}  // namespace beamobs
