#pragma once

// Physical description of a hinged beam carrying a shaker (point mass on a
// spring) and distributed piezo actuators.

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamobs {

/// Input data violates a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not deliver its postcondition.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The 4x4 interface system has a two-dimensional null space at a root.
class DegenerateRootError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// One polynomial piece of an actuator shape: p(x) = sum_k coeffs[k] x^k on
/// the closed interval [lo, hi]. Coefficients are in the global coordinate x.
struct PolynomialPiece {
  double lo = 0.0;
  double hi = 0.0;
  std::array<double, 4> coeffs{};

  [[nodiscard]] double operator()(double x) const {
    return ((coeffs[3] * x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0];
  }
  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }

  friend bool operator==(const PolynomialPiece&, const PolynomialPiece&) = default;
};

/// Piecewise-cubic torque density profile of one piezo actuator; zero
/// outside the listed pieces.
struct ActuatorShape {
  std::vector<PolynomialPiece> pieces;

  friend bool operator==(const ActuatorShape&, const ActuatorShape&) = default;
};

/// Value of the shape function at x. Pieces may touch; at a shared endpoint
/// the left piece wins.
[[nodiscard]] inline double eval_shape(const ActuatorShape& shape, double x) {
  for (const auto& piece : shape.pieces) {
    if (piece.contains(x)) return piece(x);
    if (x < piece.lo) break;
  }
  return 0.0;
}

struct BeamSystem {
  double length = 0.0;            // m
  double attach_point = 0.0;      // m, shaker position
  double youngs_modulus = 0.0;    // Pa
  double area_moment = 0.0;       // m^4
  double mass_per_length = 0.0;   // kg/m
  double shaker_mass = 0.0;       // kg
  double shaker_stiffness = 0.0;  // N/m
  std::vector<ActuatorShape> actuators;
  std::vector<double> sensors;  // strain gauge positions, m

  [[nodiscard]] double flexural_rigidity() const {
    return youngs_modulus * area_moment;
  }
  /// Input channels: shaker force plus one torque density per actuator.
  [[nodiscard]] std::size_t num_inputs() const { return actuators.size() + 1; }
  /// Output channels: shaker displacement plus one curvature per sensor.
  [[nodiscard]] std::size_t num_outputs() const { return sensors.size() + 1; }

  friend bool operator==(const BeamSystem&, const BeamSystem&) = default;
};

namespace detail {

inline std::string interval_text(double lo, double hi) {
  std::ostringstream os;
  os << '[' << lo << ", " << hi << ']';
  return os.str();
}

}  // namespace detail

/// Throws ValidationError naming the first violated invariant.
inline void validate(const BeamSystem& sys) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const auto nonnegative = [](double v) { return std::isfinite(v) && v >= 0.0; };

  if (!positive(sys.length)) throw ValidationError("length must be positive");
  if (!(std::isfinite(sys.attach_point) && sys.attach_point > 0.0 &&
        sys.attach_point < sys.length))
    throw ValidationError("attach_l0 must lie strictly inside (0,l)");
  if (!positive(sys.youngs_modulus))
    throw ValidationError("young_modulus must be positive");
  if (!positive(sys.area_moment))
    throw ValidationError("area_moment must be positive");
  if (!positive(sys.mass_per_length))
    throw ValidationError("mass_per_length must be positive");
  if (!nonnegative(sys.shaker_mass))
    throw ValidationError("shaker mass must be non-negative");
  if (!nonnegative(sys.shaker_stiffness))
    throw ValidationError("shaker stiffness must be non-negative");

  for (std::size_t s = 0; s < sys.sensors.size(); ++s) {
    const double pos = sys.sensors[s];
    if (!(std::isfinite(pos) && pos > 0.0 && pos < sys.length))
      throw ValidationError("sensor " + std::to_string(s + 1) +
                            " must lie strictly inside (0,l)");
  }

  for (std::size_t j = 0; j < sys.actuators.size(); ++j) {
    const std::string who = "actuator " + std::to_string(j + 1);
    const auto& pieces = sys.actuators[j].pieces;
    if (pieces.empty()) throw ValidationError(who + " has no pieces");
    double previous_hi = 0.0;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      const auto& piece = pieces[p];
      const std::string where = who + " piece " + detail::interval_text(piece.lo, piece.hi);
      for (double c : piece.coeffs)
        if (!std::isfinite(c)) throw ValidationError(where + ": non-finite coefficient");
      if (!(std::isfinite(piece.lo) && std::isfinite(piece.hi) && piece.lo < piece.hi))
        throw ValidationError(where + ": interval must satisfy lo < hi");
      if (p > 0 && piece.lo < previous_hi)
        throw ValidationError(where + ": pieces must be sorted and disjoint");
      previous_hi = piece.hi;
      if (piece.lo <= 0.0 || piece.hi >= sys.length ||
          (piece.lo <= sys.attach_point && sys.attach_point <= piece.hi))
        throw ValidationError(where +
                              ": support must exclude {0, l0, l} (supp psi must avoid "
                              "the hinges and the shaker)");
    }
  }
}

}  // namespace beamobs
