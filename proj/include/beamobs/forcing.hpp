#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "beamobs/model.hpp"

namespace beamobs {

/// Time profile of one input channel (shaker force or actuator torque
/// density).
class ForcingSignal {
 public:
  enum class Kind { zero, sinusoid, table };

  ForcingSignal() = default;

  static ForcingSignal zero() { return {}; }

  /// amplitude * sin(omega * t + phase)
  static ForcingSignal sinusoid(double amplitude, double omega, double phase = 0.0) {
    if (!(std::isfinite(amplitude) && std::isfinite(omega) && std::isfinite(phase)))
      throw ValidationError("sinusoid parameters must be finite");
    if (omega < 0.0) throw ValidationError("sinusoid frequency must be non-negative");
    ForcingSignal f;
    f.kind_ = Kind::sinusoid;
    f.amplitude_ = amplitude;
    f.omega_ = omega;
    f.phase_ = phase;
    return f;
  }

  /// Piecewise constant: values[k] on [times[k], times[k+1]), zero before
  /// times[0], values.back() after times.back().
  static ForcingSignal table(std::vector<double> times, std::vector<double> values) {
    if (times.empty() || times.size() != values.size())
      throw ValidationError("forcing table needs matching, non-empty times and values");
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (!std::isfinite(times[k]) || !std::isfinite(values[k]))
        throw ValidationError("forcing table entries must be finite");
      if (k > 0 && !(times[k] > times[k - 1]))
        throw ValidationError("forcing table times must be strictly increasing");
    }
    ForcingSignal f;
    f.kind_ = Kind::table;
    f.times_ = std::move(times);
    f.values_ = std::move(values);
    return f;
  }

  [[nodiscard]] double operator()(double t) const {
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::sinusoid:
        return amplitude_ * std::sin(omega_ * t + phase_);
      case Kind::table: {
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        if (it == times_.begin()) return 0.0;
        return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
      }
    }
    return 0.0;
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double amplitude() const { return amplitude_; }
  [[nodiscard]] double omega() const { return omega_; }
  [[nodiscard]] double phase() const { return phase_; }
  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ForcingSignal&, const ForcingSignal&) = default;

 private:
  Kind kind_ = Kind::zero;
  double amplitude_ = 0.0;
  double omega_ = 0.0;
  double phase_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// One signal per input channel u_0..u_k; channels beyond size() are zero.
using Forcing = std::vector<ForcingSignal>;

inline double channel_value(const Forcing& forcing, std::size_t channel, double t) {
  return channel < forcing.size() ? forcing[channel](t) : 0.0;
}

}  // namespace beamobs
