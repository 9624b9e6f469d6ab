#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

namespace beamobs {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendreRule(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
    // legendre_p_zeros returns the non-negative roots in ascending order.
    const auto positive = boost::math::legendre_p_zeros<double>(n);
    auto weight = [n](double x) {
      const double dp = boost::math::legendre_p_prime(n, x);
      return 2.0 / ((1.0 - x * x) * dp * dp);
    };
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
      if (*it == 0.0) continue;
      nodes.push_back(-*it);
      weights.push_back(weight(*it));
    }
    for (double x : positive) {
      nodes.push_back(x);
      weights.push_back(weight(x));
    }
  }

  /// Integral of f over [a, b].
  template <class F>
  [[nodiscard]] double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

}  // namespace beamobs
