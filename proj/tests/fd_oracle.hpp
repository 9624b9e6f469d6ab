#pragma once

// Centered finite differences of W(e(t)) along the exact error flow
// e(t) = exp(t (A - FC)) e(0), used as an independent check of the analytic
// Lyapunov rate.
//
// In energy coordinates e^ = D e with D = diag(sqrt(lambda_j ||W_j||^2),
// sqrt(||W_j||^2)) one has W = |e^|^2 / 2, so
//   W(e(h)) - W(e(-h)) = (e^(h) - e^(-h)) . (e^(h) + e^(-h)) / 2
//                      = 2 (sinh(h M^) e^) . (cosh(h M^) e^).
// Forming sinh and cosh by their series avoids subtracting two nearly equal
// energies, which otherwise limits the quotient to about 1e-5.

#include <cmath>

#include <Eigen/Dense>

#include "beamobs/observer.hpp"

namespace beamobs::testing {

class LyapunovDifferenceOracle {
 public:
  LyapunovDifferenceOracle(const ReducedModel& model, const ObserverGain& gain, double h)
      : h_(h), scale_(model.state_dim()) {
    for (int j = 0; j < model.n_modes; ++j) {
      scale_(position_index(j)) = std::sqrt(model.lambdas[j] * model.norms_h_sq[j]);
      scale_(velocity_index(j)) = std::sqrt(model.norms_h_sq[j]);
    }
    const Eigen::MatrixXd balanced =
        scale_.asDiagonal() * error_system(model, gain) * scale_.cwiseInverse().asDiagonal();
    series(balanced * h, sinh1_, cosh1_);
    series(balanced * (2.0 * h), sinh2_, cosh2_);
  }

  /// (W(e(-2h)) - 8 W(e(-h)) + 8 W(e(h)) - W(e(2h))) / (12 h)
  [[nodiscard]] double rate(const Eigen::VectorXd& e) const {
    const Eigen::VectorXd eh = scale_.cwiseProduct(e);
    const double d1 = 2.0 * (sinh1_ * eh).dot(cosh1_ * eh);
    const double d2 = 2.0 * (sinh2_ * eh).dot(cosh2_ * eh);
    return (8.0 * d1 - d2) / (12.0 * h_);
  }

 private:
  static void series(const Eigen::MatrixXd& x, Eigen::MatrixXd& sinh_x, Eigen::MatrixXd& cosh_x) {
    const auto n = x.rows();
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    sinh_x = Eigen::MatrixXd::Zero(n, n);
    cosh_x = term;
    for (int k = 1; k < 60; ++k) {
      term = term * x / static_cast<double>(k);
      (k % 2 ? sinh_x : cosh_x) += term;
      if (term.norm() < 1e-20 * cosh_x.norm()) break;
    }
  }

  double h_;
  Eigen::VectorXd scale_;
  Eigen::MatrixXd sinh1_, cosh1_, sinh2_, cosh2_;
};

}  // namespace beamobs::testing
