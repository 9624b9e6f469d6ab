#pragma once

// Observability of the reduced model and a Luenberger observer whose gain
// makes the modal energy of the estimation error a Lyapunov function.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beamobs/galerkin.hpp"

namespace beamobs {

inline constexpr double kRankTolerance = 1e-10;
/// Largest N for which per-output Vandermonde determinants are reported.
inline constexpr int kMaxVandermondeModes = 20;

struct ObservabilityReport {
  int rank = 0;
  int state_dim = 0;
  bool observable = false;
  /// Singular values of the rank-equivalent Kalman matrix over the largest.
  std::vector<double> singular_profile;
  /// For each mode j, the outputs s with c_sj != 0.
  std::vector<std::vector<int>> coverage;
  bool distinct_lambdas = false;
  /// Distinct eigenvalues and every mode seen by some output.
  bool sufficient_conditions = false;
  /// Exact modal (Hautus) test: for every group of equal eigenvalues the
  /// outputs restricted to that group have full column rank.
  bool modal_test = false;
  /// prod_i c_si prod_{j<n} (lambda_n - lambda_j) per output row; empty when
  /// N exceeds kMaxVandermondeModes.
  std::vector<double> vandermonde_dets;
};

/// Kalman matrix (C; CA; ...; CA^(n-1)) for n = dim A.
[[nodiscard]] inline Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a,
                                                          const Eigen::MatrixXd& c) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = c.rows();
  Eigen::MatrixXd h(n * p, n);
  Eigen::MatrixXd block = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    h.middleRows(k * p, p) = block;
    block = block * a;
  }
  return h;
}

/// Closed-form determinant prod c_i * prod_{j<n} (lambda_n - lambda_j).
[[nodiscard]] inline double vandermonde_det(std::span<const double> c,
                                            std::span<const double> lambdas) {
  if (c.size() != lambdas.size())
    throw std::invalid_argument("coefficient and eigenvalue lists differ in length");
  long double det = 1.0L;
  for (double ci : c) det *= ci;
  for (std::size_t n = 0; n < lambdas.size(); ++n)
    for (std::size_t j = 0; j < n; ++j)
      det *= static_cast<long double>(lambdas[n]) - static_cast<long double>(lambdas[j]);
  return static_cast<double>(det);
}

/// Position-column block of the Kalman matrix for one output row: row k is
/// (c_1 (-lambda_1)^k, ..., c_N (-lambda_N)^k).
[[nodiscard]] inline Eigen::MatrixXd vandermonde_block(std::span<const double> c,
                                                       std::span<const double> lambdas) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = c[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < n; ++k) {
      h(k, i) = v;
      v *= -lambdas[static_cast<std::size_t>(i)];
    }
  }
  return h;
}

namespace detail {

inline std::vector<double> output_row(const Eigen::MatrixXd& c, Eigen::Index s, int n_modes) {
  std::vector<double> row(static_cast<std::size_t>(n_modes));
  for (int j = 0; j < n_modes; ++j) row[static_cast<std::size_t>(j)] = c(s, position_index(j));
  return row;
}

}  // namespace detail

[[nodiscard]] inline ObservabilityReport observability_report(const ReducedModel& model,
                                                              double zero_tol = kRankTolerance) {
  ObservabilityReport rep;
  const int n = model.n_modes;
  rep.state_dim = 2 * n;

  // Output coefficients below zero_tol relative to the largest are rounding
  // noise (a mode with a node at the sensor) and count as exact zeros.
  const double c_scale = model.c_matrix.cwiseAbs().maxCoeff();
  const auto nonzero = [&](double v) { return c_scale > 0.0 && std::abs(v) > zero_tol * c_scale; };
  const Eigen::MatrixXd c_clean = model.c_matrix.unaryExpr([&](double v) { return nonzero(v) ? v : 0.0; });

  // Rank of the Kalman matrix equals the rank of the one built from A / omega
  // with unit columns; without the rescaling the powers of lambda spread the
  // singular values over tens of decades.
  double lambda_max = 0.0;
  for (double l : model.lambdas) lambda_max = std::max(lambda_max, std::abs(l));
  const double omega = lambda_max > 0.0 ? std::sqrt(lambda_max) : 1.0;
  Eigen::MatrixXd h = observability_matrix(model.a_matrix / omega, c_clean);
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    const double norm = h.col(j).norm();
    if (norm > 0.0) h.col(j) /= norm;
  }
  const Eigen::VectorXd sigma = h.jacobiSvd().singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    rep.singular_profile.push_back(sigma_max > 0.0 ? sigma(i) / sigma_max : 0.0);
    if (sigma_max > 0.0 && sigma(i) > zero_tol * sigma_max) ++rep.rank;
  }
  rep.observable = rep.rank == rep.state_dim;

  bool covered = true;
  for (int j = 0; j < n; ++j) {
    std::vector<int> outputs;
    for (Eigen::Index s = 0; s < model.num_outputs(); ++s)
      if (nonzero(model.c_matrix(s, position_index(j)))) outputs.push_back(static_cast<int>(s));
    covered = covered && !outputs.empty();
    rep.coverage.push_back(std::move(outputs));
  }

  const auto same = [&](double x, double y) {
    return std::abs(x - y) <= zero_tol * std::max(lambda_max, 1e-300);
  };
  rep.distinct_lambdas = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (same(model.lambdas[static_cast<std::size_t>(i)], model.lambdas[static_cast<std::size_t>(j)]))
        rep.distinct_lambdas = false;
  rep.sufficient_conditions = rep.distinct_lambdas && covered;

  rep.modal_test = true;
  std::vector<bool> grouped(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    if (grouped[static_cast<std::size_t>(i)]) continue;
    std::vector<Eigen::Index> cols;
    for (int j = i; j < n; ++j)
      if (!grouped[static_cast<std::size_t>(j)] &&
          same(model.lambdas[static_cast<std::size_t>(i)], model.lambdas[static_cast<std::size_t>(j)])) {
        grouped[static_cast<std::size_t>(j)] = true;
        cols.push_back(position_index(j));
      }
    Eigen::MatrixXd sub(model.num_outputs(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
      sub.col(static_cast<Eigen::Index>(k)) = c_clean.col(cols[k]);
    const Eigen::VectorXd sub_sigma = sub.jacobiSvd().singularValues();
    const auto sub_rank = (sub_sigma.array() > zero_tol * c_scale).count();
    if (c_scale == 0.0 || sub_rank < static_cast<Eigen::Index>(cols.size())) rep.modal_test = false;
  }

  if (n <= kMaxVandermondeModes)
    for (Eigen::Index s = 0; s < model.num_outputs(); ++s)
      rep.vandermonde_dets.push_back(vandermonde_det(detail::output_row(c_clean, s, n), model.lambdas));
  return rep;
}

struct ObserverGain {
  std::vector<double> gammas;  // one per output, all > 0
  Eigen::MatrixXd f_matrix;    // 2N x (r+1), velocity rows zero
  std::vector<std::string> warnings;
};

/// f_js = gamma_s c_sj / (lambda_j ||W_j||_H^2) in the position row of mode j.
[[nodiscard]] inline ObserverGain synthesize_gain(const ReducedModel& model,
                                                  std::vector<double> gammas) {
  if (static_cast<Eigen::Index>(gammas.size()) != model.num_outputs())
    throw ValidationError("expected " + std::to_string(model.num_outputs()) +
                          " gamma values (one per output), got " + std::to_string(gammas.size()));
  for (double g : gammas)
    if (!(std::isfinite(g) && g > 0.0)) throw ValidationError("observer gains gamma must be positive");
  for (double l : model.lambdas)
    if (!(l > 0.0)) throw ValidationError("observer synthesis needs positive eigenvalues");

  ObserverGain gain;
  gain.f_matrix = Eigen::MatrixXd::Zero(model.state_dim(), model.num_outputs());
  for (int j = 0; j < model.n_modes; ++j) {
    const double weight =
        model.lambdas[static_cast<std::size_t>(j)] * model.norms_h_sq[static_cast<std::size_t>(j)];
    for (Eigen::Index s = 0; s < model.num_outputs(); ++s)
      gain.f_matrix(position_index(j), s) =
          gammas[static_cast<std::size_t>(s)] * model.c_matrix(s, position_index(j)) / weight;
  }
  gain.gammas = std::move(gammas);
  if (!observability_report(model).observable)
    gain.warnings.push_back(
        "model is not observable: the gain is defined but error convergence is not guaranteed");
  return gain;
}

/// A - F C
[[nodiscard]] inline Eigen::MatrixXd error_system(const ReducedModel& model,
                                                  const ObserverGain& gain) {
  return model.a_matrix - gain.f_matrix * model.c_matrix;
}

/// Eigenvalues of A - F C, computed in coordinates (sqrt(lambda_j) q_j, p_j)
/// where A is skew-symmetric.
[[nodiscard]] inline Eigen::VectorXcd error_spectrum(const ReducedModel& model,
                                                     const ObserverGain& gain) {
  Eigen::VectorXd scale(model.state_dim());
  for (int j = 0; j < model.n_modes; ++j) {
    scale(position_index(j)) = std::sqrt(std::abs(model.lambdas[static_cast<std::size_t>(j)]));
    scale(velocity_index(j)) = 1.0;
    if (scale(position_index(j)) == 0.0) scale(position_index(j)) = 1.0;
  }
  const Eigen::MatrixXd balanced =
      scale.asDiagonal() * error_system(model, gain) * scale.cwiseInverse().asDiagonal();
  return Eigen::EigenSolver<Eigen::MatrixXd>(balanced, false).eigenvalues();
}

/// Largest real part of the error-system spectrum (negative when stable).
[[nodiscard]] inline double spectral_abscissa(const Eigen::VectorXcd& eigenvalues) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigenvalues) worst = std::max(worst, z.real());
  return worst;
}

/// W(e) = 1/2 sum_j ||W_j||_H^2 (delta_j^2 + lambda_j Delta_j^2) with
/// e = (Delta_1, delta_1, ..., Delta_N, delta_N).
[[nodiscard]] inline double lyapunov_value(const Eigen::Ref<const Eigen::VectorXd>& e,
                                           const ReducedModel& model) {
  double sum = 0.0;
  for (int j = 0; j < model.n_modes; ++j) {
    const double pos = e(position_index(j));
    const double vel = e(velocity_index(j));
    sum += model.norms_h_sq[static_cast<std::size_t>(j)] *
           (vel * vel + model.lambdas[static_cast<std::size_t>(j)] * pos * pos);
  }
  return 0.5 * sum;
}

/// dW/dt along de/dt = (A - F C) e: -sum_s gamma_s (C_s e)^2, summed over all
/// outputs including the shaker displacement.
[[nodiscard]] inline double lyapunov_rate(const Eigen::Ref<const Eigen::VectorXd>& e,
                                          const ReducedModel& model, const ObserverGain& gain) {
  double rate = 0.0;
  for (Eigen::Index s = 0; s < model.num_outputs(); ++s) {
    const double ys = model.c_matrix.row(s).dot(e);
    rate -= gain.gammas[static_cast<std::size_t>(s)] * ys * ys;
  }
  return rate;
}

}  // namespace beamobs
