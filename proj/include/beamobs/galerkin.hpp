#pragma once

// Galerkin projection onto the first N modes: state z = (q1, p1, ..., qN, pN),
// dz/dt = A z + B u, y = C z.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "beamobs/model.hpp"
#include "beamobs/quadrature.hpp"
#include "beamobs/spectral.hpp"

namespace beamobs {

struct ReducedModel {
  int n_modes = 0;
  Eigen::MatrixXd a_matrix;  // 2N x 2N
  Eigen::MatrixXd b_matrix;  // 2N x (k+1)
  Eigen::MatrixXd c_matrix;  // (r+1) x 2N
  std::vector<double> lambdas;
  std::vector<double> norms_h_sq;
  std::vector<double> wavenumbers;  // empty for synthetic models
  std::vector<double> sensors;
  double shaker_mass = 0.0;
  double shaker_stiffness = 0.0;
  std::vector<std::string> warnings;

  [[nodiscard]] Eigen::Index state_dim() const { return 2 * n_modes; }
  [[nodiscard]] Eigen::Index num_inputs() const { return b_matrix.cols(); }
  [[nodiscard]] Eigen::Index num_outputs() const { return c_matrix.rows(); }
};

inline constexpr int kCouplingQuadratureOrder = 8;

/// Position slot of mode j (0-based) in the state vector.
constexpr Eigen::Index position_index(int j) { return 2 * j; }
/// Velocity slot of mode j (0-based) in the state vector.
constexpr Eigen::Index velocity_index(int j) { return 2 * j + 1; }

/// Block-diagonal oscillator matrix diag([[0, 1], [-lambda_j, 0]]).
[[nodiscard]] inline Eigen::MatrixXd assemble_A(std::span<const double> lambdas) {
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    a(2 * j, 2 * j + 1) = 1.0;
    a(2 * j + 1, 2 * j) = -lambdas[static_cast<std::size_t>(j)];
  }
  return a;
}

/// Empty when lambdas are strictly increasing and positive, otherwise a
/// description of the first offence.
[[nodiscard]] inline std::string spectrum_warning(std::span<const double> lambdas) {
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(lambdas[j] > 0.0))
      return "lambda_" + std::to_string(j + 1) + " is not positive";
    if (j > 0 && !(lambdas[j] > lambdas[j - 1]))
      return "lambda_" + std::to_string(j) + " and lambda_" + std::to_string(j + 1) +
             " are not distinct and increasing; the distinct-eigenvalue observability test does not apply";
  }
  return {};
}

/// int psi(x) W''(x) dx, Gauss-Legendre per polynomial piece.
[[nodiscard]] inline double actuator_coupling(const Mode& mode, const ActuatorShape& shape,
                                              int order = kCouplingQuadratureOrder) {
  const GaussLegendreRule rule(order);
  double total = 0.0;
  for (const auto& piece : shape.pieces)
    total += rule.integrate([&](double x) { return piece(x) * mode_eval(mode, x, 2); },
                            piece.lo, piece.hi);
  return total;
}

/// Input matrix: row 2j+1 holds (W_j(l0), int psi_1 W_j'', ..., int psi_k W_j'')
/// divided by ||W_j||_H^2; position rows are zero.
[[nodiscard]] inline Eigen::MatrixXd assemble_B(std::span<const Mode> modes,
                                                std::span<const ActuatorShape> actuators,
                                                const BeamSystem& sys) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  const auto k = static_cast<Eigen::Index>(actuators.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * n, k + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Mode& mode = modes[static_cast<std::size_t>(j)];
    b(2 * j + 1, 0) = mode_eval(mode, sys.attach_point, 0) / mode.norm_h_sq;
    for (Eigen::Index i = 0; i < k; ++i)
      b(2 * j + 1, i + 1) =
          actuator_coupling(mode, actuators[static_cast<std::size_t>(i)]) / mode.norm_h_sq;
  }
  return b;
}

/// Output matrix: row 0 is the shaker displacement W_j(l0), row s the
/// curvature W_j''(l_s); velocity columns are zero.
[[nodiscard]] inline Eigen::MatrixXd assemble_C(std::span<const Mode> modes,
                                                std::span<const double> sensors,
                                                const BeamSystem& sys) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  const auto r = static_cast<Eigen::Index>(sensors.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(r + 1, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Mode& mode = modes[static_cast<std::size_t>(j)];
    c(0, 2 * j) = mode_eval(mode, sys.attach_point, 0);
    for (Eigen::Index s = 0; s < r; ++s)
      c(s + 1, 2 * j) = mode_eval(mode, sensors[static_cast<std::size_t>(s)], 2);
  }
  return c;
}

[[nodiscard]] inline ReducedModel build_reduced_model(const BeamSystem& sys,
                                                      std::span<const Mode> modes) {
  ReducedModel model;
  model.n_modes = static_cast<int>(modes.size());
  for (const auto& m : modes) {
    model.lambdas.push_back(m.lambda);
    model.norms_h_sq.push_back(m.norm_h_sq);
    model.wavenumbers.push_back(m.mu);
  }
  model.a_matrix = assemble_A(model.lambdas);
  model.b_matrix = assemble_B(modes, sys.actuators, sys);
  model.c_matrix = assemble_C(modes, sys.sensors, sys);
  model.sensors = sys.sensors;
  model.shaker_mass = sys.shaker_mass;
  model.shaker_stiffness = sys.shaker_stiffness;
  if (auto w = spectrum_warning(model.lambdas); !w.empty()) model.warnings.push_back(w);
  return model;
}

/// Model from already known modal data; used for synthetic models and for
/// loading exported bundles.
[[nodiscard]] inline ReducedModel make_reduced_model(std::vector<double> lambdas,
                                                     std::vector<double> norms_h_sq,
                                                     const Eigen::MatrixXd& b,
                                                     const Eigen::MatrixXd& c) {
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  if (n == 0) throw ValidationError("model needs at least one mode");
  if (static_cast<Eigen::Index>(norms_h_sq.size()) != n)
    throw ValidationError("norms_h_sq must have one entry per mode");
  for (double w : norms_h_sq)
    if (!(w > 0.0)) throw ValidationError("norms_h_sq entries must be positive");
  if (b.rows() != 2 * n || b.cols() < 1)
    throw ValidationError("B must have 2N rows and at least one column");
  if (c.cols() != 2 * n || c.rows() < 1)
    throw ValidationError("C must have 2N columns and at least one row");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!b.row(2 * j).isZero(0.0)) throw ValidationError("B position rows must be zero");
    if (!c.col(2 * j + 1).isZero(0.0)) throw ValidationError("C velocity columns must be zero");
  }
  ReducedModel model;
  model.n_modes = static_cast<int>(n);
  model.a_matrix = assemble_A(lambdas);
  model.b_matrix = b;
  model.c_matrix = c;
  model.lambdas = std::move(lambdas);
  model.norms_h_sq = std::move(norms_h_sq);
  if (auto w = spectrum_warning(model.lambdas); !w.empty()) model.warnings.push_back(w);
  return model;
}

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const std::string& name) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw ValidationError("'" + name + "' must be a non-empty array of rows");
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != nc)
      throw ValidationError("'" + name + "' rows must all have the same length");
    for (Eigen::Index j = 0; j < nc; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw ValidationError("'" + name + "' entries must be numbers");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

}  // namespace detail

/// Bundle with A, B, C and per-mode metadata, readable by external tools and
/// by reduced_model_from_json.
[[nodiscard]] inline nlohmann::json to_json(const ReducedModel& model) {
  nlohmann::json j;
  j["n_modes"] = model.n_modes;
  j["state_ordering"] = "q1,p1,...,qN,pN";
  j["lambdas"] = model.lambdas;
  j["norms_h_sq"] = model.norms_h_sq;
  j["wavenumbers"] = model.wavenumbers;
  j["sensors"] = model.sensors;
  j["shaker_mass"] = model.shaker_mass;
  j["shaker_stiffness"] = model.shaker_stiffness;
  j["A"] = detail::matrix_to_json(model.a_matrix);
  j["B"] = detail::matrix_to_json(model.b_matrix);
  j["C"] = detail::matrix_to_json(model.c_matrix);
  j["warnings"] = model.warnings;
  return j;
}

/// Reads a bundle. Only lambdas, norms_h_sq and C are required; a missing B
/// means a single shaker input with zero coupling.
[[nodiscard]] inline ReducedModel reduced_model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("lambdas") || !j.contains("norms_h_sq") || !j.contains("C"))
      throw ValidationError("model bundle needs 'lambdas', 'norms_h_sq' and 'C'");
    auto lambdas = j.at("lambdas").get<std::vector<double>>();
    auto norms = j.at("norms_h_sq").get<std::vector<double>>();
    const auto n = static_cast<Eigen::Index>(lambdas.size());
    const Eigen::MatrixXd c = detail::matrix_from_json(j.at("C"), "C");
    const Eigen::MatrixXd b = j.contains("B") ? detail::matrix_from_json(j.at("B"), "B")
                                              : Eigen::MatrixXd::Zero(2 * n, 1).eval();
    ReducedModel model = make_reduced_model(std::move(lambdas), std::move(norms), b, c);
    if (j.contains("A")) {
      const Eigen::MatrixXd a = detail::matrix_from_json(j.at("A"), "A");
      if (a.rows() != model.a_matrix.rows() || a.cols() != model.a_matrix.cols() ||
          a != model.a_matrix)
        throw ValidationError("'A' is inconsistent with 'lambdas'");
    }
    if (j.contains("wavenumbers")) model.wavenumbers = j["wavenumbers"].get<std::vector<double>>();
    if (j.contains("sensors")) model.sensors = j["sensors"].get<std::vector<double>>();
    model.shaker_mass = j.value("shaker_mass", 0.0);
    model.shaker_stiffness = j.value("shaker_stiffness", 0.0);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model bundle: ") + e.what());
  }
}

}  // namespace beamobs
