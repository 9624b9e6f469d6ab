#pragma once

// Joint fixed-step RK4 integration of the reduced plant and its observer,
// with estimation-error diagnostics and CSV persistence.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beamobs/forcing.hpp"
#include "beamobs/galerkin.hpp"
#include "beamobs/observer.hpp"

namespace beamobs {

/// Default resolution of the fastest retained mode.
inline constexpr int kDefaultStepsPerPeriod = 200;
inline constexpr double kDefaultFinalTime = 20.0;
inline constexpr std::size_t kDefaultMaxSamples = 20000;

/// 2 pi / (steps_per_period sqrt(lambda_max)).
[[nodiscard]] inline double default_time_step(std::span<const double> lambdas,
                                              int steps_per_period = kDefaultStepsPerPeriod) {
  double lambda_max = 0.0;
  for (double l : lambdas) lambda_max = std::max(lambda_max, l);
  if (!(lambda_max > 0.0)) throw ValidationError("default time step needs a positive eigenvalue");
  return 2.0 * std::numbers::pi / (steps_per_period * std::sqrt(lambda_max));
}

struct IntegrationOptions {
  double t_final = kDefaultFinalTime;
  double dt = 0.0;
  std::size_t max_samples = kDefaultMaxSamples;
};

/// Uniform grid actually used: n_steps steps of length dt (<= requested dt)
/// ending exactly at t_final, stored every stride steps.
struct TimeGrid {
  long n_steps = 0;
  long stride = 1;
  double dt = 0.0;

  [[nodiscard]] long n_samples() const { return n_steps / stride + 1; }
};

[[nodiscard]] inline TimeGrid plan_time_grid(const IntegrationOptions& opt) {
  if (!(std::isfinite(opt.dt) && opt.dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(std::isfinite(opt.t_final) && opt.t_final >= opt.dt))
    throw ValidationError("t_final must be at least dt");
  if (opt.max_samples < 2) throw ValidationError("max_samples must be at least 2");
  const double ratio = opt.t_final / opt.dt;
  // Tolerate t_final / dt landing a rounding error above an integer.
  long raw = static_cast<long>(std::ceil(ratio * (1.0 - 1e-14)));
  raw = std::max(raw, 1L);
  TimeGrid g;
  const auto cap = static_cast<long>(opt.max_samples) - 1;
  g.stride = (raw + cap - 1) / cap;
  g.n_steps = ((raw + g.stride - 1) / g.stride) * g.stride;
  g.dt = opt.t_final / static_cast<double>(g.n_steps);
  return g;
}

struct Trajectory {
  int n_modes = 0;
  Eigen::Index n_outputs = 0;
  bool has_observer = false;
  double shaker_mass = 0.0;
  double shaker_stiffness = 0.0;
  TimeGrid grid;

  std::vector<double> times;
  std::vector<Eigen::VectorXd> plant;     // z(t)
  std::vector<Eigen::VectorXd> observer;  // zbar(t), empty without observer
  std::vector<Eigen::VectorXd> outputs;   // y(t) = C z(t)
  std::vector<double> err_weighted;       // observer runs only
  std::vector<double> lyapunov;           // observer runs only
  std::vector<Eigen::VectorXd> mode_errors;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

/// kappa/2 sum Delta_j^2 + m/2 sum delta_j^2 for the error e = z - zbar.
[[nodiscard]] inline double weighted_error_of(const Eigen::Ref<const Eigen::VectorXd>& e,
                                              double stiffness, double mass) {
  double pos = 0.0, vel = 0.0;
  for (Eigen::Index j = 0; 2 * j + 1 < e.size(); ++j) {
    pos += e(2 * j) * e(2 * j);
    vel += e(2 * j + 1) * e(2 * j + 1);
  }
  return 0.5 * stiffness * pos + 0.5 * mass * vel;
}

/// Weighted error at every sample of an observer run.
[[nodiscard]] inline std::vector<double> weighted_error(const Trajectory& traj) {
  if (!traj.has_observer) throw ValidationError("weighted error needs an observer trajectory");
  std::vector<double> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    out.push_back(weighted_error_of(traj.plant[i] - traj.observer[i], traj.shaker_stiffness,
                                    traj.shaker_mass));
  return out;
}

/// Integrates dz/dt = A z + B u and, with a gain, the observer
/// dzbar/dt = (A - F C) zbar + B u + F C z as one coupled linear system.
[[nodiscard]] inline Trajectory integrate(const ReducedModel& model,
                                          const std::optional<ObserverGain>& gain,
                                          const Forcing& forcing, const Eigen::VectorXd& z0,
                                          const Eigen::VectorXd& zbar0,
                                          const IntegrationOptions& opt) {
  const Eigen::Index n = model.state_dim();
  if (z0.size() != n) throw ValidationError("initial plant state has the wrong dimension");
  const bool observe = gain.has_value();
  if (observe) {
    if (zbar0.size() != n) throw ValidationError("initial observer state has the wrong dimension");
    if (gain->f_matrix.rows() != n || gain->f_matrix.cols() != model.num_outputs())
      throw ValidationError("observer gain does not match the model");
  }
  for (std::size_t ch = model.num_inputs(); ch < forcing.size(); ++ch)
    if (forcing[ch].kind() != ForcingSignal::Kind::zero)
      throw ValidationError("forcing given for input channel " + std::to_string(ch) +
                            " which the model does not have");

  const TimeGrid grid = plan_time_grid(opt);
  const Eigen::Index dim = observe ? 2 * n : n;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd input(dim, model.num_inputs());
  system.topLeftCorner(n, n) = model.a_matrix;
  input.topRows(n) = model.b_matrix;
  if (observe) {
    const Eigen::MatrixXd fc = gain->f_matrix * model.c_matrix;
    system.bottomLeftCorner(n, n) = fc;
    system.bottomRightCorner(n, n) = model.a_matrix - fc;
    input.bottomRows(n) = model.b_matrix;
  }

  Eigen::VectorXd u(model.num_inputs());
  auto rhs = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
    for (Eigen::Index ch = 0; ch < u.size(); ++ch)
      u(ch) = channel_value(forcing, static_cast<std::size_t>(ch), t);
    return system * x + input * u;
  };

  Trajectory traj;
  traj.n_modes = model.n_modes;
  traj.n_outputs = model.num_outputs();
  traj.has_observer = observe;
  traj.shaker_mass = model.shaker_mass;
  traj.shaker_stiffness = model.shaker_stiffness;
  traj.grid = grid;
  const auto samples = static_cast<std::size_t>(grid.n_samples());
  traj.times.reserve(samples);
  traj.plant.reserve(samples);
  traj.outputs.reserve(samples);

  auto record = [&](double t, const Eigen::VectorXd& x) {
    const Eigen::VectorXd z = x.head(n);
    traj.times.push_back(t);
    traj.plant.push_back(z);
    traj.outputs.push_back(model.c_matrix * z);
    if (!observe) return;
    const Eigen::VectorXd zbar = x.tail(n);
    const Eigen::VectorXd e = z - zbar;
    traj.observer.push_back(zbar);
    traj.err_weighted.push_back(
        weighted_error_of(e, model.shaker_stiffness, model.shaker_mass));
    traj.lyapunov.push_back(lyapunov_value(e, model));
    Eigen::VectorXd per_mode(model.n_modes);
    for (int j = 0; j < model.n_modes; ++j) {
      const double d_pos = e(position_index(j));
      const double d_vel = e(velocity_index(j));
      per_mode(j) = 0.5 * model.shaker_stiffness * d_pos * d_pos +
                    0.5 * model.shaker_mass * d_vel * d_vel;
    }
    traj.mode_errors.push_back(std::move(per_mode));
  };

  Eigen::VectorXd x(dim);
  x.head(n) = z0;
  if (observe) x.tail(n) = zbar0;
  record(0.0, x);

  const double h = grid.dt;
  for (long k = 0; k < grid.n_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Eigen::VectorXd k1 = rhs(t, x);
    const Eigen::VectorXd k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite state at t = " << static_cast<double>(k + 1) * h;
      throw SolverError(os.str());
    }
    if ((k + 1) % grid.stride == 0) record(static_cast<double>(k + 1) * h, x);
  }
  return traj;
}

/// Column names of the trajectory CSV.
[[nodiscard]] inline std::vector<std::string> trajectory_columns(int n_modes, Eigen::Index n_outputs,
                                                                 bool has_observer) {
  std::vector<std::string> cols{"t"};
  auto series = [&](const std::string& prefix, int first, int count) {
    for (int i = 0; i < count; ++i) cols.push_back(prefix + std::to_string(first + i));
  };
  series("q_", 1, n_modes);
  series("p_", 1, n_modes);
  if (has_observer) {
    series("qhat_", 1, n_modes);
    series("phat_", 1, n_modes);
  }
  series("y_", 0, static_cast<int>(n_outputs));
  if (has_observer) {
    cols.emplace_back("err_weighted");
    cols.emplace_back("lyapunov");
    series("errmode_", 1, n_modes);
  }
  return cols;
}

namespace detail {

inline void put_number(std::string& line, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  line.append(buf, static_cast<std::size_t>(len));
}

}  // namespace detail

/// Writes the trajectory with 17 significant digits per value.
inline void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  const auto cols = trajectory_columns(traj.n_modes, traj.n_outputs, traj.has_observer);
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  out << line << '\n';

  const int n = traj.n_modes;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    line.clear();
    auto put = [&](double v) {
      line += ',';
      detail::put_number(line, v);
    };
    detail::put_number(line, traj.times[i]);
    const auto& z = traj.plant[i];
    for (int j = 0; j < n; ++j) put(z(position_index(j)));
    for (int j = 0; j < n; ++j) put(z(velocity_index(j)));
    if (traj.has_observer) {
      const auto& zb = traj.observer[i];
      for (int j = 0; j < n; ++j) put(zb(position_index(j)));
      for (int j = 0; j < n; ++j) put(zb(velocity_index(j)));
    }
    for (Eigen::Index s = 0; s < traj.n_outputs; ++s) put(traj.outputs[i](s));
    if (traj.has_observer) {
      put(traj.err_weighted[i]);
      put(traj.lyapunov[i]);
      for (int j = 0; j < n; ++j) put(traj.mode_errors[i](j));
    }
    out << line << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

/// Parsed numeric CSV.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::ptrdiff_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
  }
};

[[nodiscard]] inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path.string() + "' is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw std::runtime_error("bad number on line " + std::to_string(lineno));
      row.push_back(v);
      if (next == end) break;
      if (*next != ',') throw std::runtime_error("bad separator on line " + std::to_string(lineno));
      p = next + 1;
    }
    if (row.size() != table.header.size())
      throw std::runtime_error("line " + std::to_string(lineno) + " has " +
                               std::to_string(row.size()) + " fields, header has " +
                               std::to_string(table.header.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace beamobs
