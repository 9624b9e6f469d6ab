#pragma once

// Command-line front end: spectrum, assemble, check-obsv, simulate, replay.
// Exit codes: 0 success / observable, 1 negative verdict, 2 usage or
// validation error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "beamobs/config.hpp"
#include "beamobs/galerkin.hpp"
#include "beamobs/observer.hpp"
#include "beamobs/sim.hpp"
#include "beamobs/spectral.hpp"

namespace beamobs {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitNegative = 1,
  kExitUsage = 2,
  kExitNumeric = 3,
};

/// Lowercase hex SHA-256 of a byte string.
[[nodiscard]] inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

/// Everything needed to reproduce one invocation. Numeric settings are stored
/// resolved (defaults applied) so replay does not depend on default rules.
struct RunManifest {
  std::string subcommand;
  std::string input_kind = "config";  // "config" or "model"
  std::filesystem::path input_path;
  std::string input_sha256;
  std::optional<int> modes;
  std::optional<std::vector<double>> sensors;
  std::vector<double> gammas;
  bool observer = true;
  bool force = false;
  bool json = false;
  std::optional<double> t_final;
  std::optional<double> dt;
  std::optional<std::size_t> max_samples;
  std::vector<std::string> outputs;
  std::string toolkit_version = kToolkitVersion;

  [[nodiscard]] nlohmann::json to_json() const {
    using nlohmann::json;
    json params;
    params["modes"] = modes ? json(*modes) : json(nullptr);
    params["sensors"] = sensors ? json(*sensors) : json(nullptr);
    params["gammas"] = gammas;
    params["observer"] = observer;
    params["force"] = force;
    params["json"] = this->json;
    params["t_final"] = t_final ? json(*t_final) : json(nullptr);
    params["dt"] = dt ? json(*dt) : json(nullptr);
    params["max_samples"] = max_samples ? json(*max_samples) : json(nullptr);
    return json{{"toolkit_version", toolkit_version},
                {"subcommand", subcommand},
                {"input_kind", input_kind},
                {"input_path", input_path.string()},
                {"input_sha256", input_sha256},
                {"parameters", params},
                {"outputs", outputs}};
  }

  static RunManifest from_json(const nlohmann::json& j) {
    try {
      RunManifest m;
      m.toolkit_version = j.at("toolkit_version").get<std::string>();
      m.subcommand = j.at("subcommand").get<std::string>();
      m.input_kind = j.at("input_kind").get<std::string>();
      m.input_path = j.at("input_path").get<std::string>();
      m.input_sha256 = j.at("input_sha256").get<std::string>();
      const auto& p = j.at("parameters");
      if (!p.at("modes").is_null()) m.modes = p["modes"].get<int>();
      if (!p.at("sensors").is_null()) m.sensors = p["sensors"].get<std::vector<double>>();
      m.gammas = p.at("gammas").get<std::vector<double>>();
      m.observer = p.at("observer").get<bool>();
      m.force = p.at("force").get<bool>();
      m.json = p.at("json").get<bool>();
      if (!p.at("t_final").is_null()) m.t_final = p["t_final"].get<double>();
      if (!p.at("dt").is_null()) m.dt = p["dt"].get<double>();
      if (!p.at("max_samples").is_null()) m.max_samples = p["max_samples"].get<std::size_t>();
      m.outputs = j.at("outputs").get<std::vector<std::string>>();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("manifest: ") + e.what());
    }
  }
};

[[nodiscard]] inline std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << m.to_json().dump(2) << '\n';
}

namespace detail {

/// Default output location: $BEAMOBS_SEED_DIR/<name> or ./<name>.
inline std::filesystem::path default_output(const std::string& name) {
  if (const char* dir = std::getenv("BEAMOBS_SEED_DIR"); dir != nullptr && *dir != '\0')
    return std::filesystem::path(dir) / name;
  return std::filesystem::path(name);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LoadedInput {
  RunConfig config;
  std::string sha256;
};

inline LoadedInput load_input(RunManifest& m) {
  const std::string text = read_text_file(m.input_path);
  LoadedInput in{parse_run_config(text, m.input_path.string()), sha256_hex(text)};
  if (m.sensors) {
    in.config.system.sensors = *m.sensors;
    validate(in.config.system);
  }
  if (!m.modes) m.modes = in.config.simulation.modes;
  if (!m.modes) throw ValidationError("number of modes not given (--modes or simulation.modes)");
  m.input_sha256 = in.sha256;
  return in;
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int spectrum(RunManifest m) {
    auto in = load_input(m);
    warn(in.config.warnings);
    const auto modes = compute_modes(in.config.system, *m.modes);
    const double l0 = in.config.system.attach_point;
    if (m.json) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t j = 0; j < modes.size(); ++j)
        rows.push_back({{"mode_index", j + 1},
                        {"lambda", modes[j].lambda},
                        {"mu", modes[j].mu},
                        {"frequency_hz", frequency_hz(modes[j].lambda)},
                        {"norm_h_sq", modes[j].norm_h_sq},
                        {"W_at_l0", mode_eval(modes[j], l0, 0)}});
      out_ << rows.dump(2) << '\n';
    } else {
      out_ << std::setw(4) << "mode" << std::setw(22) << "lambda [1/s^2]" << std::setw(18)
           << "mu [1/m]" << std::setw(16) << "freq [Hz]" << std::setw(16) << "||W||_H^2"
           << std::setw(14) << "W(l0)" << '\n';
      for (std::size_t j = 0; j < modes.size(); ++j)
        out_ << std::setw(4) << j + 1 << std::setw(22) << std::setprecision(15)
             << modes[j].lambda << std::setw(18) << std::setprecision(12) << modes[j].mu
             << std::setw(16) << std::setprecision(9) << frequency_hz(modes[j].lambda)
             << std::setw(16) << std::setprecision(9) << modes[j].norm_h_sq << std::setw(14)
             << std::setprecision(6) << mode_eval(modes[j], l0, 0) << '\n';
    }
    if (!m.outputs.empty()) {
      std::string csv = "mode_index,lambda,mu,frequency_hz,norm_h_sq,W_at_l0\n";
      for (std::size_t j = 0; j < modes.size(); ++j)
        csv += std::to_string(j + 1) + ',' + g17(modes[j].lambda) + ',' + g17(modes[j].mu) + ',' +
               g17(frequency_hz(modes[j].lambda)) + ',' + g17(modes[j].norm_h_sq) + ',' +
               g17(mode_eval(modes[j], l0, 0)) + '\n';
      write_text(m.outputs.front(), csv);
      write_manifest(m, manifest_path_for(m.outputs.front()));
    }
    return kExitOk;
  }

  int assemble(RunManifest m) {
    auto in = load_input(m);
    warn(in.config.warnings);
    const auto modes = compute_modes(in.config.system, *m.modes);
    const ReducedModel model = build_reduced_model(in.config.system, modes);
    warn(model.warnings);
    const std::string text = to_json(model).dump(2) + '\n';
    if (m.outputs.empty()) {
      out_ << text;
    } else {
      write_text(m.outputs.front(), text);
      write_manifest(m, manifest_path_for(m.outputs.front()));
      out_ << "wrote " << m.outputs.front() << " (" << model.n_modes << " modes, "
           << model.num_inputs() << " inputs, " << model.num_outputs() << " outputs)\n";
    }
    return kExitOk;
  }

  int check_obsv(RunManifest m) {
    ReducedModel model;
    if (m.input_kind == "model") {
      const std::string text = read_text_file(m.input_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(m.input_path.string() + ": parse error: " + e.what());
      }
      model = reduced_model_from_json(j);
      m.input_sha256 = sha256_hex(text);
    } else {
      auto in = load_input(m);
      warn(in.config.warnings);
      const auto modes = compute_modes(in.config.system, *m.modes);
      model = build_reduced_model(in.config.system, modes);
    }
    warn(model.warnings);
    const ObservabilityReport rep = observability_report(model);
    if (m.json) {
      out_ << report_json(rep, model).dump(2) << '\n';
    } else {
      print_report(rep, model);
    }
    if (!m.outputs.empty()) {
      write_text(m.outputs.front(), report_json(rep, model).dump(2) + '\n');
      write_manifest(m, manifest_path_for(m.outputs.front()));
    }
    return rep.observable ? kExitOk : kExitNegative;
  }

  int simulate(RunManifest m) {
    auto in = load_input(m);
    warn(in.config.warnings);
    const auto& cfg = in.config;
    const auto modes = compute_modes(cfg.system, *m.modes);
    const ReducedModel model = build_reduced_model(cfg.system, modes);
    warn(model.warnings);
    const auto n = static_cast<std::size_t>(model.n_modes);

    if (!m.t_final) m.t_final = cfg.simulation.t_final.value_or(kDefaultFinalTime);
    if (!m.dt) m.dt = cfg.simulation.dt.value_or(default_time_step(model.lambdas));
    if (!m.max_samples) m.max_samples = cfg.simulation.max_samples;
    m.observer = m.observer && cfg.observer.enabled;

    std::optional<ObserverGain> gain;
    if (m.observer) {
      if (m.gammas.empty()) m.gammas = cfg.observer.gammas;
      if (m.gammas.empty())
        throw ValidationError("observer gains not given (--gamma or observer.gammas)");
      const ObservabilityReport rep = observability_report(model);
      if (!rep.observable && !m.force) {
        err_ << "error: model is not observable (rank " << rep.rank << " of " << rep.state_dim
             << "); pass --force to run the observer anyway\n";
        return kExitNegative;
      }
      gain = synthesize_gain(model, m.gammas);
      warn(gain->warnings);
    } else {
      m.gammas.clear();
    }

    const auto& init = cfg.simulation.initial;
    const auto q = expand_initial(init.q, n, "q");
    const auto p = expand_initial(init.p, n, "p");
    const auto qh = expand_initial(init.q_hat, n, "q_hat");
    const auto ph = expand_initial(init.p_hat, n, "p_hat");
    Eigen::VectorXd z0(model.state_dim()), zbar0(model.state_dim());
    for (std::size_t j = 0; j < n; ++j) {
      const int jj = static_cast<int>(j);
      z0(position_index(jj)) = q[j];
      z0(velocity_index(jj)) = p[j];
      zbar0(position_index(jj)) = qh[j];
      zbar0(velocity_index(jj)) = ph[j];
    }

    if (m.outputs.empty()) m.outputs.push_back(default_output("trajectory.csv").string());
    const IntegrationOptions opt{*m.t_final, *m.dt, *m.max_samples};
    const Trajectory traj = integrate(model, gain, cfg.simulation.forcing, z0, zbar0, opt);
    write_trajectory_csv(traj, m.outputs.front());
    write_manifest(m, manifest_path_for(m.outputs.front()));

    out_ << "wrote " << m.outputs.front() << ": " << traj.size() << " samples, " << model.n_modes
         << " modes, dt = " << std::setprecision(6) << traj.grid.dt << " s, "
         << traj.grid.n_steps << " steps\n";
    if (gain) {
      out_ << std::setprecision(9) << "weighted error: " << traj.err_weighted.front() << " -> "
           << traj.err_weighted.back() << "\nlyapunov W(e): " << traj.lyapunov.front() << " -> "
           << traj.lyapunov.back() << "\nspectral abscissa of A - FC: "
           << spectral_abscissa(error_spectrum(model, *gain)) << '\n';
    }
    return kExitOk;
  }

  int dispatch(const RunManifest& m) {
    if (m.subcommand == "spectrum") return spectrum(m);
    if (m.subcommand == "assemble") return assemble(m);
    if (m.subcommand == "check-obsv") return check_obsv(m);
    if (m.subcommand == "simulate") return simulate(m);
    throw ValidationError("unknown subcommand '" + m.subcommand + "'");
  }

  int replay(const std::filesystem::path& manifest_path, const std::string& out_override) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(manifest_path.string() + ": parse error: " + e.what());
    }
    RunManifest m = RunManifest::from_json(j);
    const std::string actual = sha256_hex(read_text_file(m.input_path));
    if (actual != m.input_sha256)
      throw ValidationError("input '" + m.input_path.string() +
                            "' changed since the manifest was written (sha256 mismatch)");
    if (!out_override.empty()) m.outputs = {out_override};
    return dispatch(m);
  }

 private:
  static double frequency_hz(double lambda) {
    return std::sqrt(lambda) / (2.0 * std::numbers::pi);
  }

  void warn(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) err_ << "warning: " << w << '\n';
  }

  static nlohmann::json report_json(const ObservabilityReport& rep, const ReducedModel& model) {
    return nlohmann::json{{"rank", rep.rank},
                          {"state_dim", rep.state_dim},
                          {"observable", rep.observable},
                          {"distinct_lambdas", rep.distinct_lambdas},
                          {"sufficient_conditions", rep.sufficient_conditions},
                          {"modal_test", rep.modal_test},
                          {"coverage", rep.coverage},
                          {"lambdas", model.lambdas},
                          {"vandermonde_dets", rep.vandermonde_dets},
                          {"singular_profile", rep.singular_profile}};
  }

  void print_report(const ObservabilityReport& rep, const ReducedModel& model) {
    out_ << "observability rank " << rep.rank << " of " << rep.state_dim << ": "
         << (rep.observable ? "observable" : "NOT observable") << '\n';
    out_ << "eigenvalues distinct: " << (rep.distinct_lambdas ? "yes" : "no") << '\n';
    for (int j = 0; j < model.n_modes; ++j) {
      const auto& cov = rep.coverage[static_cast<std::size_t>(j)];
      out_ << "  mode " << j + 1 << " (lambda = " << std::setprecision(10)
           << model.lambdas[static_cast<std::size_t>(j)] << ") seen by outputs:";
      if (cov.empty()) out_ << " none";
      for (int s : cov) out_ << " y_" << s;
      out_ << '\n';
    }
    out_ << "sufficient conditions (distinct eigenvalues, every mode seen): "
         << (rep.sufficient_conditions ? "met" : "NOT met") << '\n';
    out_ << "modal test: " << (rep.modal_test ? "pass" : "fail") << '\n';
    for (std::size_t s = 0; s < rep.vandermonde_dets.size(); ++s)
      out_ << "  det H_" << s << " = " << std::setprecision(6) << rep.vandermonde_dets[s] << '\n';
    out_ << "singular value profile:";
    for (double v : rep.singular_profile) out_ << ' ' << std::setprecision(3) << v;
    out_ << '\n';
  }

  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace detail

/// Runs the command line; never calls exit().
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Modal analysis and observer design for a hinged beam with a shaker", "beamobs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);

  struct Flags {
    std::string config, model, out, manifest;
    int modes = 0;
    std::vector<double> gammas, sensors;
    double t_final = 0.0, dt = 0.0;
    bool json = false, no_observer = false, force = false;
  } f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--modes", f.modes, "number of modes N")->check(CLI::PositiveNumber);
    sub->add_option("--sensors", f.sensors, "strain gauge positions l1,l2,... (overrides config)")
        ->delimiter(',');
    sub->add_option("--out", f.out, "output path");
    sub->add_flag("--json", f.json, "machine-readable output");
  };

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and mode data");
  spectrum->add_option("--config", f.config, "configuration file")->required();
  add_common(spectrum);

  auto* assemble = app.add_subcommand("assemble", "export A, B, C and mode metadata as JSON");
  assemble->add_option("--config", f.config, "configuration file")->required();
  add_common(assemble);

  auto* check = app.add_subcommand("check-obsv", "observability report");
  auto* cfg_opt = check->add_option("--config", f.config, "configuration file");
  auto* model_opt = check->add_option("--model", f.model, "model bundle written by assemble");
  cfg_opt->excludes(model_opt);
  add_common(check);

  auto* simulate = app.add_subcommand("simulate", "integrate plant and observer, write CSV");
  simulate->add_option("--config", f.config, "configuration file")->required();
  add_common(simulate);
  simulate->add_option("--gamma", f.gammas, "observer gains G0[,G1,...]")->delimiter(',');
  simulate->add_option("--t-final", f.t_final, "final time [s]");
  simulate->add_option("--dt", f.dt, "time step [s]");
  simulate->add_flag("--no-observer", f.no_observer, "integrate the plant only");
  simulate->add_flag("--force", f.force, "run the observer even if the model is unobservable");

  auto* replay = app.add_subcommand("replay", "re-run an invocation from its manifest");
  replay->add_option("--manifest", f.manifest, "manifest written next to an output")->required();
  replay->add_option("--out", f.out, "write to this path instead of the recorded one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  detail::Runner runner(out, err);
  try {
    if (replay->parsed()) return runner.replay(f.manifest, f.out);

    RunManifest m;
    m.json = f.json;
    if (f.modes > 0) m.modes = f.modes;
    if (!f.sensors.empty()) m.sensors = f.sensors;
    if (!f.out.empty()) m.outputs.push_back(f.out);

    if (check->parsed()) {
      if (f.config.empty() == f.model.empty()) {
        err << "error: check-obsv needs exactly one of --config or --model\n";
        return kExitUsage;
      }
      m.subcommand = "check-obsv";
      m.input_kind = f.model.empty() ? "config" : "model";
      m.input_path = std::filesystem::absolute(f.model.empty() ? f.config : f.model);
      if (m.input_kind == "model" && m.sensors) {
        err << "error: --sensors cannot be combined with --model\n";
        return kExitUsage;
      }
      return runner.check_obsv(m);
    }

    m.input_path = std::filesystem::absolute(f.config);
    if (spectrum->parsed()) {
      m.subcommand = "spectrum";
      return runner.spectrum(m);
    }
    if (assemble->parsed()) {
      m.subcommand = "assemble";
      return runner.assemble(m);
    }
    m.subcommand = "simulate";
    m.gammas = f.gammas;
    for (double g : m.gammas)
      if (!(g > 0.0)) throw ValidationError("--gamma values must be positive");
    m.observer = !f.no_observer;
    m.force = f.force;
    if (simulate->count("--t-final")) m.t_final = f.t_final;
    if (simulate->count("--dt")) m.dt = f.dt;
    return runner.simulate(m);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace beamobs
