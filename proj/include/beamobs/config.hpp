#pragma once

// JSON configuration file: sections beam, shaker, actuators, sensors,
// simulation and observer. See README.md for the full key list.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "beamobs/forcing.hpp"
#include "beamobs/model.hpp"

namespace beamobs {

/// Initial modal coordinates. A single entry is broadcast to every mode.
struct InitialState {
  std::vector<double> q{0.0};
  std::vector<double> p{0.0};
  std::vector<double> q_hat{0.0};
  std::vector<double> p_hat{0.0};

  friend bool operator==(const InitialState&, const InitialState&) = default;
};

struct SimulationSettings {
  std::optional<int> modes;
  std::optional<double> t_final;
  std::optional<double> dt;
  std::size_t max_samples = 20000;
  Forcing forcing;  // indexed by input channel
  InitialState initial;

  friend bool operator==(const SimulationSettings&, const SimulationSettings&) = default;
};

struct ObserverSettings {
  bool enabled = true;
  std::vector<double> gammas;

  friend bool operator==(const ObserverSettings&, const ObserverSettings&) = default;
};

struct RunConfig {
  BeamSystem system;
  SimulationSettings simulation;
  ObserverSettings observer;
  std::vector<std::string> warnings;  // unknown keys and similar, never fatal
};

/// Expands a broadcastable initial-state entry to n values.
inline std::vector<double> expand_initial(const std::vector<double>& values, std::size_t n,
                                          const std::string& name) {
  if (values.size() == 1) return std::vector<double>(n, values.front());
  if (values.size() != n)
    throw ValidationError("simulation.initial." + name + " has " +
                          std::to_string(values.size()) + " entries, expected 1 or " +
                          std::to_string(n));
  return values;
}

namespace detail {

using nlohmann::json;

class ConfigReader {
 public:
  explicit ConfigReader(std::vector<std::string>& warnings) : warnings_(warnings) {}

  const json& section(const json& parent, const std::string& key, const std::string& path) {
    if (!parent.contains(key)) throw ValidationError("missing required section '" + path + "'");
    const json& node = parent.at(key);
    if (!node.is_object()) throw ValidationError("'" + path + "' must be an object");
    return node;
  }

  double number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw ValidationError("missing required key '" + path + "'");
    return as_number(obj.at(key), path);
  }

  static double as_number(const json& node, const std::string& path) {
    if (!node.is_number()) throw ValidationError("'" + path + "' must be a number");
    return node.get<double>();
  }

  static std::vector<double> number_list(const json& node, const std::string& path) {
    if (node.is_number()) return {node.get<double>()};
    if (!node.is_array()) throw ValidationError("'" + path + "' must be a number or an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i)
      out.push_back(as_number(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  void check_keys(const json& obj, std::initializer_list<const char*> known,
                  const std::string& path) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& item : obj.items())
      if (!allowed.contains(item.key()))
        warnings_.push_back("unknown key '" + (path.empty() ? "" : path + ".") + item.key() +
                            "' ignored");
  }

 private:
  std::vector<std::string>& warnings_;
};

inline ForcingSignal parse_signal(const json& node, const std::string& path) {
  const std::string kind = node.value("kind", std::string("zero"));
  if (kind == "zero") return ForcingSignal::zero();
  if (kind == "sinusoid") {
    return ForcingSignal::sinusoid(
        ConfigReader::as_number(node.value("amplitude", json(1.0)), path + ".amplitude"),
        ConfigReader::as_number(node.value("omega", json(0.0)), path + ".omega"),
        ConfigReader::as_number(node.value("phase", json(0.0)), path + ".phase"));
  }
  if (kind == "table") {
    if (!node.contains("times") || !node.contains("values"))
      throw ValidationError("'" + path + "' table forcing needs 'times' and 'values'");
    return ForcingSignal::table(ConfigReader::number_list(node.at("times"), path + ".times"),
                                ConfigReader::number_list(node.at("values"), path + ".values"));
  }
  throw ValidationError("'" + path + ".kind' must be one of zero, sinusoid, table");
}

inline json signal_to_json(const ForcingSignal& f, std::size_t channel) {
  json node{{"channel", channel}};
  switch (f.kind()) {
    case ForcingSignal::Kind::zero:
      node["kind"] = "zero";
      break;
    case ForcingSignal::Kind::sinusoid:
      node["kind"] = "sinusoid";
      node["amplitude"] = f.amplitude();
      node["omega"] = f.omega();
      node["phase"] = f.phase();
      break;
    case ForcingSignal::Kind::table:
      node["kind"] = "table";
      node["times"] = f.times();
      node["values"] = f.values();
      break;
  }
  return node;
}

}  // namespace detail

/// Parses configuration text; `origin` only labels error messages.
inline RunConfig parse_run_config(const std::string& text, const std::string& origin = "config") {
  using nlohmann::json;
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": parse error: " + e.what());
  }
  if (!root.is_object()) throw ValidationError(origin + ": top level must be an object");

  RunConfig cfg;
  detail::ConfigReader rd(cfg.warnings);
  rd.check_keys(root, {"beam", "shaker", "actuators", "sensors", "simulation", "observer"}, "");

  try {
    const json& beam = rd.section(root, "beam", "beam");
    rd.check_keys(beam, {"length", "youngs_modulus", "area_moment", "mass_per_length"}, "beam");
    auto& sys = cfg.system;
    sys.length = rd.number(beam, "length", "beam.length");
    sys.youngs_modulus = rd.number(beam, "youngs_modulus", "beam.youngs_modulus");
    sys.area_moment = rd.number(beam, "area_moment", "beam.area_moment");
    sys.mass_per_length = rd.number(beam, "mass_per_length", "beam.mass_per_length");

    const json& shaker = rd.section(root, "shaker", "shaker");
    rd.check_keys(shaker, {"position", "mass", "stiffness"}, "shaker");
    sys.attach_point = rd.number(shaker, "position", "shaker.position");
    sys.shaker_mass = rd.number(shaker, "mass", "shaker.mass");
    sys.shaker_stiffness = rd.number(shaker, "stiffness", "shaker.stiffness");

    if (root.contains("actuators")) {
      const json& acts = root.at("actuators");
      if (!acts.is_array()) throw ValidationError("'actuators' must be an array");
      for (std::size_t j = 0; j < acts.size(); ++j) {
        const std::string path = "actuators[" + std::to_string(j) + "]";
        if (!acts[j].is_object() || !acts[j].contains("pieces") || !acts[j]["pieces"].is_array())
          throw ValidationError("'" + path + "' must be an object with a 'pieces' array");
        rd.check_keys(acts[j], {"name", "pieces"}, path);
        ActuatorShape shape;
        const json& pieces = acts[j]["pieces"];
        for (std::size_t p = 0; p < pieces.size(); ++p) {
          const std::string ppath = path + ".pieces[" + std::to_string(p) + "]";
          if (!pieces[p].is_object()) throw ValidationError("'" + ppath + "' must be an object");
          rd.check_keys(pieces[p], {"interval", "coefficients"}, ppath);
          if (!pieces[p].contains("interval") || !pieces[p].contains("coefficients"))
            throw ValidationError("'" + ppath + "' needs 'interval' and 'coefficients'");
          const auto interval =
              detail::ConfigReader::number_list(pieces[p]["interval"], ppath + ".interval");
          const auto coeffs = detail::ConfigReader::number_list(pieces[p]["coefficients"],
                                                                ppath + ".coefficients");
          if (interval.size() != 2)
            throw ValidationError("'" + ppath + ".interval' must be [lo, hi]");
          if (coeffs.empty() || coeffs.size() > 4)
            throw ValidationError("'" + ppath + ".coefficients' must hold 1 to 4 values");
          PolynomialPiece piece;
          piece.lo = interval[0];
          piece.hi = interval[1];
          std::copy(coeffs.begin(), coeffs.end(), piece.coeffs.begin());
          shape.pieces.push_back(piece);
        }
        sys.actuators.push_back(std::move(shape));
      }
    }

    if (root.contains("sensors")) {
      const json& sensors = root.at("sensors");
      if (sensors.is_array()) {
        sys.sensors = detail::ConfigReader::number_list(sensors, "sensors");
      } else if (sensors.is_object()) {
        rd.check_keys(sensors, {"positions", "shaker_displacement"}, "sensors");
        if (sensors.contains("shaker_displacement") &&
            !(sensors["shaker_displacement"].is_boolean() &&
              sensors["shaker_displacement"].get<bool>()))
          throw ValidationError(
              "sensors.shaker_displacement cannot be disabled: the shaker displacement "
              "output y_0 is always present");
        if (sensors.contains("positions"))
          sys.sensors = detail::ConfigReader::number_list(sensors["positions"], "sensors.positions");
      } else {
        throw ValidationError("'sensors' must be an array or an object");
      }
    }

    if (root.contains("simulation")) {
      const json& sim = rd.section(root, "simulation", "simulation");
      rd.check_keys(sim, {"modes", "t_final", "dt", "max_samples", "forcing", "initial"},
                    "simulation");
      auto& s = cfg.simulation;
      if (sim.contains("modes") && !sim["modes"].is_null()) {
        if (!sim["modes"].is_number_integer() || sim["modes"].get<long long>() < 1)
          throw ValidationError("'simulation.modes' must be a positive integer");
        s.modes = sim["modes"].get<int>();
      }
      if (sim.contains("t_final") && !sim["t_final"].is_null())
        s.t_final = detail::ConfigReader::as_number(sim["t_final"], "simulation.t_final");
      if (sim.contains("dt") && !sim["dt"].is_null())
        s.dt = detail::ConfigReader::as_number(sim["dt"], "simulation.dt");
      if (sim.contains("max_samples")) {
        if (!sim["max_samples"].is_number_integer() || sim["max_samples"].get<long long>() < 2)
          throw ValidationError("'simulation.max_samples' must be an integer >= 2");
        s.max_samples = sim["max_samples"].get<std::size_t>();
      }
      if (sim.contains("forcing")) {
        const json& forcing = sim["forcing"];
        if (!forcing.is_array()) throw ValidationError("'simulation.forcing' must be an array");
        for (std::size_t i = 0; i < forcing.size(); ++i) {
          const std::string path = "simulation.forcing[" + std::to_string(i) + "]";
          if (!forcing[i].is_object()) throw ValidationError("'" + path + "' must be an object");
          rd.check_keys(forcing[i], {"channel", "kind", "amplitude", "omega", "phase", "times",
                                     "values"},
                        path);
          const json ch = forcing[i].value("channel", nlohmann::json(0));
          if (!ch.is_number_integer() || ch.get<long long>() < 0)
            throw ValidationError("'" + path + ".channel' must be a non-negative integer");
          const auto channel = ch.get<std::size_t>();
          if (channel >= sys.num_inputs())
            throw ValidationError("'" + path + ".channel' = " + std::to_string(channel) +
                                  " exceeds the number of inputs (" +
                                  std::to_string(sys.num_inputs()) + ")");
          if (s.forcing.size() <= channel) s.forcing.resize(channel + 1);
          s.forcing[channel] = detail::parse_signal(forcing[i], path);
        }
        while (!s.forcing.empty() && s.forcing.back().kind() == ForcingSignal::Kind::zero)
          s.forcing.pop_back();
      }
      if (sim.contains("initial")) {
        const json& init = sim["initial"];
        if (!init.is_object()) throw ValidationError("'simulation.initial' must be an object");
        rd.check_keys(init, {"q", "p", "q_hat", "p_hat"}, "simulation.initial");
        auto read = [&](const char* key, std::vector<double>& dst) {
          if (!init.contains(key)) return;
          dst = detail::ConfigReader::number_list(init[key],
                                                  std::string("simulation.initial.") + key);
          if (dst.empty())
            throw ValidationError(std::string("'simulation.initial.") + key + "' is empty");
        };
        read("q", s.initial.q);
        read("p", s.initial.p);
        read("q_hat", s.initial.q_hat);
        read("p_hat", s.initial.p_hat);
      }
    }

    if (root.contains("observer")) {
      const json& obs = rd.section(root, "observer", "observer");
      rd.check_keys(obs, {"enabled", "gammas"}, "observer");
      if (obs.contains("enabled")) {
        if (!obs["enabled"].is_boolean())
          throw ValidationError("'observer.enabled' must be a boolean");
        cfg.observer.enabled = obs["enabled"].get<bool>();
      }
      if (obs.contains("gammas"))
        cfg.observer.gammas = detail::ConfigReader::number_list(obs["gammas"], "observer.gammas");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(origin + ": " + e.what());
  }

  validate(cfg.system);
  return cfg;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path), path.string());
}

/// Loads and validates the physical system described by a config file.
inline BeamSystem load_config(const std::filesystem::path& path) {
  return load_run_config(path).system;
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  using nlohmann::json;
  const auto& sys = cfg.system;
  json root;
  root["beam"] = {{"length", sys.length},
                  {"youngs_modulus", sys.youngs_modulus},
                  {"area_moment", sys.area_moment},
                  {"mass_per_length", sys.mass_per_length}};
  root["shaker"] = {{"position", sys.attach_point},
                    {"mass", sys.shaker_mass},
                    {"stiffness", sys.shaker_stiffness}};
  json actuators = json::array();
  for (const auto& shape : sys.actuators) {
    json pieces = json::array();
    for (const auto& piece : shape.pieces)
      pieces.push_back({{"interval", {piece.lo, piece.hi}}, {"coefficients", piece.coeffs}});
    actuators.push_back({{"pieces", pieces}});
  }
  root["actuators"] = actuators;
  root["sensors"] = {{"positions", sys.sensors}, {"shaker_displacement", true}};

  const auto& s = cfg.simulation;
  json sim;
  sim["modes"] = s.modes ? json(*s.modes) : json(nullptr);
  sim["t_final"] = s.t_final ? json(*s.t_final) : json(nullptr);
  sim["dt"] = s.dt ? json(*s.dt) : json(nullptr);
  sim["max_samples"] = s.max_samples;
  json forcing = json::array();
  for (std::size_t ch = 0; ch < s.forcing.size(); ++ch)
    if (s.forcing[ch].kind() != ForcingSignal::Kind::zero)
      forcing.push_back(detail::signal_to_json(s.forcing[ch], ch));
  sim["forcing"] = forcing;
  sim["initial"] = {{"q", s.initial.q},
                    {"p", s.initial.p},
                    {"q_hat", s.initial.q_hat},
                    {"p_hat", s.initial.p_hat}};
  root["simulation"] = sim;
  root["observer"] = {{"enabled", cfg.observer.enabled}, {"gammas", cfg.observer.gammas}};
  return root;
}

inline void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json(cfg).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace beamobs
