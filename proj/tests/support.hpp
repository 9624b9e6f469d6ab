#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "beamobs/model.hpp"

namespace beamobs::testing {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(BEAMOBS_SOURCE_DIR) / rel;
}

/// Aluminium beam with a shaker near the right end.
inline BeamSystem reference_system() {
  BeamSystem s;
  s.length = 1.875;
  s.attach_point = 1.4;
  s.youngs_modulus = 7.1e10;
  s.area_moment = 1.6875e-10;
  s.mass_per_length = 0.5985;
  s.shaker_mass = 0.045;
  s.shaker_stiffness = 2630.0;
  return s;
}

inline BeamSystem hinged_system() {
  BeamSystem s = reference_system();
  s.shaker_mass = 0.0;
  s.shaker_stiffness = 0.0;
  return s;
}

/// (j pi / l)^4 EI / rho
inline double hinged_lambda(const BeamSystem& s, int j) {
  const double k = j * 3.14159265358979323846 / s.length;
  return k * k * k * k * s.flexural_rigidity() / s.mass_per_length;
}

/// Temporary directory removed at scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("beamobs_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace beamobs::testing
