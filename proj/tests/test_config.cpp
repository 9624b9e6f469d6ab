#include <gtest/gtest.h>

#include "beamobs/config.hpp"
#include "support.hpp"

using namespace beamobs;
using beamobs::testing::source_path;
using beamobs::testing::TempDir;

namespace {

const char* kMinimal = R"({
  "beam": {"length": 2.0, "youngs_modulus": 1e9, "area_moment": 1e-8, "mass_per_length": 1.0},
  "shaker": {"position": 0.5, "mass": 0.1, "stiffness": 10.0}
})";

}  // namespace

TEST(Config, ReferenceFileLoads) {
  const RunConfig cfg = load_run_config(source_path("configs/beam_shaker.json"));
  EXPECT_EQ(cfg.system, beamobs::testing::reference_system());
  ASSERT_TRUE(cfg.simulation.modes.has_value());
  EXPECT_EQ(*cfg.simulation.modes, 6);
  EXPECT_EQ(cfg.observer.gammas, std::vector<double>{3.0});
  ASSERT_EQ(cfg.simulation.forcing.size(), 1u);
  EXPECT_EQ(cfg.simulation.forcing[0], ForcingSignal::sinusoid(1.0, 4.0));
  EXPECT_TRUE(cfg.warnings.empty());
}

TEST(Config, MinimalDefaults) {
  const RunConfig cfg = parse_run_config(kMinimal);
  EXPECT_TRUE(cfg.system.sensors.empty());
  EXPECT_TRUE(cfg.system.actuators.empty());
  EXPECT_FALSE(cfg.simulation.modes.has_value());
  EXPECT_FALSE(cfg.simulation.dt.has_value());
  EXPECT_TRUE(cfg.observer.enabled);
  EXPECT_EQ(cfg.system.num_inputs(), 1);
  EXPECT_EQ(cfg.system.num_outputs(), 1);
}

TEST(Config, CommentsAllowedUnknownKeysWarn) {
  const std::string text = R"({
    // comment
    "beam": {"length": 2.0, "youngs_modulus": 1e9, "area_moment": 1e-8, "mass_per_length": 1.0,
             "colour": "grey"},
    "shaker": {"position": 0.5, "mass": 0.1, "stiffness": 10.0},
    "extra": 1
  })";
  const RunConfig cfg = parse_run_config(text);
  ASSERT_EQ(cfg.warnings.size(), 2u);
  const bool mentions_colour = cfg.warnings[0].find("beam.colour") != std::string::npos ||
                               cfg.warnings[1].find("beam.colour") != std::string::npos;
  EXPECT_TRUE(mentions_colour);
}

TEST(Config, MissingSectionIsError) {
  EXPECT_THROW(parse_run_config(R"({"shaker": {"position": 0.5, "mass": 0, "stiffness": 0}})"),
               ValidationError);
  EXPECT_THROW(parse_run_config("{ not json"), ValidationError);
}

TEST(Config, InvalidGeometryIsError) {
  std::string text = kMinimal;
  text.replace(text.find("\"position\": 0.5"), 15, "\"position\": 2.0");
  EXPECT_THROW(parse_run_config(text), ValidationError);
}

TEST(Config, ShakerDisplacementCannotBeDisabled) {
  const std::string text = R"({
    "beam": {"length": 2.0, "youngs_modulus": 1e9, "area_moment": 1e-8, "mass_per_length": 1.0},
    "shaker": {"position": 0.5, "mass": 0.1, "stiffness": 10.0},
    "sensors": {"positions": [1.0], "shaker_displacement": false}
  })";
  EXPECT_THROW(parse_run_config(text), ValidationError);
}

TEST(Config, ForcingChannelBeyondInputsIsError) {
  const std::string text = R"({
    "beam": {"length": 2.0, "youngs_modulus": 1e9, "area_moment": 1e-8, "mass_per_length": 1.0},
    "shaker": {"position": 0.5, "mass": 0.1, "stiffness": 10.0},
    "simulation": {"forcing": [{"channel": 1, "kind": "sinusoid", "omega": 1}]}
  })";
  EXPECT_THROW(parse_run_config(text), ValidationError);
}

TEST(Config, ExpandInitial) {
  EXPECT_EQ(expand_initial({0.1}, 3, "q"), (std::vector<double>{0.1, 0.1, 0.1}));
  EXPECT_EQ(expand_initial({1, 2, 3}, 3, "q"), (std::vector<double>{1, 2, 3}));
  EXPECT_THROW((void)expand_initial({1, 2}, 3, "q"), ValidationError);
}

TEST(Config, RoundTripThroughJson) {
  const RunConfig cfg = load_run_config(source_path("configs/beam_piezo.json"));
  TempDir dir;
  save_config(cfg, dir / "copy.json");
  const RunConfig back = load_run_config(dir / "copy.json");
  EXPECT_EQ(back.system, cfg.system);
  EXPECT_EQ(back.simulation.forcing, cfg.simulation.forcing);
  EXPECT_EQ(back.simulation.initial, cfg.simulation.initial);
  EXPECT_EQ(back.simulation.modes, cfg.simulation.modes);
  EXPECT_EQ(back.observer.gammas, cfg.observer.gammas);
  EXPECT_EQ(back.system.actuators.size(), 2u);
  EXPECT_EQ(back.system.sensors, (std::vector<double>{0.55, 1.05}));
}

TEST(Config, MissingFileIsValidationError) {
  EXPECT_THROW((void)load_config("/nonexistent/beam.json"), ValidationError);
}
