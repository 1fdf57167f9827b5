#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "mqnd/config.hpp"
#include "mqnd/units.hpp"

using namespace mqnd;
using namespace mqnd::config;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, EmptyObjectGivesTheDeviceDefaults) {
  const auto c = parse_config("{}");
  const auto d = default_config();
  EXPECT_EQ(to_json(c), to_json(d));
  EXPECT_NEAR(to_mhz(c.system.chi_qm), -1.91, 1e-12);
  EXPECT_NEAR(c.system.readout.eps_g, 0.043, 1e-15);
  EXPECT_EQ(c.protocol.scheme, "at_least_one");
  EXPECT_EQ(c.cavities.size(), d.cavities.size());
}

TEST(Config, OverridesAreConvertedFromHz) {
  const auto c = parse_config(R"({"coupling": {"chi_qm_hz": -2.0e6}, "protocol": {"tau_pi_s": 1.2e-7}})");
  EXPECT_NEAR(c.system.chi_qm, mhz(-2.0), 1e-6);
  EXPECT_DOUBLE_EQ(c.protocol.tau_pi, 120e-9);
}

TEST(Config, NullCoherenceTimeMeansNoDecay) {
  const auto c = parse_config(R"({"qubit": {"T1_s": null, "T2_star_s": null}})");
  EXPECT_TRUE(std::isinf(c.system.qubit.T1));
  EXPECT_EQ(c.system.rates().gamma_1, 0.0);
}

TEST(Config, NegativeT1IsRejectedWithTheFieldName) {
  EXPECT_EQ(error_of(R"({"qubit": {"T1_s": -1e-6}})"), "T1 must be positive");
}

TEST(Config, UnknownKeyIsRejected) {
  const auto msg = error_of(R"({"qubit": {"T1_us": 0.8}})");
  EXPECT_NE(msg.find("unknown key"), std::string::npos) << msg;
  EXPECT_NE(msg.find("qubit.T1_us"), std::string::npos) << msg;
  EXPECT_NE(error_of(R"({"bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(error_of(R"({"qubit_colour": "blue"})").find("qubit_colour"), std::string::npos);
}

TEST(Config, WrongTypeIsRejected) {
  EXPECT_NE(error_of(R"({"protocol": {"n_points": 2.5}})").find("integer"), std::string::npos);
  EXPECT_NE(error_of(R"({"protocol": {"scheme": "both"}})").find("scheme"), std::string::npos);
}

TEST(Config, SyntaxErrorReportsTheLine) {
  const auto msg = error_of("{\n  \"seed\": 3,\n  \"jobs\": ,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, CanonicalJsonRoundTrips) {
  auto c = default_config();
  c.protocol.scheme = "exactly_one";
  c.protocol.delta_s_list = {mhz(-1.0), 0.0, mhz(2.5)};
  c.system.qubit.T2_star = std::numeric_limits<double>::infinity();
  c.system.qubit.T1 = std::numeric_limits<double>::infinity();
  c.seed = 99;
  const auto text = to_json(c);
  EXPECT_EQ(to_json(parse_config(text)), text);
}

TEST(Config, HashIgnoresRunEnvironmentOnly) {
  auto a = default_config();
  auto b = a;
  b.output_dir = "elsewhere";
  b.jobs = 7;
  b.emit_trajectory = true;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.system.readout.eps_e += 1e-6;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a), config_hash(parse_config(to_json(a))));
}
