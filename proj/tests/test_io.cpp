#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "stargraph/io.hpp"

using namespace stargraph;

namespace {

ordered_json minimal() {
  return ordered_json::parse(R"({
    "schema_version": 1,
    "potential": {"edges": [
      {"family": "sech2", "c": -2.0, "a": 1.0},
      {"family": "powerlaw", "c": -1.0, "a": 1.0, "p": 7.0}
    ]}
  })");
}

} // namespace

TEST(Config, DefaultsFillMissingSections) {
  const auto c = parse_config(minimal());
  ASSERT_EQ(c.edges.size(), 2u);
  EXPECT_EQ(c.edges[0].family, Family::sech2);
  EXPECT_EQ(c.edges[1].p, 7.0);
  EXPECT_EQ(c.tol, 1e-10);
  EXPECT_FALSE(c.x_max.has_value());
  EXPECT_EQ(c.scan_npoints, 2000u);
  EXPECT_EQ(c.order, 8);
  EXPECT_EQ(c.trace_orders.size(), 5u);
  EXPECT_EQ(c.output_dir, "out");
  EXPECT_EQ(c.star().size(), 2u);
}

TEST(Config, RoundTripIsStable) {
  auto j = minimal();
  j["solver"]["x_max"] = 30.0;
  j["scan"]["mirrored"] = true;
  j["spectrum"]["kappa_max"] = 4.0;
  const auto c = parse_config(j);
  const auto once = to_json(c);
  const auto twice = to_json(parse_config(once));
  EXPECT_EQ(once.dump(), twice.dump());
  EXPECT_EQ(*parse_config(once).x_max, 30.0);
  // Key order follows the schema, not insertion or alphabetical order.
  std::vector<std::string> keys;
  for (auto it = once.begin(); it != once.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected{"schema_version", "potential", "solver", "scan", "spectrum",
                                          "asymptotics", "trace", "output_dir"};
  EXPECT_EQ(keys, expected);
}

TEST(Config, RejectsInvalidInput) {
  auto bad = [](auto mutate) {
    auto j = minimal();
    mutate(j);
    return j;
  };
  EXPECT_THROW(parse_config(bad([](auto& j) { j["schema_version"] = 2; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["potential"]["edges"].erase(1); })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["potential"]["edges"][0]["family"] = "cosine"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["potential"]["edges"][0]["a"] = -1.0; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["potential"]["edges"][1]["p"] = 1.0; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["solver"]["tol"] = 0.0; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["scan"]["k_min"] = 1e-5; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["scan"]["npoints"] = "many"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["asymptotics"]["order"] = 12; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["trace"]["orders"] = {0.75}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["trace"]["fg_s"] = {0.5}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["trace"]["decay_orders"] = {8}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](auto& j) { j["trace"] = 3; })), ConfigError);
}

TEST(Config, LoadFromDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "stargraph_test_io";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.json", broken = dir / "broken.json";
  std::ofstream(good) << minimal().dump();
  std::ofstream(broken) << "{ \"schema_version\": 1, ";
  EXPECT_EQ(load_config(good.string()).edges.size(), 2u);
  EXPECT_THROW(load_config(broken.string()), ConfigError);
  EXPECT_THROW(load_config((dir / "absent.json").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Serialisation, ReportsAndNonFiniteValues) {
  EXPECT_TRUE(number(std::nan("")).is_null());
  EXPECT_TRUE(number(INFINITY).is_null());
  EXPECT_EQ(number(1.5).get<double>(), 1.5);

  TraceReport r;
  r.order = 1.5;
  r.residual = 1e-7;
  r.budget = 1e-3;
  r.pass = true;
  const auto j = to_json(r);
  EXPECT_EQ(j.at("order").get<double>(), 1.5);
  EXPECT_TRUE(j.at("pass").get<bool>());

  SpectrumResult s;
  s.eigenvalues.push_back({-1.0, 2});
  s.resonance_multiplicity = 1;
  const auto js = to_json(s);
  EXPECT_EQ(js.dump(), to_json(s).dump());

  DecayReport d;
  d.order = 2;
  d.expected_slope = -3.0;
  d.rays.push_back({0.0, -2.95, 16, false});
  EXPECT_TRUE(to_json(d, 0.2).at("pass").get<bool>());
  EXPECT_FALSE(to_json(d, 0.01).at("pass").get<bool>());
}
