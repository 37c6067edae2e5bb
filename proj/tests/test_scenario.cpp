#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "uas/batch.hpp"
#include "uas/error.hpp"
#include "uas/textio.hpp"

using namespace uas;
using nlohmann::json;

TEST(Config, MechanismDefaults) {
  EXPECT_EQ(default_config(Mechanism::Central).test_days, 28);
  EXPECT_EQ(default_config(Mechanism::Infectious).test_days, 84);
  EXPECT_EQ(default_config(Mechanism::Location).test_days, 84);
  EXPECT_EQ(config_from_json(json{{"mechanism", "location"}}).test_days, 84);
  EXPECT_EQ(config_from_json(json{{"mechanism", "central"}}).n_central, 120);
}

TEST(Config, JsonRoundTrip) {
  for (Mechanism m : {Mechanism::Central, Mechanism::Infectious, Mechanism::Location}) {
    ScenarioConfig c = uas::testing::desk_config(m);
    c.seed = 0xdeadbeefcafeULL;
    c.intensity_mix = {0.5, 0.25, 2.0};
    c.anomaly_type = TypeMix{AnomalyType::Interest};
    c.location.selection = SourceSelection::MostPopular;
    c.seir_sites = SeirSites::PointsOfInterest;
    c.needs.meal_duration_min = 5;
    c.schedule.workdays[5] = true;
    c.synthetic.restaurants = 3;
    EXPECT_EQ(parse_config(serialize_config(c)), c);
    EXPECT_EQ(serialize_config(parse_config(serialize_config(c))), serialize_config(c));
  }
}

TEST(Config, Windows) {
  const ScenarioConfig c = default_config(Mechanism::Central);
  EXPECT_EQ(c.warmup_window().start, c.epoch);
  EXPECT_EQ(c.warmup_window().end, c.train_window().start);
  EXPECT_EQ(c.train_window().end, c.test_window().start);
  EXPECT_EQ(c.train_window().days(), 28.0);
  EXPECT_EQ(c.relative_dir(), std::filesystem::path("central") / "synthetic_scenario");
}

TEST(Config, ValidationRejects) {
  auto bad = [](auto mutate) {
    ScenarioConfig c = default_config(Mechanism::Infectious);
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](ScenarioConfig& c) { c.n_agents = 0; });
  bad([](ScenarioConfig& c) { c.name = "a/b"; });
  bad([](ScenarioConfig& c) { c.test_days = 0; });
  bad([](ScenarioConfig& c) { c.intensity_mix = {0, 0, 0}; });
  bad([](ScenarioConfig& c) { c.epidemic.transmission_prob = 1.5; });
  bad([](ScenarioConfig& c) { c.epidemic.initial_infected = 2000; });
  bad([](ScenarioConfig& c) { c.epoch = c.epoch + 5; });
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mechanism":"plague"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mechanism":"central","anomaly_type":"grumpy"})"), ConfigError);
}

namespace {

SweepSpec five_by_five() {
  SweepSpec s;
  s.transmission_probs = {0.0, 0.01, 0.05, 0.1, 0.5};
  s.anomaly_types = {"hunger", "work", "social", "interest", "combined"};
  s.selections = {"random", "popular"};
  return s;
}

}  // namespace

TEST(Sweep, ProductSizesAndUniqueNames) {
  const auto inf = expand_sweep(Mechanism::Infectious, five_by_five());
  EXPECT_EQ(inf.size(), 25u);
  const auto loc = expand_sweep(Mechanism::Location, five_by_five());
  EXPECT_EQ(loc.size(), 50u);
  const auto cen = expand_sweep(Mechanism::Central, five_by_five());
  EXPECT_EQ(cen.size(), 5u);
  std::set<std::string> names;
  for (const auto& c : loc) EXPECT_TRUE(names.insert(c.name).second) << c.name;
  EXPECT_EQ(inf[7].epidemic.transmission_prob, 0.01);
  EXPECT_EQ(inf[7].name, "p0.01_social");
  EXPECT_EQ(loc[25].location.selection, SourceSelection::MostPopular);
}

TEST(Sweep, SeedsAxisMultiplies) {
  SweepSpec s = five_by_five();
  s.seeds = {1, 2, 3};
  const auto c = expand_sweep(Mechanism::Infectious, s);
  EXPECT_EQ(c.size(), 75u);
  EXPECT_EQ(c[0].name, "p0_hunger_s1");
  EXPECT_EQ(c[2].seed, 3u);
}

TEST(Sweep, EmptyAxisIsAnError) {
  SweepSpec s = five_by_five();
  s.transmission_probs.clear();
  EXPECT_NO_THROW(expand_sweep(Mechanism::Central, s));
  EXPECT_THROW(expand_sweep(Mechanism::Infectious, s), ConfigError);
  s = five_by_five();
  s.anomaly_types.clear();
  EXPECT_THROW(expand_sweep(Mechanism::Central, s), ConfigError);
  s = five_by_five();
  s.selections.clear();
  EXPECT_THROW(expand_sweep(Mechanism::Location, s), ConfigError);
}

TEST(Sweep, InvalidValueNamesOffender) {
  SweepSpec s = five_by_five();
  s.transmission_probs[3] = 1.7;
  try {
    expand_sweep(Mechanism::Infectious, s);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("transmission_probs[3]"), std::string::npos) << e.what();
  }
  s = five_by_five();
  s.anomaly_types[1] = "sleepy";
  try {
    expand_sweep(Mechanism::Infectious, s);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("anomaly_types[1]"), std::string::npos) << e.what();
  }
}

TEST(Sweep, BaseOverridesDefaults) {
  const SweepSpec s = parse_sweep(json::parse(R"({"base":{"n_agents":77,"test_days":10},
      "anomaly_types":["work"],"transmission_probs":[0.2]})"));
  const auto c = expand_sweep(Mechanism::Infectious, s);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].n_agents, 77);
  EXPECT_EQ(c[0].test_days, 10);
  EXPECT_EQ(c[0].mechanism, Mechanism::Infectious);
  EXPECT_THROW(parse_sweep(json::parse("[1]")), ConfigError);
}

TEST(Sweep, ConfigureWritesConfigsAndManifest) {
  uas::testing::TempDir dir;
  write_file(dir.path() / "sweep.json", R"({"transmission_probs":[0.1,0.2],"anomaly_types":["hunger","work"]})");
  const auto manifest_path = configure(Mechanism::Infectious, dir.path() / "sweep.json", dir.path());
  EXPECT_EQ(manifest_path, dir.path() / "configs" / "infectious_manifest.json");
  const Manifest m = load_manifest(manifest_path);
  ASSERT_EQ(m.configs.size(), 4u);
  for (const auto& p : m.configs) {
    EXPECT_TRUE(std::filesystem::exists(p)) << p;
    EXPECT_EQ(load_config(p).mechanism, Mechanism::Infectious);
  }
  write_file(dir.path() / "bad.json", "{");
  EXPECT_THROW(configure(Mechanism::Infectious, dir.path() / "bad.json", dir.path()), ConfigError);
  EXPECT_THROW(configure(Mechanism::Infectious, dir.path() / "absent.json", dir.path()), ConfigError);
}
