#include <gtest/gtest.h>

#include <cstdlib>
#include <map>

#include "support.hpp"
#include "uas/batch.hpp"
#include "uas/error.hpp"
#include "uas/textio.hpp"

using namespace uas;
using uas::testing::TempDir;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSmallSweep = R"({
  "base": {"n_agents": 20, "warmup_days": 2, "train_days": 3, "test_days": 3,
           "epidemic": {"initial_infected": 3}},
  "transmission_probs": [0.05, 0.5], "anomaly_types": ["hunger", "combined"]})";

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return out;
}

fs::path configure_small(const fs::path& root) {
  write_file(root / "sweep.json", kSmallSweep);
  return configure(Mechanism::Infectious, root / "sweep.json", root);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UAS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Batch, CoreCountDoesNotChangeOutput) {
  TempDir a, b;
  for (auto* d : {&a, &b}) {
    const auto manifest = configure_small(d->path());
    const auto results = run_manifest(manifest, d == &a ? 1 : 3, d->path());
    ASSERT_EQ(results.size(), 4u);
    for (const auto& r : results) EXPECT_TRUE(r.ok) << r.scenario << ": " << r.error;
    for (const auto& r : process_all(d->path())) EXPECT_TRUE(r.ok) << r.error;
  }
  const auto ta = tree_contents(a.path()), tb = tree_contents(b.path());
  EXPECT_EQ(ta.size(), tb.size());
  for (const auto& [k, v] : ta) {
    ASSERT_TRUE(tb.contains(k)) << k;
    EXPECT_TRUE(tb.at(k) == v) << k;
  }
  EXPECT_TRUE(ta.contains("infectious/synthetic_p0.5_combined/train.zip"));
}

TEST(Batch, FailingScenarioIsQuarantined) {
  TempDir d;
  const auto manifest = configure_small(d.path());
  // Point one scenario at a map file that does not exist.
  const Manifest m = load_manifest(manifest);
  ScenarioConfig broken = load_config(m.configs[1]);
  broken.map_path = (d.path() / "no_such_map.json").string();
  save_config(broken, m.configs[1]);

  const auto results = run_manifest(manifest, 2, d.path());
  int failed = 0;
  for (const auto& r : results) failed += r.ok ? 0 : 1;
  EXPECT_EQ(failed, 1);
  const auto& bad = results[1];
  EXPECT_FALSE(bad.ok);
  EXPECT_NE(bad.error.find("no_such_map.json"), std::string::npos) << bad.error;
  EXPECT_TRUE(fs::exists(d.path() / "_failed" / bad.scenario / "error.txt"));
  EXPECT_FALSE(fs::exists(d.path() / "raw" / bad.scenario));
  EXPECT_TRUE(fs::exists(d.path() / "raw" / results[0].scenario / "stays.csv"));
}

TEST(Batch, DuplicateScenarioDirectoriesRejected) {
  TempDir d;
  const auto manifest = configure_small(d.path());
  Manifest m = load_manifest(manifest);
  m.configs.push_back(m.configs.front());
  save_manifest(m, manifest);
  EXPECT_THROW(run_manifest(manifest, 1, d.path()), ConfigError);
  EXPECT_THROW(run_manifest(manifest, 0, d.path()), ConfigError);
}

TEST(Batch, ProcessIsIdempotentAndReportsMissingFiles) {
  TempDir d;
  run_manifest(configure_small(d.path()), 1, d.path());
  process_all(d.path());
  const auto first = tree_contents(d.path());
  process_all(d.path());
  EXPECT_EQ(tree_contents(d.path()), first);

  fs::remove(d.path() / "raw" / "infectious" / "synthetic_p0.05_hunger" / "stays.csv");
  const auto results = process_all(d.path());
  bool saw = false;
  for (const auto& r : results) {
    if (r.scenario == "infectious/synthetic_p0.05_hunger") {
      saw = true;
      EXPECT_FALSE(r.ok);
      EXPECT_NE(r.error.find("stays.csv"), std::string::npos) << r.error;
    } else {
      EXPECT_TRUE(r.ok);
    }
  }
  EXPECT_TRUE(saw);
  TempDir empty;
  EXPECT_THROW(process_all(empty.path()), ProcessingError);
}

TEST(Batch, ReportWritesPerScenarioFiles) {
  TempDir d;
  run_manifest(configure_small(d.path()), 1, d.path());
  process_all(d.path());
  const auto results = report_all(d.path());
  ASSERT_EQ(results.size(), 4u);
  for (const auto& r : results) EXPECT_TRUE(r.ok) << r.error;
  const fs::path rep = d.path() / "report" / "infectious" / "synthetic_p0.5_hunger";
  for (const char* f : {"visit_counts_train.csv", "visit_counts_test.csv", "jaccard.csv", "epi_curve.csv",
                        "seir_summary.json"}) {
    EXPECT_TRUE(fs::exists(rep / f)) << f;
  }
  EXPECT_FALSE(fs::exists(rep / "spatial_map.csv"));
  int rows = 0;
  for_each_file_line(d.path() / "report" / "summary.csv", [&](std::string_view) { ++rows; });
  EXPECT_EQ(rows, 5);
  int days = 0;
  for_each_file_line(rep / "epi_curve.csv", [&](std::string_view) { ++days; });
  EXPECT_EQ(days, 1 + 4);
  EXPECT_EQ(find_bundles(d.path()).size(), 4u);
}

TEST(Cli, ExitCodes) {
  TempDir d;
  const std::string out = "--out " + d.path().string();
  write_file(d.path() / "sweep.json", kSmallSweep);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli(out + " configure --mechanism plague --sweep " + (d.path() / "sweep.json").string()), 2);
  EXPECT_EQ(run_cli(out + " configure --mechanism central --sweep " + (d.path() / "nope.json").string()), 2);
  EXPECT_EQ(run_cli(out + " process"), 3);
  ASSERT_EQ(run_cli(out + " configure --mechanism infectious --sweep " + (d.path() / "sweep.json").string()), 0);
  const std::string manifest = (d.path() / "configs" / "infectious_manifest.json").string();
  EXPECT_EQ(run_cli(out + " run --cores 0 --manifest " + manifest), 2);
  ASSERT_EQ(run_cli(out + " run --cores 2 --manifest " + manifest), 0);
  ASSERT_EQ(run_cli(out + " process"), 0);
  ASSERT_EQ(run_cli(out + " report"), 0);
  EXPECT_TRUE(fs::exists(d.path() / "report" / "summary.csv"));
  EXPECT_TRUE(fs::exists(d.path() / "infectious" / "synthetic_p0.05_combined" / "labels.json"));
  EXPECT_EQ(run_cli("report --dir " + (d.path() / "infectious" / "synthetic_p0.05_combined").string()), 0);
  EXPECT_EQ(run_cli("--help"), 0);
}
