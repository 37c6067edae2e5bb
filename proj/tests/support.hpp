#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "uas/scenario.hpp"

namespace uas::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("uas_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Desk scale: synthetic 10x10 grid, short windows.
inline ScenarioConfig desk_config(Mechanism m, int agents = 50, int days = 14) {
  ScenarioConfig c = default_config(m);
  c.name = "desk";
  c.n_agents = agents;
  c.warmup_days = 7;
  c.train_days = days;
  c.test_days = days;
  c.n_central = std::min(c.n_central, agents / 5);
  c.epidemic.initial_infected = std::min(c.epidemic.initial_infected, agents);
  return c;
}

}  // namespace uas::testing
