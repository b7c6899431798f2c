#pragma once

#include <string>

#include "tpg/agents.hpp"
#include "tpg/game.hpp"
#include "tpg/trainer.hpp"

namespace tpg {

// Whole-run configuration. Defaults reproduce the reference experiment, so an
// empty config file is a valid one. The JSON form round-trips losslessly and
// unknown keys are rejected rather than ignored.
struct RunConfig {
  int version = 1;
  WorldConfig world{};
  ModelConfig model{};
  TrainerConfig trainer{};
  int pretrain_episodes = 2048;  // expert dialogue pool size
  int pretrain_passes = 6;       // supervised passes over the pool
  double pretrain_lr = 0.001;
  int eval_episodes = 1000;
  std::string output_dir = "out";

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// Empty or whitespace-only text yields the defaults. Malformed JSON, unknown
// keys, or wrong value types raise ConfigError.
RunConfig parse_run_config(const std::string& text);
std::string serialize_run_config(const RunConfig& config);
RunConfig load_run_config_file(const std::string& path);

}  // namespace tpg
