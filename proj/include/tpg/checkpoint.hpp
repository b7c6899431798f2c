#pragma once

#include <string>

#include "tpg/agents.hpp"
#include "tpg/freq_stats.hpp"
#include "tpg/trainer.hpp"

namespace tpg {

// Everything a run needs to continue: both parameter stores, the token usage
// statistics, the reward baseline, and how many epochs are already done.
// The format is line-oriented text with hexfloat values, so save -> load ->
// save reproduces the file byte for byte.
struct CheckpointState {
  FrequencyStats stats;
  BaselineTracker tracker;
  int epochs_completed = 0;
};

void save_checkpoint(const std::string& path, const QGenPolicy& qgen, const GuesserNet& guesser,
                     const FrequencyStats& stats, const BaselineTracker& tracker,
                     int epochs_completed);

// Fills the stores of already-constructed agents. Version, vocabulary size,
// and every block's name and shape must match what the agents declare;
// a mismatch raises ConfigError naming the offending block.
CheckpointState load_checkpoint(const std::string& path, QGenPolicy& qgen, GuesserNet& guesser);

}  // namespace tpg
