#pragma once

#include <cstdint>
#include <vector>

#include "rlcf/agent/policy.hpp"
#include "rlcf/env/env_config.hpp"

namespace rlcf {

struct EpisodeSummary {
  int length = 0;
  double reward = 0.0;
  int power_pills = 0;
  int ghosts_eaten = 0;
  bool died = false;
};

// Greedy rollouts of `policy`, or uniform-random actions when policy is null.
// Episode i is reset with mix_seed(seed, i).
std::vector<EpisodeSummary> run_episodes(const Policy *policy,
                                         const EnvConfig &env_config,
                                         int episodes, std::uint64_t seed);

double mean_length(const std::vector<EpisodeSummary> &episodes);
double mean_power_pills(const std::vector<EpisodeSummary> &episodes);

} // namespace rlcf
