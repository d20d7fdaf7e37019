#pragma once

#include <map>
#include <string>

namespace rlcf {

// What happened during one environment tick.
struct StepEvents {
  int pills = 0;
  int power_pills = 0;
  int ghosts_eaten = 0;
  bool died = false;
  bool cleared = false;
};

// Maps events to scalar reward. Event keys: pill, power_pill, ghost, death,
// survive (a tick without dying), clear (maze emptied).
struct RewardProfile {
  std::string name;
  std::map<std::string, double> reward_table;

  double reward(const StepEvents &events) const;

  // hunter: default-style scoring, frightened ghosts worth most.
  // pill:   reward only for power pills.
  // fear:   +1 for every tick survived.
  static RewardProfile by_name(const std::string &name);
};

} // namespace rlcf
