#include "rlcf/agent/reward_profile.hpp"

#include "rlcf/core/error.hpp"

namespace rlcf {
namespace {

double lookup(const std::map<std::string, double> &table, const char *key) {
  auto it = table.find(key);
  return it == table.end() ? 0.0 : it->second;
}

} // namespace

double RewardProfile::reward(const StepEvents &e) const {
  double r = 0.0;
  r += e.pills * lookup(reward_table, "pill");
  r += e.power_pills * lookup(reward_table, "power_pill");
  r += e.ghosts_eaten * lookup(reward_table, "ghost");
  if (e.died)
    r += lookup(reward_table, "death");
  else
    r += lookup(reward_table, "survive");
  if (e.cleared)
    r += lookup(reward_table, "clear");
  return r;
}

RewardProfile RewardProfile::by_name(const std::string &name) {
  if (name == "hunter")
    return {name, {{"pill", 1.0}, {"power_pill", 5.0}, {"ghost", 20.0},
                   {"clear", 10.0}}};
  if (name == "pill")
    return {name, {{"power_pill", 1.0}}};
  if (name == "fear")
    return {name, {{"survive", 1.0}}};
  throw ConfigError("reward_profile",
                    "unknown profile '" + name + "' (expected hunter|pill|fear)");
}

} // namespace rlcf
