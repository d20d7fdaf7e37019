#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlcf/agent/features.hpp"
#include "rlcf/agent/policy.hpp"
#include "rlcf/agent/reward_profile.hpp"

namespace rlcf {

// Greedy policy over a Q-table indexed by FeatureEncoder states. Features are
// recomputed from the newest observation frame on every call.
class TabularPolicy final : public Policy {
public:
  TabularPolicy(std::string agent_id, std::string profile, std::uint64_t seed,
                EnvConfig env, std::vector<double> q_table);

  std::optional<std::vector<double>>
  action_values(const AgentObservation &obs) const override;
  const ActionSpace &action_space() const override { return actions_; }
  const std::string &agent_id() const override { return agent_id_; }

  std::span<const double> row(int state) const;
  const std::vector<double> &q_table() const noexcept { return q_; }
  const std::string &profile() const noexcept { return profile_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const FeatureEncoder &encoder() const noexcept { return encoder_; }
  const EnvConfig &env_config() const noexcept { return encoder_.config(); }

private:
  std::string agent_id_;
  std::string profile_;
  std::uint64_t seed_;
  FeatureEncoder encoder_;
  ActionSpace actions_;
  std::vector<double> q_;
};

struct QLearningConfig {
  double learning_rate = 0.1;
  double discount = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
};

// Seeded tabular Q-learning on GridPac with the given reward profile. The
// final table is returned (no best-checkpoint restore).
TabularPolicy train_toy_agent(const RewardProfile &profile,
                              const EnvConfig &env_config, std::int64_t steps,
                              std::uint64_t seed,
                              const QLearningConfig &qconfig = {},
                              std::string agent_id = {});

nlohmann::json to_json(const TabularPolicy &policy);
TabularPolicy tabular_policy_from_json(const nlohmann::json &j);
void save_policy(const std::string &path, const TabularPolicy &policy);
TabularPolicy load_policy(const std::string &path);

} // namespace rlcf
