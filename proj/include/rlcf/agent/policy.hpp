#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlcf/core/rng.hpp"
#include "rlcf/env/action_space.hpp"
#include "rlcf/env/preprocess.hpp"

namespace rlcf {

// Model-agnostic agent interface. Implementations are immutable after
// construction and safe for concurrent read-only use.
class Policy {
public:
  virtual ~Policy() = default;

  // Greedy action. The default picks argmax of action_values().
  virtual ActionId act(const AgentObservation &obs) const;
  // Per-action values, when the agent exposes them.
  virtual std::optional<std::vector<double>>
  action_values(const AgentObservation &obs) const = 0;

  virtual const ActionSpace &action_space() const = 0;
  virtual const std::string &agent_id() const = 0;
};

// argmax with ties broken by the lowest action id.
ActionId act_greedy(std::span<const double> values);
ActionId act_greedy(const Policy &policy, const AgentObservation &obs);

struct EpsilonGreedyChoice {
  ActionId action = 0;
  bool explored = false;
};

// One uniform draw decides exploration; exploring consumes a second draw for
// the action. Exploring may pick the greedy action and still counts as
// explored.
EpsilonGreedyChoice act_epsilon_greedy(const Policy &policy,
                                       const AgentObservation &obs,
                                       double epsilon, Rng &rng);

} // namespace rlcf
