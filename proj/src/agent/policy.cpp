#include "rlcf/agent/policy.hpp"

#include <stdexcept>

namespace rlcf {

ActionId Policy::act(const AgentObservation &obs) const {
  const auto values = action_values(obs);
  if (!values)
    throw std::logic_error("policy '" + agent_id() +
                           "' exposes no action values; override act()");
  return act_greedy(*values);
}

ActionId act_greedy(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("act_greedy: empty value vector");
  ActionId best = 0;
  for (std::size_t a = 1; a < values.size(); ++a)
    if (values[a] > values[best])
      best = static_cast<ActionId>(a);
  return best;
}

ActionId act_greedy(const Policy &policy, const AgentObservation &obs) {
  return policy.act(obs);
}

EpsilonGreedyChoice act_epsilon_greedy(const Policy &policy,
                                       const AgentObservation &obs,
                                       double epsilon, Rng &rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must be in [0,1]");
  if (rng.uniform() < epsilon)
    return {static_cast<ActionId>(rng.uniform_index(
                static_cast<std::uint64_t>(policy.action_space().size()))),
            true};
  return {policy.act(obs), false};
}

} // namespace rlcf
