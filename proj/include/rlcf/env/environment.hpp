#pragma once

#include <cstdint>
#include <optional>

#include "rlcf/core/image.hpp"
#include "rlcf/env/action_space.hpp"
#include "rlcf/env/preprocess.hpp"

namespace rlcf {

struct Transition {
  AgentObservation state;
  ActionId action = 0;
  double reward = 0.0;
  AgentObservation next_state;
  bool done = false;
};

struct StepResult {
  Transition transition;
  StateImage image;
};

// Episodic pixel environment. Instances are single-threaded state machines.
class Environment {
public:
  virtual ~Environment() = default;

  // Start an episode after n ~ Uniform{0..noop_max} no-op ticks, n drawn from
  // a generator seeded by `seed`.
  virtual StateImage reset(std::uint64_t seed, int noop_max) = 0;
  virtual StepResult step(ActionId action) = 0;

  virtual const ActionSpace &action_space() const = 0;
  virtual AgentObservation observation() const = 0;
  virtual const StateImage &state_image() const = 0;
  virtual bool done() const = 0;
};

} // namespace rlcf
