#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlcf/agent/policy.hpp"
#include "rlcf/core/image.hpp"
#include "rlcf/core/rng.hpp"
#include "rlcf/counterfactual/translator.hpp"
#include "rlcf/dataset/dataset.hpp"
#include "rlcf/env/env_config.hpp"
#include "rlcf/metrics/metrics.hpp"

namespace rlcf {

struct CounterfactualResult {
  StateImage original;
  ActionId original_action = 0;
  ActionId target_action = 0;
  StateImage generated;
  ActionId realized_action = 0;
  bool valid = false;
  double proximity = 0.0;
  double sparsity = 0.0;
  double generation_seconds = 0.0;

  SampleMetrics metrics() const { return {valid, proximity, sparsity, generation_seconds}; }
};

// Observation the agent sees for a single state image: four copies of its
// preprocessed frame at the default observation size.
AgentObservation agent_view(const Image &state);

// Translates `state` towards `target` and asks the agent what it would do on
// the result.
CounterfactualResult explain(const Translator &translator, const Policy &policy,
                             const StateImage &state, ActionId target);

// Local maze geometry around the player, read from a state image.
struct MazeContext {
  std::vector<ActionId> open_directions; // subset of up/down/left/right
};

std::optional<MazeContext> maze_context(const Image &state, const EnvConfig &env_config);

// Target action for a presented counterfactual: reverse in a corridor, a
// random new non-reverse direction at an intersection. Never returns the
// original action, "Do nothing", or a blocked direction. Without context,
// picks uniformly among the other actions. Empty when nothing is admissible
// (a dead end the player is already facing out of).
std::optional<ActionId> select_target_action(const std::optional<MazeContext> &context,
                                             ActionId original_action, const ActionSpace &actions,
                                             Rng &rng);

struct InterpolationSequence {
  std::vector<Image> frames; // frames.front() == original, frames.back() == generated
  int steps() const { return static_cast<int>(frames.size()); }
};

inline constexpr int kDefaultInterpolationSteps = 11;

// frame_i = round((1 - u) * original + u * generated), u = i / (steps - 1).
InterpolationSequence interpolate(const Image &original, const Image &generated, int steps);

struct Highlight {
  StateImage state;
  ActionId action = 0;
  double importance = 0.0;
};

struct HighlightSet {
  std::vector<Highlight> states; // descending importance
  double diversity_threshold = 0.0;
};

// Sum of absolute channel differences.
double image_l1(const Image &a, const Image &b);

// Greedy policy rollouts; importance = max_a Q - min_a Q. Picks states in
// order of importance, skipping any within `diversity_threshold` (L1) of an
// already chosen one.
HighlightSet select_highlights(const Policy &policy, const EnvConfig &env_config, int episodes,
                               int n, double diversity_threshold, std::uint64_t seed);

// Explains every state towards every action (the original included), so an
// uninformative translator scores validity 1/k.
std::vector<CounterfactualResult> evaluate_all_targets(const Translator &translator,
                                                       const Policy &policy,
                                                       std::span<const LabeledSample> states);

// Adds N(0, sigma^2) to every channel entry (8-bit units), rounds and clamps.
// Noise depends only on (seed, image bytes, target), so calls are repeatable.
class NoiseTranslator final : public Translator {
public:
  NoiseTranslator(double sigma, std::uint64_t seed, int num_actions, std::string id = "noise");
  Translation translate(const Image &state, ActionId target) const override;
  int num_actions() const override { return k_; }
  const std::string &id() const override { return id_; }
  double sigma() const { return sigma_; }

private:
  double sigma_;
  std::uint64_t seed_;
  int k_;
  std::string id_;
};

// Sigma at which the noise baseline's mean proximity over `states` matches
// `target_proximity` (bisection; proximity falls monotonically with sigma).
double calibrate_noise_sigma(std::span<const LabeledSample> states, double target_proximity,
                             std::uint64_t seed, int num_actions);

} // namespace rlcf
