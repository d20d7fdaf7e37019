#include "rlcf/counterfactual/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "rlcf/agent/features.hpp"
#include "rlcf/core/error.hpp"
#include "rlcf/core/hash.hpp"
#include "rlcf/env/gridpac.hpp"

namespace rlcf {

AgentObservation agent_view(const Image &state) {
  const EnvConfig defaults;
  return lift(state, defaults.obs_height, defaults.obs_width);
}

CounterfactualResult explain(const Translator &translator, const Policy &policy,
                             const StateImage &state, ActionId target) {
  if (!policy.action_space().contains(target))
    throw std::out_of_range("target action " + std::to_string(target) +
                            " is not in the agent's action space");
  CounterfactualResult r;
  r.original = state;
  r.original_action = act_greedy(policy, agent_view(state.pixels));
  r.target_action = target;
  auto t = translator.translate(state.pixels, target);
  r.generated = state;
  r.generated.pixels = std::move(t.image);
  r.generation_seconds = t.forward_seconds;
  r.realized_action = act_greedy(policy, agent_view(r.generated.pixels));
  r.valid = r.realized_action == target;
  r.proximity = proximity(state.pixels, r.generated.pixels);
  r.sparsity = sparsity(state.pixels, r.generated.pixels);
  return r;
}

std::optional<MazeContext> maze_context(const Image &state, const EnvConfig &env_config) {
  if (state.height != env_config.raw_height() || state.width != env_config.raw_width())
    return std::nullopt;
  const FeatureEncoder encoder(env_config);
  const TileGrid grid = encoder.decode_rgb(state);
  std::optional<Cell> player;
  for (int r = 0; r < grid.rows && !player; ++r)
    for (int c = 0; c < grid.cols; ++c)
      if (grid.at(r, c) == Tile::player) {
        player = Cell{r, c};
        break;
      }
  if (!player)
    return std::nullopt;
  MazeContext ctx;
  for (ActionId a = gridpac_action::up; a <= gridpac_action::right; ++a) {
    const Cell n = neighbor(*player, a);
    if (n.row >= 0 && n.row < grid.rows && n.col >= 0 && n.col < grid.cols &&
        grid.at(n.row, n.col) != Tile::wall)
      ctx.open_directions.push_back(a);
  }
  return ctx;
}

std::optional<ActionId> select_target_action(const std::optional<MazeContext> &context,
                                             ActionId original_action, const ActionSpace &actions,
                                             Rng &rng) {
  if (!actions.contains(original_action))
    throw std::out_of_range("original action outside the action space");
  std::vector<ActionId> pool;
  if (!context) {
    for (ActionId a = 0; a < actions.size(); ++a)
      if (a != original_action)
        pool.push_back(a);
  } else {
    const auto &open = context->open_directions;
    auto is_open = [&](ActionId a) { return std::find(open.begin(), open.end(), a) != open.end(); };
    const bool moving = original_action != gridpac_action::noop;
    const ActionId back = reverse_direction(original_action);
    if (moving && open.size() <= 2 && is_open(back))
      return back; // corridor or dead end: turn around
    for (ActionId a : open) {
      if (a == original_action)
        continue;
      // At an intersection the agent keeps going forward-ish.
      if (moving && open.size() >= 3 && a == back)
        continue;
      pool.push_back(a);
    }
  }
  if (pool.empty())
    return std::nullopt;
  return pool[rng.uniform_index(pool.size())];
}

InterpolationSequence interpolate(const Image &original, const Image &generated, int steps) {
  if (steps < 2)
    throw std::invalid_argument("interpolation needs at least 2 steps");
  require_same_shape(original, generated, "interpolate");
  InterpolationSequence seq;
  seq.frames.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double u = static_cast<double>(i) / (steps - 1);
    Image f(original.height, original.width);
    for (std::size_t j = 0; j < f.pixels.size(); ++j) {
      const double v = (1.0 - u) * original.pixels[j] + u * generated.pixels[j];
      f.pixels[j] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

double image_l1(const Image &a, const Image &b) {
  require_same_shape(a, b, "image_l1");
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    s += static_cast<std::uint64_t>(std::abs(int(a.pixels[i]) - int(b.pixels[i])));
  return static_cast<double>(s);
}

HighlightSet select_highlights(const Policy &policy, const EnvConfig &env_config, int episodes,
                               int n, double diversity_threshold, std::uint64_t seed) {
  if (n < 1)
    throw std::invalid_argument("highlight count must be at least 1");
  if (episodes < 1)
    throw std::invalid_argument("highlights need at least one episode");
  if (!(diversity_threshold >= 0))
    throw std::invalid_argument("diversity threshold must be non-negative");

  std::vector<Highlight> visited;
  std::unordered_set<std::string> seen;
  for (int e = 0; e < episodes; ++e) {
    GridPac env(env_config);
    env.reset(mix_seed(seed, static_cast<std::uint64_t>(e)), env_config.noop_max);
    while (!env.done()) {
      const auto obs = env.observation();
      const auto values = policy.action_values(obs);
      if (!values)
        throw std::invalid_argument("highlights need an agent that exposes action values");
      const ActionId a = act_greedy(*values);
      if (seen.insert(content_id(env.state_image().pixels.pixels)).second) {
        const auto [lo, hi] = std::minmax_element(values->begin(), values->end());
        visited.push_back({env.state_image(), a, *hi - *lo});
      }
      env.step(a);
    }
  }
  std::stable_sort(visited.begin(), visited.end(),
                   [](const Highlight &x, const Highlight &y) { return x.importance > y.importance; });

  HighlightSet out;
  out.diversity_threshold = diversity_threshold;
  for (auto &h : visited) {
    if (static_cast<int>(out.states.size()) == n)
      break;
    const bool far = std::all_of(out.states.begin(), out.states.end(), [&](const Highlight &s) {
      return image_l1(s.state.pixels, h.state.pixels) >= diversity_threshold;
    });
    if (far)
      out.states.push_back(std::move(h));
  }
  return out;
}

std::vector<CounterfactualResult> evaluate_all_targets(const Translator &translator,
                                                       const Policy &policy,
                                                       std::span<const LabeledSample> states) {
  std::vector<CounterfactualResult> out;
  out.reserve(states.size() * static_cast<std::size_t>(policy.action_space().size()));
  for (const auto &s : states)
    for (ActionId a = 0; a < policy.action_space().size(); ++a)
      out.push_back(explain(translator, policy, s.image, a));
  return out;
}

NoiseTranslator::NoiseTranslator(double sigma, std::uint64_t seed, int num_actions, std::string id)
    : sigma_(sigma), seed_(seed), k_(num_actions), id_(std::move(id)) {
  if (!(sigma >= 0))
    throw ConfigError("sigma", "must be non-negative");
}

Translation NoiseTranslator::translate(const Image &state, ActionId target) const {
  const std::string h = sha256_hex(state.pixels);
  Rng rng(mix_seed(seed_ ^ std::stoull(h.substr(0, 16), nullptr, 16),
                   static_cast<std::uint64_t>(target)));
  Image out = state;
  for (auto &p : out.pixels) {
    const double v = std::round(p + sigma_ * rng.normal());
    p = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return {std::move(out), 0.0};
}

double calibrate_noise_sigma(std::span<const LabeledSample> states, double target_proximity,
                             std::uint64_t seed, int num_actions) {
  if (states.empty())
    throw std::invalid_argument("calibration needs states");
  auto mean_prox = [&](double sigma) {
    const NoiseTranslator noise(sigma, seed, num_actions);
    double s = 0;
    for (const auto &st : states)
      s += proximity(st.image.pixels, noise.translate(st.image.pixels, 0).image);
    return s / static_cast<double>(states.size());
  };
  double lo = 0.0, hi = 1.0;
  while (mean_prox(hi) > target_proximity && hi < 4096)
    hi *= 2;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mean_prox(mid) > target_proximity ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace rlcf
