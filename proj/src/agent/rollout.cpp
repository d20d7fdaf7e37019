#include "rlcf/agent/rollout.hpp"

#include "rlcf/env/gridpac.hpp"

namespace rlcf {

std::vector<EpisodeSummary> run_episodes(const Policy *policy,
                                         const EnvConfig &env_config,
                                         int episodes, std::uint64_t seed) {
  GridPac env(env_config);
  Rng rng(mix_seed(seed, 0xA11CE));
  std::vector<EpisodeSummary> out;
  for (int e = 0; e < episodes; ++e) {
    env.reset(mix_seed(seed, static_cast<std::uint64_t>(e)), env_config.noop_max);
    EpisodeSummary s;
    while (!env.done()) {
      const ActionId a =
          policy ? policy->act(env.observation())
                 : static_cast<ActionId>(rng.uniform_index(
                       static_cast<std::uint64_t>(env.action_space().size())));
      const auto step = env.step(a);
      ++s.length;
      s.reward += step.transition.reward;
      s.ghosts_eaten += env.last_events().ghosts_eaten;
      s.died = env.last_events().died;
    }
    s.power_pills = env.power_pills_eaten();
    out.push_back(s);
  }
  return out;
}

double mean_length(const std::vector<EpisodeSummary> &episodes) {
  if (episodes.empty())
    return 0.0;
  double sum = 0.0;
  for (const auto &e : episodes)
    sum += e.length;
  return sum / static_cast<double>(episodes.size());
}

double mean_power_pills(const std::vector<EpisodeSummary> &episodes) {
  if (episodes.empty())
    return 0.0;
  double sum = 0.0;
  for (const auto &e : episodes)
    sum += e.power_pills;
  return sum / static_cast<double>(episodes.size());
}

} // namespace rlcf
