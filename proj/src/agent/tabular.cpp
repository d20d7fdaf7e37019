#include "rlcf/agent/tabular.hpp"

#include <algorithm>
#include <fstream>

#include "rlcf/core/error.hpp"
#include "rlcf/core/rng.hpp"

namespace rlcf {
namespace {

constexpr const char *kFormat = "rlcf-qtable";
constexpr int kFormatVersion = 1;

} // namespace

TabularPolicy::TabularPolicy(std::string agent_id, std::string profile,
                             std::uint64_t seed, EnvConfig env,
                             std::vector<double> q_table)
    : agent_id_(std::move(agent_id)), profile_(std::move(profile)),
      seed_(seed), encoder_(std::move(env)), actions_(ActionSpace::gridpac()),
      q_(std::move(q_table)) {
  const std::size_t expected =
      static_cast<std::size_t>(encoder_.num_states()) * actions_.size();
  if (q_.size() != expected)
    throw ConfigError("q", "table has " + std::to_string(q_.size()) +
                               " entries, expected " + std::to_string(expected));
}

std::span<const double> TabularPolicy::row(int state) const {
  const std::size_t k = static_cast<std::size_t>(actions_.size());
  return {q_.data() + static_cast<std::size_t>(state) * k, k};
}

std::optional<std::vector<double>>
TabularPolicy::action_values(const AgentObservation &obs) const {
  const auto r = row(encoder_.encode(obs));
  return std::vector<double>(r.begin(), r.end());
}

TabularPolicy train_toy_agent(const RewardProfile &profile,
                              const EnvConfig &env_config, std::int64_t steps,
                              std::uint64_t seed, const QLearningConfig &qc,
                              std::string agent_id) {
  if (steps <= 0)
    throw std::invalid_argument("train_toy_agent: steps must be > 0");
  EnvConfig cfg = env_config;
  cfg.reward_profile = profile.name;
  RewardProfile::by_name(profile.name);
  GridPac env(cfg);
  env.set_rendering(false);
  FeatureEncoder encoder(cfg);
  const int k = env.action_space().size();
  std::vector<double> q(static_cast<std::size_t>(encoder.num_states()) * k, 0.0);
  Rng rng(mix_seed(seed, 0));

  std::uint64_t episode = 0;
  env.reset(mix_seed(seed, 1000 + episode), cfg.noop_max);
  int state = encoder.index(encoder.features(env.tile_grid()));
  for (std::int64_t t = 0; t < steps; ++t) {
    const double frac = static_cast<double>(t) / static_cast<double>(steps);
    const double eps = qc.epsilon_start + (qc.epsilon_end - qc.epsilon_start) * frac;
    const std::span<double> row(q.data() + static_cast<std::size_t>(state) * k,
                                static_cast<std::size_t>(k));
    ActionId a;
    if (rng.uniform() < eps)
      a = static_cast<ActionId>(rng.uniform_index(static_cast<std::uint64_t>(k)));
    else
      a = act_greedy(row);

    env.step(a);
    const double r = profile.reward(env.last_events());
    const int next = encoder.index(encoder.features(env.tile_grid()));
    double target = r;
    if (!env.done()) {
      const auto nrow = std::span<const double>(
          q.data() + static_cast<std::size_t>(next) * k, static_cast<std::size_t>(k));
      target += qc.discount * *std::max_element(nrow.begin(), nrow.end());
    }
    row[a] += qc.learning_rate * (target - row[a]);

    if (env.done()) {
      ++episode;
      env.reset(mix_seed(seed, 1000 + episode), cfg.noop_max);
      state = encoder.index(encoder.features(env.tile_grid()));
    } else {
      state = next;
    }
  }
  if (agent_id.empty())
    agent_id = profile.name;
  return TabularPolicy(std::move(agent_id), profile.name, seed, cfg, std::move(q));
}

nlohmann::json to_json(const TabularPolicy &p) {
  return {
      {"format", kFormat},
      {"version", kFormatVersion},
      {"agent_id", p.agent_id()},
      {"profile", p.profile()},
      {"seed", p.seed()},
      {"feature_encoding_version", kFeatureEncodingVersion},
      {"actions", p.action_space().names()},
      {"env_config", to_json(p.env_config())},
      {"num_states", p.encoder().num_states()},
      {"q", p.q_table()},
  };
}

TabularPolicy tabular_policy_from_json(const nlohmann::json &j) {
  if (j.value("format", "") != kFormat)
    throw ConfigError("format", "not a Q-table checkpoint");
  if (j.value("version", 0) != kFormatVersion)
    throw ConfigError("version", "unsupported checkpoint version");
  if (j.value("feature_encoding_version", 0) != kFeatureEncodingVersion)
    throw ConfigError("feature_encoding_version",
                      "checkpoint was written with a different feature encoding");
  return TabularPolicy(j.at("agent_id").get<std::string>(),
                       j.at("profile").get<std::string>(),
                       j.at("seed").get<std::uint64_t>(),
                       env_config_from_json(j.at("env_config")),
                       j.at("q").get<std::vector<double>>());
}

void save_policy(const std::string &path, const TabularPolicy &policy) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << to_json(policy).dump() << "\n";
}

TabularPolicy load_policy(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("agent", "cannot open " + path);
  nlohmann::json j;
  in >> j;
  return tabular_policy_from_json(j);
}

} // namespace rlcf
