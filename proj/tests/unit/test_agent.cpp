#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "rlcf/agent/remote_policy.hpp"
#include "rlcf/agent/rollout.hpp"
#include "rlcf/agent/tabular.hpp"
#include "rlcf/agent/wire.hpp"
#include "rlcf/core/error.hpp"
#include "rlcf/env/gridpac.hpp"

using namespace rlcf;

namespace {

// Fixed-value policy for interface tests.
class ConstantValuesPolicy final : public Policy {
public:
  explicit ConstantValuesPolicy(std::vector<double> v) : values_(std::move(v)) {}
  std::optional<std::vector<double>>
  action_values(const AgentObservation &) const override {
    return values_;
  }
  const ActionSpace &action_space() const override { return actions_; }
  const std::string &agent_id() const override { return id_; }

private:
  std::vector<double> values_;
  ActionSpace actions_ = ActionSpace::gridpac();
  std::string id_ = "constant";
};

AgentObservation blank_observation() {
  return lift(Image(52, 52), 32, 32);
}

const TabularPolicy &trained(const std::string &profile) {
  static std::map<std::string, TabularPolicy> cache;
  auto it = cache.find(profile);
  if (it == cache.end())
    it = cache
             .emplace(profile,
                      train_toy_agent(RewardProfile::by_name(profile),
                                      EnvConfig::gridpac_default(), 200000, 3))
             .first;
  return it->second;
}

EnvConfig with_profile(const std::string &p) {
  EnvConfig c = EnvConfig::gridpac_default();
  c.reward_profile = p;
  return c;
}

} // namespace

// ---------------------------------------------------------------- greedy

TEST(ActGreedy, Argmax) {
  EXPECT_EQ(act_greedy(std::vector<double>{0.1, 0.9, 0.2, 0.0, 0.0}), 1);
}

TEST(ActGreedy, AllEqualPicksLowestId) {
  EXPECT_EQ(act_greedy(std::vector<double>{0.3, 0.3, 0.3, 0.3, 0.3}), 0);
}

TEST(ActGreedy, TieAmongLeadersPicksLowestId) {
  EXPECT_EQ(act_greedy(std::vector<double>{0.5, 0.5, 0.1, 0.1, 0.1}), 0);
  EXPECT_EQ(act_greedy(std::vector<double>{0.1, 0.2, 0.7, 0.7, 0.1}), 2);
}

TEST(ActGreedy, InvariantUnderPositiveAffineMaps) {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(5);
    for (auto &x : v) // coarse grid so ties actually occur
      x = static_cast<double>(rng.uniform_index(4)) - 1.5;
    const double scale = 0.01 + 10.0 * rng.uniform();
    const double shift = -50.0 + 100.0 * rng.uniform();
    std::vector<double> w(v);
    for (auto &x : w)
      x = scale * x + shift;
    ASSERT_EQ(act_greedy(v), act_greedy(w));
  }
}

// ---------------------------------------------------------------- epsilon

TEST(EpsilonGreedy, ZeroNeverExplores) {
  const ConstantValuesPolicy p({0.0, 0.0, 3.0, 1.0, 0.0});
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto c = act_epsilon_greedy(p, blank_observation(), 0.0, rng);
    ASSERT_FALSE(c.explored);
    ASSERT_EQ(c.action, 2);
  }
}

TEST(EpsilonGreedy, OneAlwaysExplores) {
  const ConstantValuesPolicy p({0.0, 0.0, 3.0, 1.0, 0.0});
  Rng rng(2);
  for (int i = 0; i < 200; ++i)
    ASSERT_TRUE(act_epsilon_greedy(p, blank_observation(), 1.0, rng).explored);
}

TEST(EpsilonGreedy, ExploredFractionNearEpsilon) {
  const ConstantValuesPolicy p({1.0, 0.0, 0.0, 0.0, 0.0});
  Rng rng(3);
  const auto obs = blank_observation();
  int explored = 0;
  for (int i = 0; i < 10000; ++i)
    explored += act_epsilon_greedy(p, obs, 0.2, rng).explored;
  const double frac = explored / 10000.0;
  EXPECT_GE(frac, 0.18);
  EXPECT_LE(frac, 0.22);
}

TEST(EpsilonGreedy, DeterministicGivenRngState) {
  const ConstantValuesPolicy p({1.0, 0.0, 0.0, 0.0, 0.0});
  Rng a(77), b(77);
  const auto obs = blank_observation();
  for (int i = 0; i < 500; ++i) {
    const auto x = act_epsilon_greedy(p, obs, 0.5, a);
    const auto y = act_epsilon_greedy(p, obs, 0.5, b);
    ASSERT_EQ(x.action, y.action);
    ASSERT_EQ(x.explored, y.explored);
  }
}

TEST(EpsilonGreedy, RejectsOutOfRangeEpsilon) {
  const ConstantValuesPolicy p({1.0, 0.0, 0.0, 0.0, 0.0});
  Rng rng(0);
  EXPECT_THROW(act_epsilon_greedy(p, blank_observation(), 1.5, rng),
               std::invalid_argument);
}

// ---------------------------------------------------------------- decoder

TEST(FeatureEncoder, PixelDecodingMatchesGroundTruth) {
  const EnvConfig c = EnvConfig::gridpac_default();
  const FeatureEncoder enc(c);
  GridPac env(c);
  Rng rng(4);
  int checked = 0;
  for (int e = 0; e < 10; ++e) {
    env.reset(mix_seed(4, e), 30);
    while (!env.done()) {
      const TileGrid truth = env.tile_grid();
      ASSERT_EQ(enc.decode(env.observation().newest()), truth);
      ASSERT_EQ(enc.decode_rgb(env.state_image().pixels), truth);
      ++checked;
      env.step(static_cast<ActionId>(rng.uniform_index(5)));
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(FeatureEncoder, FeaturesOfHandBuiltGrid) {
  EnvConfig c = EnvConfig::gridpac_default();
  const FeatureEncoder enc(c);
  // bottom corridor: player at (11,6), pill to the right, ghost to the left
  TileGrid g{13, 13, std::vector<Tile>(169, Tile::empty)};
  for (int r = 0; r < 13; ++r)
    for (int col = 0; col < 13; ++col)
      if (c.maze[r][col] == '#')
        g.tiles[r * 13 + col] = Tile::wall;
  g.tiles[11 * 13 + 6] = Tile::player;
  g.tiles[11 * 13 + 9] = Tile::pill;
  g.tiles[11 * 13 + 4] = Tile::ghost;
  FeatureState f = enc.features(g);
  EXPECT_EQ(f.player_cell, 11 * 13 + 6);
  EXPECT_EQ(f.pill_dir, gridpac_action::right);
  EXPECT_EQ(f.ghost_dir, gridpac_action::left);
  EXPECT_FALSE(f.power);

  g.tiles[11 * 13 + 4] = Tile::frightened_ghost;
  EXPECT_TRUE(enc.features(g).power);

  // ghosts beyond the radius are not reported
  g.tiles[11 * 13 + 4] = Tile::empty;
  g.tiles[1 * 13 + 1] = Tile::ghost;
  EXPECT_EQ(enc.features(g).ghost_dir, 0);

  // no player -> the dedicated unknown state
  g.tiles[11 * 13 + 6] = Tile::empty;
  EXPECT_EQ(enc.index(enc.features(g)), enc.num_states() - 1);
}

// ---------------------------------------------------------------- training

TEST(TrainToyAgent, ZeroStepsIsAnError) {
  EXPECT_THROW(train_toy_agent(RewardProfile::by_name("fear"),
                               EnvConfig::gridpac_default(), 0, 3),
               std::invalid_argument);
}

TEST(TrainToyAgent, UnknownProfileIsAnError) {
  EXPECT_THROW(RewardProfile::by_name("greed"), ConfigError);
  RewardProfile bogus{"greed", {}};
  EXPECT_THROW(train_toy_agent(bogus, EnvConfig::gridpac_default(), 10, 3),
               ConfigError);
}

TEST(TrainToyAgent, ReproducibleQTable) {
  const auto a = train_toy_agent(RewardProfile::by_name("hunter"),
                                 EnvConfig::gridpac_default(), 20000, 5);
  const auto b = train_toy_agent(RewardProfile::by_name("hunter"),
                                 EnvConfig::gridpac_default(), 20000, 5);
  EXPECT_EQ(a.q_table(), b.q_table());
}

TEST(TrainToyAgent, FearAgentSurvivesTwiceAsLongAsRandom) {
  const auto &policy = trained("fear");
  const auto c = with_profile("fear");
  const double agent = mean_length(run_episodes(&policy, c, 50, 99));
  const double random = mean_length(run_episodes(nullptr, c, 50, 99));
  EXPECT_GE(agent, 2.0 * random) << agent << " vs random " << random;
}

TEST(TrainToyAgent, PillAgentEatsTwiceAsManyPowerPills) {
  const auto &policy = trained("pill");
  const auto c = with_profile("pill");
  const double agent = mean_power_pills(run_episodes(&policy, c, 50, 99));
  const double random = mean_power_pills(run_episodes(nullptr, c, 50, 99));
  EXPECT_GE(agent, 2.0 * random) << agent << " vs random " << random;
}

TEST(TabularPolicy, ActIsGreedyOverRowAndDeterministic) {
  const auto &policy = trained("hunter");
  GridPac env(with_profile("hunter"));
  env.reset(8, 30);
  Rng rng(8);
  for (int t = 0; t < 40 && !env.done(); ++t) {
    const auto obs = env.observation();
    const auto values = policy.action_values(obs);
    ASSERT_TRUE(values.has_value());
    ASSERT_EQ(policy.act(obs), act_greedy(*values));
    ASSERT_EQ(policy.act(obs), policy.act(obs));
    Rng zero(1);
    ASSERT_EQ(act_epsilon_greedy(policy, obs, 0.0, zero).action, policy.act(obs));
    env.step(static_cast<ActionId>(rng.uniform_index(5)));
  }
}

TEST(TabularPolicy, LiftedFrameAgreesWithLiveHistory) {
  const auto &policy = trained("hunter");
  const EnvConfig c = with_profile("hunter");
  GridPac env(c);
  int agree = 0, total = 0;
  for (int e = 0; total < 500; ++e) {
    env.reset(mix_seed(31, e), 30);
    while (!env.done() && total < 500) {
      const ActionId live = policy.act(env.observation());
      const ActionId lifted =
          policy.act(lift(env.state_image().pixels, c.obs_height, c.obs_width));
      agree += live == lifted;
      ++total;
      env.step(live);
    }
  }
  EXPECT_GE(agree, 450) << agree << "/" << total;
}

TEST(TabularPolicy, CheckpointRoundTrip) {
  const auto &policy = trained("pill");
  const auto back = tabular_policy_from_json(to_json(policy));
  EXPECT_EQ(back.q_table(), policy.q_table());
  EXPECT_EQ(back.agent_id(), policy.agent_id());
  EXPECT_EQ(back.profile(), "pill");
  auto j = to_json(policy);
  j["feature_encoding_version"] = 99;
  EXPECT_THROW(tabular_policy_from_json(j), ConfigError);
}

// ---------------------------------------------------------------- remote

TEST(RemotePolicy, MatchesLocalPolicyOverTheWire) {
  const auto &policy = trained("hunter");
  httplib::Server server;
  server.Post("/api/policy/hunter/act",
              [&](const httplib::Request &req, httplib::Response &res) {
                const auto obs = observation_from_json(nlohmann::json::parse(req.body));
                PolicyReply reply{policy.act(obs), policy.action_values(obs)};
                res.set_content(reply_to_json(reply).dump(), "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const RemotePolicy remote("127.0.0.1", port, "hunter", ActionSpace::gridpac());
  GridPac env(with_profile("hunter"));
  env.reset(4, 10);
  for (int t = 0; t < 15 && !env.done(); ++t) {
    const auto obs = env.observation();
    ASSERT_EQ(remote.act(obs), policy.act(obs));
    ASSERT_EQ(*remote.action_values(obs), *policy.action_values(obs));
    env.step(policy.act(obs));
  }
  const RemotePolicy missing("127.0.0.1", port, "nobody", ActionSpace::gridpac());
  EXPECT_THROW(missing.act(env.observation()), std::runtime_error);

  server.stop();
  thread.join();
}

TEST(Wire, RejectsMalformedObservation) {
  nlohmann::json j = observation_to_json(blank_observation());
  j["height"] = 31;
  EXPECT_THROW(observation_from_json(j), ShapeError);
  j = observation_to_json(blank_observation());
  j["data"][0] = 1.5;
  EXPECT_THROW(observation_from_json(j), ShapeError);
}
