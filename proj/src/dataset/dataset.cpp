#include "rlcf/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "rlcf/core/error.hpp"
#include "rlcf/core/hash.hpp"
#include "rlcf/core/png.hpp"
#include "rlcf/core/rng.hpp"
#include "rlcf/env/gridpac.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rlcf {
namespace {

// Separate stream for the exploration draws so that they never share state
// with the environment's reset seed.
constexpr std::uint64_t kExploreStream = 0x6578706c6f7265ULL;

struct EpisodeSamples {
  std::vector<LabeledSample> samples;
  std::int64_t steps = 0;
  std::int64_t explored = 0;
};

EpisodeSamples run_episode(const Policy &policy, const EnvConfig &env_config,
                           const CollectConfig &config, int episode) {
  GridPac env(env_config);
  env.reset(mix_seed(config.seed, static_cast<std::uint64_t>(episode)),
            config.noop_max);
  Rng rng(mix_seed(config.seed ^ kExploreStream,
                   static_cast<std::uint64_t>(episode)));
  EpisodeSamples out;
  int step = 0;
  while (!env.done()) {
    const auto choice =
        act_epsilon_greedy(policy, env.observation(), config.epsilon, rng);
    if (choice.explored) {
      ++out.explored;
    } else {
      LabeledSample s;
      s.image = env.state_image();
      s.action = choice.action;
      s.sample_id = sample_id_of(s.image.pixels);
      s.episode = episode;
      s.step = step;
      out.samples.push_back(std::move(s));
    }
    env.step(choice.action);
    ++out.steps;
    ++step;
  }
  return out;
}

// Picks m of n indices without replacement; returned ascending.
std::vector<std::size_t> choose_sorted(std::size_t n, std::size_t m, Rng &rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i)
    idx[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::vector<std::size_t>>
by_class(const std::vector<LabeledSample> &samples, const ActionSpace &actions) {
  std::vector<std::vector<std::size_t>> classes(actions.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ActionId a = samples[i].action;
    if (!actions.contains(a))
      throw std::invalid_argument("sample " + samples[i].sample_id +
                                  " has action " + std::to_string(a) +
                                  " outside the action space");
    classes[static_cast<std::size_t>(a)].push_back(i);
  }
  return classes;
}

} // namespace

std::string sample_id_of(const Image &image) { return content_id(image.pixels); }

CollectResult collect(const Policy &policy, const EnvConfig &env_config,
                      const CollectConfig &config) {
  if (config.episodes <= 0)
    throw ConfigError("episodes", "must be positive");
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0))
    throw ConfigError("epsilon", "must lie in [0, 1]");
  if (config.noop_max < 0)
    throw ConfigError("noop_max", "must be non-negative");
  if (config.workers <= 0)
    throw ConfigError("workers", "must be positive");
  env_config.validate();
  if (!(policy.action_space() == ActionSpace::gridpac()))
    throw std::invalid_argument("policy action space does not match the environment");

  std::vector<EpisodeSamples> episodes(static_cast<std::size_t>(config.episodes));
  CollectResult result;
  std::unordered_set<std::string> seen;

  auto absorb = [&](int e) {
    auto &ep = episodes[static_cast<std::size_t>(e)];
    result.total_steps += ep.steps;
    result.explored_steps += ep.explored;
    for (auto &s : ep.samples) {
      seen.insert(s.sample_id);
      result.samples.push_back(std::move(s));
    }
    ep = {};
    ++result.episodes_run;
    return config.target_unique != 0 && seen.size() >= config.target_unique;
  };

  const int workers = std::min(config.workers, config.episodes);
  if (workers == 1) {
    for (int e = 0; e < config.episodes; ++e) {
      episodes[static_cast<std::size_t>(e)] =
          run_episode(policy, env_config, config, e);
      if (absorb(e))
        break;
    }
    return result;
  }

  // Contiguous episode ranges per worker; merged in episode order, so the
  // result is the same as the sequential run.
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const int per = (config.episodes + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const int lo = w * per;
        const int hi = std::min(config.episodes, lo + per);
        for (int e = lo; e < hi; ++e)
          episodes[static_cast<std::size_t>(e)] =
              run_episode(policy, env_config, config, e);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto &t : pool)
    t.join();
  for (const auto &err : errors)
    if (err)
      std::rethrow_exception(err);
  for (int e = 0; e < config.episodes; ++e)
    if (absorb(e))
      break;
  return result;
}

std::vector<LabeledSample> deduplicate(const std::vector<LabeledSample> &samples) {
  std::unordered_set<std::string> seen;
  std::vector<LabeledSample> out;
  out.reserve(samples.size());
  for (const auto &s : samples)
    if (seen.insert(s.sample_id).second)
      out.push_back(s);
  return out;
}

std::vector<LabeledSample> balance(const std::vector<LabeledSample> &samples,
                                   const ActionSpace &actions,
                                   std::uint64_t seed) {
  const auto classes = by_class(samples, actions);
  std::string missing;
  std::size_t floor = samples.size();
  for (ActionId a = 0; a < actions.size(); ++a) {
    const auto n = classes[static_cast<std::size_t>(a)].size();
    if (n == 0)
      missing += (missing.empty() ? "" : ", ") + actions.name(a);
    floor = std::min(floor, n);
  }
  if (!missing.empty())
    throw std::invalid_argument("cannot balance: no samples for action(s) " + missing);

  std::vector<char> keep(samples.size(), 0);
  for (ActionId a = 0; a < actions.size(); ++a) {
    const auto &members = classes[static_cast<std::size_t>(a)];
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(a)));
    for (std::size_t k : choose_sorted(members.size(), floor, rng))
      keep[members[k]] = 1;
  }
  std::vector<LabeledSample> out;
  out.reserve(floor * static_cast<std::size_t>(actions.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (keep[i])
      out.push_back(samples[i]);
  return out;
}

std::string to_string(SplitStrategy s) {
  return s == SplitStrategy::fraction_per_class ? "fraction_per_class"
                                                : "count_per_class_with_train_dedup";
}

SplitStrategy split_strategy_from_string(const std::string &s) {
  if (s == "fraction_per_class")
    return SplitStrategy::fraction_per_class;
  if (s == "count_per_class_with_train_dedup")
    return SplitStrategy::count_per_class_with_train_dedup;
  throw ConfigError("split_strategy", "unknown strategy '" + s + "'");
}

SplitConfig SplitConfig::parse(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("split", "expected fraction:<f> or count:<n>, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string value = text.substr(colon + 1);
  SplitConfig c;
  try {
    std::size_t used = 0;
    if (kind == "fraction") {
      c.strategy = SplitStrategy::fraction_per_class;
      c.fraction = std::stod(value, &used);
    } else if (kind == "count") {
      c.strategy = SplitStrategy::count_per_class_with_train_dedup;
      c.count = std::stoi(value, &used);
    } else {
      throw ConfigError("split", "unknown split kind '" + kind + "'");
    }
    if (used != value.size())
      throw std::invalid_argument("trailing characters");
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &) {
    throw ConfigError("split", "bad value '" + value + "'");
  }
  return c;
}

std::vector<ManifestEntry> DatasetManifest::entries(const std::string &tag) const {
  std::vector<ManifestEntry> out;
  for (const auto &e : samples)
    if (e.split == tag)
      out.push_back(e);
  return out;
}

std::set<std::string> DatasetManifest::ids(const std::string &tag) const {
  std::set<std::string> out;
  for (const auto &e : samples)
    if (e.split == tag)
      out.insert(e.sample_id);
  return out;
}

DatasetManifest split(const std::vector<LabeledSample> &samples,
                      const ActionSpace &actions, const SplitConfig &config,
                      std::uint64_t seed) {
  if (config.strategy == SplitStrategy::fraction_per_class &&
      !(config.fraction > 0.0 && config.fraction < 1.0))
    throw ConfigError("split_fraction", "must lie in (0, 1)");
  if (config.strategy == SplitStrategy::count_per_class_with_train_dedup &&
      config.count <= 0)
    throw ConfigError("split_count", "must be positive");
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0))
    throw ConfigError("validation_fraction", "must lie in [0, 1)");

  const auto classes = by_class(samples, actions);
  std::vector<std::string> tag(samples.size(), "train");
  std::unordered_set<std::string> test_ids;

  for (ActionId a = 0; a < actions.size(); ++a) {
    const auto &members = classes[static_cast<std::size_t>(a)];
    const std::size_t n = members.size();
    const std::size_t m =
        config.strategy == SplitStrategy::fraction_per_class
            ? static_cast<std::size_t>(std::floor(config.fraction * static_cast<double>(n)))
            : std::min(n, static_cast<std::size_t>(config.count));
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(a)));
    for (std::size_t k : choose_sorted(n, m, rng)) {
      tag[members[k]] = "test";
      test_ids.insert(samples[members[k]].sample_id);
    }
  }

  if (config.validation_fraction > 0.0) {
    for (ActionId a = 0; a < actions.size(); ++a) {
      std::vector<std::size_t> rest;
      for (std::size_t i : classes[static_cast<std::size_t>(a)])
        if (tag[i] == "train" && !test_ids.contains(samples[i].sample_id))
          rest.push_back(i);
      const auto m = static_cast<std::size_t>(
          std::floor(config.validation_fraction * static_cast<double>(rest.size())));
      Rng rng(mix_seed(seed ^ 0x76616cULL, static_cast<std::uint64_t>(a)));
      for (std::size_t k : choose_sorted(rest.size(), m, rng))
        tag[rest[k]] = "validation";
    }
  }

  DatasetManifest manifest;
  manifest.action_names = actions.names();
  for (ActionId a = 0; a < actions.size(); ++a)
    manifest.per_action_counts[a] = 0;
  std::set<std::string> validation_ids;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (tag[i] == "validation")
      validation_ids.insert(samples[i].sample_id);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto &s = samples[i];
    // Copies of a held-out image never stay in a training split.
    if (tag[i] != "test" && test_ids.contains(s.sample_id))
      continue;
    if (tag[i] == "train" && validation_ids.contains(s.sample_id))
      continue;
    manifest.samples.push_back({s.sample_id, s.action, tag[i], s.episode, s.step});
    ++manifest.per_action_counts[s.action];
  }
  manifest.pipeline_flags.split_strategy = to_string(config.strategy);
  manifest.pipeline_flags.split_fraction =
      config.strategy == SplitStrategy::fraction_per_class ? config.fraction : 0.0;
  manifest.pipeline_flags.split_count =
      config.strategy == SplitStrategy::count_per_class_with_train_dedup ? config.count : 0;
  manifest.pipeline_flags.validation_fraction = config.validation_fraction;
  return manifest;
}

json to_json(const DatasetManifest &m) {
  json samples = json::array();
  for (const auto &e : m.samples)
    samples.push_back({{"sample_id", e.sample_id},
                       {"action", e.action},
                       {"split", e.split},
                       {"episode", e.episode},
                       {"step", e.step}});
  json counts = json::object();
  for (const auto &[a, n] : m.per_action_counts)
    counts[std::to_string(a)] = n;
  json stages = json::object();
  for (const auto &[k, v] : m.stage_counts)
    stages[k] = v;
  return {{"agent_id", m.agent_id},
          {"env_id", m.env_id},
          {"action_names", m.action_names},
          {"samples", samples},
          {"per_action_counts", counts},
          {"collection_config",
           {{"epsilon", m.collection_config.epsilon},
            {"episodes", m.collection_config.episodes},
            {"noop_max", m.collection_config.noop_max},
            {"seed", m.collection_config.seed}}},
          {"pipeline_flags",
           {{"dedup_applied", m.pipeline_flags.dedup_applied},
            {"balancing_applied", m.pipeline_flags.balancing_applied},
            {"split_strategy", m.pipeline_flags.split_strategy},
            {"split_fraction", m.pipeline_flags.split_fraction},
            {"split_count", m.pipeline_flags.split_count},
            {"validation_fraction", m.pipeline_flags.validation_fraction}}},
          {"stage_counts", stages}};
}

DatasetManifest manifest_from_json(const json &j) {
  try {
    DatasetManifest m;
    m.agent_id = j.at("agent_id").get<std::string>();
    m.env_id = j.at("env_id").get<std::string>();
    m.action_names = j.at("action_names").get<std::vector<std::string>>();
    for (const auto &e : j.at("samples"))
      m.samples.push_back({e.at("sample_id").get<std::string>(), e.at("action").get<int>(),
                           e.at("split").get<std::string>(), e.at("episode").get<int>(),
                           e.at("step").get<int>()});
    for (const auto &[k, v] : j.at("per_action_counts").items())
      m.per_action_counts[std::stoi(k)] = v.get<std::int64_t>();
    const auto &c = j.at("collection_config");
    m.collection_config = {c.at("epsilon").get<double>(), c.at("episodes").get<int>(),
                           c.at("noop_max").get<int>(), c.at("seed").get<std::uint64_t>()};
    const auto &f = j.at("pipeline_flags");
    m.pipeline_flags.dedup_applied = f.at("dedup_applied").get<bool>();
    m.pipeline_flags.balancing_applied = f.at("balancing_applied").get<bool>();
    m.pipeline_flags.split_strategy = f.at("split_strategy").get<std::string>();
    m.pipeline_flags.split_fraction = f.value("split_fraction", 0.0);
    m.pipeline_flags.split_count = f.value("split_count", 0);
    m.pipeline_flags.validation_fraction = f.value("validation_fraction", 0.0);
    const json stages = j.value("stage_counts", json::object());
    for (const auto &[k, v] : stages.items())
      m.stage_counts[k] = v.get<std::int64_t>();
    return m;
  } catch (const json::exception &e) {
    throw ConfigError("manifest", e.what());
  }
}

std::string manifest_hash(const DatasetManifest &m) { return sha256_hex(to_json(m).dump()); }

PipelineResult run_pipeline(const Policy &policy, const EnvConfig &env_config,
                            const PipelineConfig &config) {
  const ActionSpace &actions = policy.action_space();
  CollectResult collected = collect(policy, env_config, config.collect);

  std::vector<LabeledSample> pool;
  pool.reserve(collected.samples.size());
  for (auto &s : collected.samples)
    if (!config.exclude_ids.contains(s.sample_id))
      pool.push_back(std::move(s));
  const auto after_exclusion = static_cast<std::int64_t>(pool.size());

  std::int64_t after_dedup = after_exclusion;
  std::int64_t after_balance = after_exclusion;
  if (!config.legacy_mode) {
    pool = deduplicate(pool);
    after_dedup = static_cast<std::int64_t>(pool.size());
    pool = balance(pool, actions, config.seed);
    after_balance = static_cast<std::int64_t>(pool.size());
  }

  PipelineResult result;
  result.manifest = split(pool, actions, config.split, config.seed);
  auto &m = result.manifest;
  m.agent_id = policy.agent_id();
  m.env_id = env_config.env_id;
  m.collection_config = {config.collect.epsilon, collected.episodes_run,
                         config.collect.noop_max, config.collect.seed};
  m.pipeline_flags.dedup_applied = !config.legacy_mode;
  m.pipeline_flags.balancing_applied = !config.legacy_mode;
  m.stage_counts = {{"total_steps", collected.total_steps},
                    {"explored_steps", collected.explored_steps},
                    {"collected", collected.total_steps - collected.explored_steps},
                    {"after_exclusion", after_exclusion},
                    {"after_dedup", after_dedup},
                    {"after_balance", after_balance},
                    {"train", static_cast<std::int64_t>(m.entries("train").size())},
                    {"test", static_cast<std::int64_t>(m.entries("test").size())},
                    {"validation", static_cast<std::int64_t>(m.entries("validation").size())}};

  // Keep the image for every manifest entry, in manifest order.
  std::unordered_map<std::string, const LabeledSample *> by_id;
  for (const auto &s : pool)
    by_id.emplace(s.sample_id, &s);
  result.samples.reserve(m.samples.size());
  for (const auto &e : m.samples) {
    LabeledSample s = *by_id.at(e.sample_id);
    s.action = e.action;
    s.episode = e.episode;
    s.step = e.step;
    result.samples.push_back(std::move(s));
  }
  return result;
}

std::string action_slug(const std::string &action_name) {
  std::string out;
  for (char c : action_name)
    out += c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string write_dataset(const std::string &root, const PipelineResult &result,
                          const std::string &name) {
  const auto &m = result.manifest;
  const fs::path dir = fs::path(root) / (name.empty() ? m.agent_id : name);
  fs::create_directories(dir);
  for (const auto &name : m.action_names)
    fs::create_directories(dir / action_slug(name));
  for (const auto &s : result.samples) {
    const fs::path p = dir / action_slug(m.action_names.at(static_cast<std::size_t>(s.action))) /
                       (s.sample_id + ".png");
    if (!fs::exists(p))
      png::write_file(p.string(), s.image.pixels);
  }
  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path);
  if (!out)
    throw std::runtime_error("cannot write " + manifest_path.string());
  out << to_json(m).dump(1) << '\n';
  return manifest_path.string();
}

DatasetManifest load_manifest(const std::string &manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw std::runtime_error("cannot open manifest " + manifest_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ConfigError("manifest", std::string("not valid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

std::vector<LabeledSample> load_split(const std::string &manifest_path,
                                      const std::string &tag) {
  const DatasetManifest m = load_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<LabeledSample> out;
  for (const auto &e : m.samples) {
    if (e.split != tag)
      continue;
    LabeledSample s;
    const fs::path p = dir / action_slug(m.action_names.at(static_cast<std::size_t>(e.action))) /
                       (e.sample_id + ".png");
    s.image.pixels = png::read_file(p.string());
    s.image.env_id = m.env_id;
    s.image.episode = e.episode;
    s.image.step = e.step;
    s.action = e.action;
    s.sample_id = e.sample_id;
    s.episode = e.episode;
    s.step = e.step;
    out.push_back(std::move(s));
  }
  return out;
}

} // namespace rlcf
