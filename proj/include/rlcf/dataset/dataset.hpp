#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlcf/agent/policy.hpp"
#include "rlcf/core/image.hpp"
#include "rlcf/env/env_config.hpp"

namespace rlcf {

// One GAN training example: a state image labeled with the agent's action.
struct LabeledSample {
  StateImage image;
  ActionId action = 0;
  std::string sample_id; // content hash of the image bytes
  int episode = 0;
  int step = 0;
};

std::string sample_id_of(const Image &image);

struct CollectConfig {
  int episodes = 100;
  double epsilon = 0.2;
  int noop_max = 30;
  std::uint64_t seed = 0;
  // Stop after the episode in which this many distinct images were seen
  // (0 = run every episode).
  std::size_t target_unique = 20000;
  // Parallel workers over contiguous episode ranges. The merged result does
  // not depend on the worker count.
  int workers = 1;
};

struct CollectResult {
  std::vector<LabeledSample> samples;
  int episodes_run = 0;
  std::int64_t total_steps = 0;
  std::int64_t explored_steps = 0;
};

// Runs the epsilon-greedy policy. Steps whose action came from an exploration
// draw advance the environment but are not recorded.
CollectResult collect(const Policy &policy, const EnvConfig &env_config,
                      const CollectConfig &config);

// Keeps the first occurrence of every sample_id, order preserved.
std::vector<LabeledSample> deduplicate(const std::vector<LabeledSample> &samples);

// Under-samples every action class to the smallest class count (seeded,
// without replacement, original order preserved). Throws if a class is empty.
std::vector<LabeledSample> balance(const std::vector<LabeledSample> &samples,
                                   const ActionSpace &actions,
                                   std::uint64_t seed);

enum class SplitStrategy { fraction_per_class, count_per_class_with_train_dedup };

std::string to_string(SplitStrategy s);
SplitStrategy split_strategy_from_string(const std::string &s);

struct SplitConfig {
  SplitStrategy strategy = SplitStrategy::fraction_per_class;
  double fraction = 0.1; // fraction_per_class: test share per class
  int count = 500;       // count_per_class_with_train_dedup: test size per class
  double validation_fraction = 0.0; // share of the remaining train per class

  // "fraction:0.1" or "count:500"
  static SplitConfig parse(const std::string &text);
};

struct ManifestEntry {
  std::string sample_id;
  ActionId action = 0;
  std::string split; // train | test | validation
  int episode = 0;
  int step = 0;
  friend bool operator==(const ManifestEntry &, const ManifestEntry &) = default;
};

struct DatasetManifest {
  std::string agent_id;
  std::string env_id;
  std::vector<std::string> action_names;
  std::vector<ManifestEntry> samples;
  std::map<ActionId, std::int64_t> per_action_counts;
  struct Collection {
    double epsilon = 0.0;
    int episodes = 0;
    int noop_max = 0;
    std::uint64_t seed = 0;
  } collection_config;
  struct Flags {
    bool dedup_applied = false;
    bool balancing_applied = false;
    std::string split_strategy;
    double split_fraction = 0.0;
    int split_count = 0;
    double validation_fraction = 0.0;
  } pipeline_flags;
  // Per-stage sample counts (collected, explored_steps, after_dedup, ...).
  std::map<std::string, std::int64_t> stage_counts;

  std::vector<ManifestEntry> entries(const std::string &split) const;
  std::set<std::string> ids(const std::string &split) const;
};

// Assigns split tags. Whatever the strategy, a train/validation sample whose
// sample_id also appears in the test split is dropped.
DatasetManifest split(const std::vector<LabeledSample> &samples,
                      const ActionSpace &actions, const SplitConfig &config,
                      std::uint64_t seed);

nlohmann::json to_json(const DatasetManifest &m);
DatasetManifest manifest_from_json(const nlohmann::json &j);
// SHA-256 of the canonical manifest JSON.
std::string manifest_hash(const DatasetManifest &m);

struct PipelineConfig {
  CollectConfig collect;
  SplitConfig split;
  // Skip dedup and balancing (the uncurated baseline dataset).
  bool legacy_mode = false;
  std::uint64_t seed = 0; // balance / split seed
  // Samples to keep out of every split (e.g. another dataset's test set).
  std::set<std::string> exclude_ids;
};

struct PipelineResult {
  DatasetManifest manifest;
  std::vector<LabeledSample> samples; // aligned with manifest.samples
};

PipelineResult run_pipeline(const Policy &policy, const EnvConfig &env_config,
                            const PipelineConfig &config);

// Folder name of an action: lowercase, spaces -> underscores.
std::string action_slug(const std::string &action_name);

// Writes <root>/<name>/<action>/<sample_id>.png and <root>/<name>/manifest.json,
// where name defaults to the agent id. Returns the manifest path.
std::string write_dataset(const std::string &root, const PipelineResult &result,
                          const std::string &name = {});

DatasetManifest load_manifest(const std::string &manifest_path);
// Reads the PNGs of one split next to manifest_path.
std::vector<LabeledSample> load_split(const std::string &manifest_path,
                                      const std::string &split);

} // namespace rlcf
