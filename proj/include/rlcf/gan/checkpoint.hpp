#pragma once

#include <mutex>
#include <string>

#include "rlcf/counterfactual/translator.hpp"
#include "rlcf/gan/config.hpp"
#include "rlcf/gan/networks.hpp"

namespace rlcf::gan {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  ArchitectureConfig architecture;
  TrainingConfig training;
  std::int64_t iteration = 0;
  std::string manifest_hash;
  std::uint64_t seed = 0;
};

// Layout: 8-byte magic "RLCFGAN\0", little-endian u64 header length, JSON
// header (meta + tensor table), then float32 little-endian tensor data in
// table order. Written to a temporary file and renamed into place.
void save_checkpoint(const std::string &path, GeneratorImpl &generator,
                     const CheckpointMeta &meta);

struct LoadedGenerator {
  Generator generator{nullptr};
  CheckpointMeta meta;
};

LoadedGenerator load_checkpoint(const std::string &path);
// Header only; does not read the weights.
CheckpointMeta read_checkpoint_meta(const std::string &path);

// Inference wrapper around a generator: pads, normalizes, runs one forward
// pass, crops and rounds back to 8-bit.
class GanTranslator final : public Translator {
public:
  explicit GanTranslator(const std::string &checkpoint_path, std::string id = {});
  GanTranslator(Generator generator, CheckpointMeta meta, std::string id);

  Translation translate(const Image &state, ActionId target) const override;
  int num_actions() const override { return meta_.architecture.num_actions; }
  const std::string &id() const override { return id_; }
  const CheckpointMeta &meta() const { return meta_; }

private:
  Generator generator_{nullptr};
  CheckpointMeta meta_;
  std::string id_;
  mutable std::mutex mutex_;
};

} // namespace rlcf::gan
