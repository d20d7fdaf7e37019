#pragma once

#include <cstdint>

#include <json.hpp>

namespace rlcf::gan {

struct ArchitectureConfig {
  int base_width = 32;
  int residual_blocks = 6;
  int sampling_stages = 2;     // stride-2 down stages in G (and up stages)
  int discriminator_layers = 6;
  int image_size = 64;         // network input side; states are padded to it
  int source_height = 52;      // state image size before padding
  int source_width = 52;
  int num_actions = 5;

  void validate() const;
  // Spatial side of the discriminator's last feature map.
  int discriminator_final_size() const { return image_size >> discriminator_layers; }
  friend bool operator==(const ArchitectureConfig &, const ArchitectureConfig &) = default;
};

struct TrainingConfig {
  double lambda_cls = 1.0;
  double lambda_rec = 10.0;
  double lambda_gp = 10.0;
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch_size = 16;
  std::int64_t total_iterations = 20000;
  int critic_ratio = 5;
  bool horizontal_flip = false; // accepted for completeness; must stay off
  std::int64_t checkpoint_every = 1000;
  int keep_last = 3;

  void validate() const;
};

// alpha * min(1, 2 (1 - t / T)): constant for the first half, then linear to 0.
double learning_rate_at(const TrainingConfig &config, std::int64_t iteration);

// Generator update after every critic_ratio-th critic update.
inline bool is_generator_iteration(const TrainingConfig &config, std::int64_t iteration) {
  return (iteration + 1) % config.critic_ratio == 0;
}

// Intra-op threads used by the tensor backend (<= 0: leave the default).
void set_compute_threads(int threads);

nlohmann::json to_json(const ArchitectureConfig &a);
ArchitectureConfig architecture_from_json(const nlohmann::json &j);
nlohmann::json to_json(const TrainingConfig &t);
TrainingConfig training_from_json(const nlohmann::json &j);

} // namespace rlcf::gan
