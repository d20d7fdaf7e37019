#include "rlcf/gan/config.hpp"

#include <algorithm>

#include "rlcf/core/error.hpp"

namespace rlcf::gan {

void ArchitectureConfig::validate() const {
  if (base_width < 1)
    throw ConfigError("base_width", "must be positive");
  if (residual_blocks < 0)
    throw ConfigError("residual_blocks", "must be non-negative");
  if (sampling_stages < 0)
    throw ConfigError("sampling_stages", "must be non-negative");
  if (discriminator_layers < 1)
    throw ConfigError("discriminator_layers", "must be positive");
  if (num_actions < 2)
    throw ConfigError("num_actions", "need at least two actions");
  if (image_size <= 0 || image_size % (1 << std::max(sampling_stages, discriminator_layers)) != 0)
    throw ConfigError("image_size", "must be divisible by 2^stages and 2^discriminator_layers");
  if (source_height <= 0 || source_width <= 0 || source_height > image_size ||
      source_width > image_size)
    throw ConfigError("source_height", "state size must fit inside image_size");
}

void TrainingConfig::validate() const {
  if (lambda_cls < 0)
    throw ConfigError("lambda_cls", "must be non-negative");
  if (lambda_rec < 0)
    throw ConfigError("lambda_rec", "must be non-negative");
  if (lambda_gp < 0)
    throw ConfigError("lambda_gp", "must be non-negative");
  if (!(learning_rate > 0))
    throw ConfigError("learning_rate", "must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw ConfigError("beta", "Adam betas must lie in [0, 1)");
  if (batch_size < 1)
    throw ConfigError("batch_size", "must be positive");
  if (total_iterations < 1)
    throw ConfigError("total_iterations", "must be positive");
  if (critic_ratio < 1)
    throw ConfigError("critic_ratio", "must be at least 1");
  if (horizontal_flip)
    throw ConfigError("horizontal_flip", "flipping would swap Left and Right labels");
  if (checkpoint_every < 1)
    throw ConfigError("checkpoint_every", "must be positive");
  if (keep_last < 1)
    throw ConfigError("keep_last", "must be positive");
}

double learning_rate_at(const TrainingConfig &config, std::int64_t iteration) {
  const double progress =
      static_cast<double>(iteration) / static_cast<double>(config.total_iterations);
  return config.learning_rate * std::min(1.0, 2.0 * (1.0 - progress));
}

nlohmann::json to_json(const ArchitectureConfig &a) {
  return {{"base_width", a.base_width},
          {"residual_blocks", a.residual_blocks},
          {"sampling_stages", a.sampling_stages},
          {"discriminator_layers", a.discriminator_layers},
          {"image_size", a.image_size},
          {"source_height", a.source_height},
          {"source_width", a.source_width},
          {"num_actions", a.num_actions}};
}

ArchitectureConfig architecture_from_json(const nlohmann::json &j) {
  ArchitectureConfig a;
  try {
    a.base_width = j.value("base_width", a.base_width);
    a.residual_blocks = j.value("residual_blocks", a.residual_blocks);
    a.sampling_stages = j.value("sampling_stages", a.sampling_stages);
    a.discriminator_layers = j.value("discriminator_layers", a.discriminator_layers);
    a.image_size = j.value("image_size", a.image_size);
    a.source_height = j.value("source_height", a.source_height);
    a.source_width = j.value("source_width", a.source_width);
    a.num_actions = j.value("num_actions", a.num_actions);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("architecture", e.what());
  }
  a.validate();
  return a;
}

nlohmann::json to_json(const TrainingConfig &t) {
  return {{"lambda_cls", t.lambda_cls},
          {"lambda_rec", t.lambda_rec},
          {"lambda_gp", t.lambda_gp},
          {"learning_rate", t.learning_rate},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"batch_size", t.batch_size},
          {"total_iterations", t.total_iterations},
          {"critic_ratio", t.critic_ratio},
          {"horizontal_flip", t.horizontal_flip},
          {"checkpoint_every", t.checkpoint_every},
          {"keep_last", t.keep_last}};
}

TrainingConfig training_from_json(const nlohmann::json &j) {
  TrainingConfig t;
  try {
    t.lambda_cls = j.value("lambda_cls", t.lambda_cls);
    t.lambda_rec = j.value("lambda_rec", t.lambda_rec);
    t.lambda_gp = j.value("lambda_gp", t.lambda_gp);
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.beta1 = j.value("beta1", t.beta1);
    t.beta2 = j.value("beta2", t.beta2);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.total_iterations = j.value("total_iterations", t.total_iterations);
    t.critic_ratio = j.value("critic_ratio", t.critic_ratio);
    t.horizontal_flip = j.value("horizontal_flip", t.horizontal_flip);
    t.checkpoint_every = j.value("checkpoint_every", t.checkpoint_every);
    t.keep_last = j.value("keep_last", t.keep_last);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("training", e.what());
  }
  t.validate();
  return t;
}

} // namespace rlcf::gan
