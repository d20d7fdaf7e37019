#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "rlcf/core/rng.hpp"
#include "rlcf/counterfactual/translator.hpp"
#include "rlcf/dataset/dataset.hpp"
#include "rlcf/gan/config.hpp"
#include "rlcf/gan/networks.hpp"

namespace rlcf::gan {

struct TrainingBatch {
  torch::Tensor real;           // (N, 3, S, S) in [-1, 1]
  torch::Tensor real_actions;   // (N) long
  torch::Tensor target_actions; // (N) long, uniform over all actions
  torch::Tensor mix;            // (N) u in s_hat = u * real + (1 - u) * fake
};

// Draws a batch: images from `samples` at `indices`, target actions and
// interpolation weights from `rng`.
TrainingBatch make_batch(const std::vector<LabeledSample> &samples,
                         std::span<const std::size_t> indices, const ArchitectureConfig &arch,
                         Rng &rng);

struct LossComponents {
  double l_d = 0, l_g = 0, l_adv = 0;
  double cls_real = 0, cls_fake = 0, rec = 0, gp = 0;
};

class NonFiniteLossError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Generator/critic pair with one Adam optimizer each.
class StarGan {
public:
  StarGan(const ArchitectureConfig &arch, const TrainingConfig &config, std::uint64_t seed,
          torch::Dtype dtype = torch::kFloat32);

  // All loss terms on one batch with a single shared fake; no update.
  LossComponents evaluate(const TrainingBatch &batch);
  // One critic update on L_D = -L_adv + lambda_cls * L_cls_real (G frozen).
  LossComponents discriminator_step(const TrainingBatch &batch, double lr);
  // One generator update on L_G = L_adv + lambda_cls * L_cls_fake +
  // lambda_rec * L_rec (D frozen). Real scores and the penalty enter the
  // reported value but carry no gradient to G.
  LossComponents generator_step(const TrainingBatch &batch, double lr);

  Generator &generator() { return g_; }
  Discriminator &discriminator() { return d_; }
  const ArchitectureConfig &architecture() const { return arch_; }
  const TrainingConfig &config() const { return config_; }
  torch::Dtype dtype() const { return dtype_; }

  // Loss terms as tensors; exposed for gradient checks.
  struct Terms {
    torch::Tensor l_d, l_g, l_adv, cls_real, cls_fake, rec, gp;
  };
  Terms d_terms(const TrainingBatch &batch);
  Terms g_terms(const TrainingBatch &batch);

private:
  TrainingBatch cast(const TrainingBatch &batch) const;
  static void set_lr(torch::optim::Adam &opt, double lr);

  ArchitectureConfig arch_;
  TrainingConfig config_;
  torch::Dtype dtype_;
  Generator g_{nullptr};
  Discriminator d_{nullptr};
  std::unique_ptr<torch::optim::Adam> g_opt_;
  std::unique_ptr<torch::optim::Adam> d_opt_;
};

// Throws NonFiniteLossError naming the iteration and every component.
void check_finite(const LossComponents &c, std::int64_t iteration);

struct TrainOptions {
  std::string out_dir;        // checkpoints/ and train_log.csv go here
  std::string manifest_hash;  // recorded in every checkpoint
  // Scores a snapshot of the generator; higher is better. Used to keep a
  // best-by-validity checkpoint.
  std::function<double(const Translator &)> validity_probe;
  std::function<void(std::int64_t, const LossComponents &, bool generator_step)> on_iteration;
};

struct TrainResult {
  std::string final_checkpoint;
  std::string best_checkpoint; // empty without a probe
  double best_validity = -1.0;
  std::int64_t best_iteration = -1;
  std::string log_path;
  std::int64_t discriminator_steps = 0;
  std::int64_t generator_steps = 0;
};

TrainResult train(const std::vector<LabeledSample> &samples, const ArchitectureConfig &arch,
                  const TrainingConfig &config, std::uint64_t seed, const TrainOptions &options);

} // namespace rlcf::gan
