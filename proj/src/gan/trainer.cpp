#include "rlcf/gan/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rlcf/core/error.hpp"
#include "rlcf/gan/checkpoint.hpp"
#include "rlcf/gan/losses.hpp"

namespace fs = std::filesystem;

namespace rlcf::gan {

TrainingBatch make_batch(const std::vector<LabeledSample> &samples,
                         std::span<const std::size_t> indices, const ArchitectureConfig &arch,
                         Rng &rng) {
  std::vector<Image> images;
  std::vector<int64_t> real, target;
  std::vector<float> mix;
  images.reserve(indices.size());
  for (std::size_t i : indices) {
    images.push_back(samples.at(i).image.pixels);
    real.push_back(samples[i].action);
  }
  for (std::size_t n = 0; n < indices.size(); ++n) {
    target.push_back(static_cast<int64_t>(rng.uniform_index(static_cast<std::uint64_t>(arch.num_actions))));
    mix.push_back(static_cast<float>(rng.uniform()));
  }
  TrainingBatch b;
  b.real = images_to_tensor(images, arch);
  b.real_actions = torch::tensor(real, torch::kLong);
  b.target_actions = torch::tensor(target, torch::kLong);
  b.mix = torch::tensor(mix, torch::kFloat32);
  return b;
}

StarGan::StarGan(const ArchitectureConfig &arch, const TrainingConfig &config,
                 std::uint64_t seed, torch::Dtype dtype)
    : arch_(arch), config_(config), dtype_(dtype) {
  arch_.validate();
  config_.validate();
  torch::manual_seed(seed);
  g_ = Generator(arch_);
  d_ = Discriminator(arch_);
  g_->to(dtype_);
  d_->to(dtype_);
  const auto opts = torch::optim::AdamOptions(config_.learning_rate)
                        .betas({config_.beta1, config_.beta2});
  g_opt_ = std::make_unique<torch::optim::Adam>(g_->parameters(), opts);
  d_opt_ = std::make_unique<torch::optim::Adam>(d_->parameters(), opts);
}

TrainingBatch StarGan::cast(const TrainingBatch &b) const {
  return {b.real.to(dtype_), b.real_actions, b.target_actions, b.mix.to(dtype_)};
}

void StarGan::set_lr(torch::optim::Adam &opt, double lr) {
  for (auto &group : opt.param_groups())
    static_cast<torch::optim::AdamOptions &>(group.options()).lr(lr);
}

namespace {

torch::Tensor interpolants(const TrainingBatch &b, const torch::Tensor &fake) {
  const auto u = b.mix.view({-1, 1, 1, 1});
  return u * b.real + (1 - u) * fake.detach();
}

LossComponents values(const StarGan::Terms &t) {
  auto v = [](const torch::Tensor &x) { return x.defined() ? x.item<double>() : 0.0; };
  return {v(t.l_d), v(t.l_g), v(t.l_adv), v(t.cls_real), v(t.cls_fake), v(t.rec), v(t.gp)};
}

} // namespace

StarGan::Terms StarGan::d_terms(const TrainingBatch &raw) {
  const auto b = cast(raw);
  torch::Tensor fake;
  {
    torch::NoGradGuard no_grad;
    fake = g_->forward(b.real, b.target_actions);
  }
  Terms t;
  const auto real_out = d_->forward(b.real);
  const auto fake_out = d_->forward(fake);
  t.gp = gradient_penalty([&](const torch::Tensor &x) { return d_->forward(x).src; },
                          interpolants(b, fake));
  t.l_adv = adversarial_loss(real_out.src, fake_out.src, t.gp, config_.lambda_gp);
  t.cls_real = classification_loss(real_out.cls, b.real_actions);
  t.l_d = -t.l_adv + config_.lambda_cls * t.cls_real;
  return t;
}

StarGan::Terms StarGan::g_terms(const TrainingBatch &raw) {
  const auto b = cast(raw);
  Terms t;
  const auto fake = g_->forward(b.real, b.target_actions);
  const auto fake_out = d_->forward(fake);
  torch::Tensor real_src;
  {
    torch::NoGradGuard no_grad;
    real_src = d_->forward(b.real).src;
  }
  t.gp = gradient_penalty([&](const torch::Tensor &x) { return d_->forward(x).src; },
                          interpolants(b, fake))
             .detach();
  t.l_adv = adversarial_loss(real_src, fake_out.src, t.gp, config_.lambda_gp);
  t.cls_fake = classification_loss(fake_out.cls, b.target_actions);
  const auto reconstructed = g_->forward(fake, b.real_actions);
  t.rec = reconstruction_loss(b.real, reconstructed);
  t.l_g = t.l_adv + config_.lambda_cls * t.cls_fake + config_.lambda_rec * t.rec;
  return t;
}

LossComponents StarGan::evaluate(const TrainingBatch &raw) {
  const auto b = cast(raw);
  const auto fake = g_->forward(b.real, b.target_actions).detach();
  const auto real_out = d_->forward(b.real);
  const auto fake_out = d_->forward(fake);
  const auto gp = gradient_penalty([&](const torch::Tensor &x) { return d_->forward(x).src; },
                                   interpolants(b, fake));
  torch::NoGradGuard no_grad;
  Terms t;
  t.gp = gp;
  t.l_adv = adversarial_loss(real_out.src, fake_out.src, gp, config_.lambda_gp);
  t.cls_real = classification_loss(real_out.cls, b.real_actions);
  t.cls_fake = classification_loss(fake_out.cls, b.target_actions);
  t.rec = reconstruction_loss(b.real, g_->forward(fake, b.real_actions));
  t.l_d = -t.l_adv + config_.lambda_cls * t.cls_real;
  t.l_g = t.l_adv + config_.lambda_cls * t.cls_fake + config_.lambda_rec * t.rec;
  return values(t);
}

LossComponents StarGan::discriminator_step(const TrainingBatch &batch, double lr) {
  auto t = d_terms(batch);
  d_opt_->zero_grad();
  t.l_d.backward();
  set_lr(*d_opt_, lr);
  d_opt_->step();
  return values(t);
}

LossComponents StarGan::generator_step(const TrainingBatch &batch, double lr) {
  auto t = g_terms(batch);
  g_opt_->zero_grad();
  t.l_g.backward();
  set_lr(*g_opt_, lr);
  g_opt_->step();
  // The backward pass also filled D's gradients; drop them.
  d_opt_->zero_grad();
  return values(t);
}

void check_finite(const LossComponents &c, std::int64_t iteration) {
  const double all[] = {c.l_d, c.l_g, c.l_adv, c.cls_real, c.cls_fake, c.rec, c.gp};
  for (double v : all) {
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite loss at iteration " << iteration << ": L_D=" << c.l_d
          << " L_G=" << c.l_g << " L_adv=" << c.l_adv << " L_cls_real=" << c.cls_real
          << " L_cls_fake=" << c.cls_fake << " L_rec=" << c.rec << " gp=" << c.gp;
      throw NonFiniteLossError(msg.str());
    }
  }
}

namespace {

// Shuffled passes over the sample indices.
class BatchSampler {
public:
  BatchSampler(std::size_t n, Rng &rng) : order_(n), rng_(rng) {
    for (std::size_t i = 0; i < n; ++i)
      order_[i] = i;
    shuffle();
  }

  std::vector<std::size_t> next(int batch_size) {
    std::vector<std::size_t> out;
    while (static_cast<int>(out.size()) < batch_size) {
      if (pos_ == order_.size())
        shuffle();
      out.push_back(order_[pos_++]);
    }
    return out;
  }

private:
  void shuffle() {
    for (std::size_t i = order_.size(); i > 1; --i)
      std::swap(order_[i - 1], order_[rng_.uniform_index(i)]);
    pos_ = 0;
  }

  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  Rng &rng_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

} // namespace

TrainResult train(const std::vector<LabeledSample> &samples, const ArchitectureConfig &arch,
                  const TrainingConfig &config, std::uint64_t seed, const TrainOptions &options) {
  arch.validate();
  config.validate();
  if (options.out_dir.empty())
    throw ConfigError("out_dir", "training needs an output directory");
  std::vector<int> per_action(static_cast<std::size_t>(arch.num_actions), 0);
  for (const auto &s : samples) {
    if (s.action < 0 || s.action >= arch.num_actions)
      throw std::invalid_argument("sample action outside the generator's action range");
    ++per_action[static_cast<std::size_t>(s.action)];
  }
  std::string missing;
  for (int a = 0; a < arch.num_actions; ++a)
    if (per_action[static_cast<std::size_t>(a)] == 0)
      missing += (missing.empty() ? "" : ", ") + std::to_string(a);
  if (!missing.empty())
    throw std::invalid_argument("training set has no samples for action(s) " + missing);

  const fs::path out(options.out_dir);
  const fs::path ckpt_dir = out / "checkpoints";
  fs::create_directories(ckpt_dir);

  StarGan gan(arch, config, seed);
  Rng rng(mix_seed(seed, 0x747261696eULL));
  BatchSampler sampler(samples.size(), rng);

  TrainResult result;
  result.log_path = (out / "train_log.csv").string();
  std::ofstream log(result.log_path);
  log << "iteration,L_D,L_G,L_adv,L_cls_real,L_cls_fake,L_rec,gp,lr\n";

  CheckpointMeta meta;
  meta.architecture = arch;
  meta.training = config;
  meta.manifest_hash = options.manifest_hash;
  meta.seed = seed;

  std::vector<fs::path> recent;
  auto snapshot = [&](std::int64_t done) {
    meta.iteration = done;
    const fs::path p = ckpt_dir / ("iter_" + std::to_string(done) + ".ckpt");
    save_checkpoint(p.string(), *gan.generator(), meta);
    recent.push_back(p);
    while (static_cast<int>(recent.size()) > config.keep_last) {
      fs::remove(recent.front());
      recent.erase(recent.begin());
    }
    if (options.validity_probe) {
      const GanTranslator view(gan.generator(), meta, "probe");
      const double v = options.validity_probe(view);
      if (v > result.best_validity) {
        result.best_validity = v;
        result.best_iteration = done;
        result.best_checkpoint = (ckpt_dir / "best.ckpt").string();
        save_checkpoint(result.best_checkpoint, *gan.generator(), meta);
      }
    }
  };

  for (std::int64_t it = 0; it < config.total_iterations; ++it) {
    const double lr = learning_rate_at(config, it);
    const auto idx = sampler.next(config.batch_size);
    const auto batch = make_batch(samples, idx, arch, rng);
    const auto d = gan.discriminator_step(batch, lr);
    check_finite(d, it);
    ++result.discriminator_steps;
    std::optional<LossComponents> g;
    if (is_generator_iteration(config, it)) {
      g = gan.generator_step(batch, lr);
      check_finite(*g, it);
      ++result.generator_steps;
    }
    // L_adv and gp come from the critic update; the G columns stay empty on
    // critic-only iterations.
    log << it << ',' << fmt(d.l_d) << ',' << (g ? fmt(g->l_g) : "") << ',' << fmt(d.l_adv)
        << ',' << fmt(d.cls_real) << ',' << (g ? fmt(g->cls_fake) : "") << ','
        << (g ? fmt(g->rec) : "") << ',' << fmt(d.gp) << ',' << fmt(lr) << '\n';
    if (options.on_iteration) {
      LossComponents merged = d;
      if (g) {
        merged.l_g = g->l_g;
        merged.cls_fake = g->cls_fake;
        merged.rec = g->rec;
      }
      options.on_iteration(it, merged, g.has_value());
    }
    if ((it + 1) % config.checkpoint_every == 0) {
      log.flush();
      snapshot(it + 1);
    }
  }
  log.flush();

  meta.iteration = config.total_iterations;
  result.final_checkpoint = (ckpt_dir / "final.ckpt").string();
  save_checkpoint(result.final_checkpoint, *gan.generator(), meta);
  return result;
}

} // namespace rlcf::gan
