#include "rlcf/gan/losses.hpp"

#include "rlcf/core/error.hpp"

namespace rlcf::gan {

torch::Tensor adversarial_loss(const torch::Tensor &d_src_real, const torch::Tensor &d_src_fake,
                               const torch::Tensor &gp_term, double lambda_gp) {
  return d_src_real.mean() - d_src_fake.mean() - lambda_gp * gp_term;
}

torch::Tensor gradient_penalty(const std::function<torch::Tensor(const torch::Tensor &)> &critic,
                               const torch::Tensor &interpolants) {
  auto x = interpolants.detach().requires_grad_(true);
  const auto scores = critic(x);
  const auto grad = torch::autograd::grad({scores.sum()}, {x}, /*grad_outputs=*/{},
                                          /*retain_graph=*/true, /*create_graph=*/true)[0];
  const auto norms = grad.flatten(1).norm(2, 1);
  return (norms - 1.0).pow(2).mean();
}

torch::Tensor classification_loss(const torch::Tensor &logits, const torch::Tensor &actions) {
  return torch::nn::functional::cross_entropy(logits, actions.to(torch::kLong));
}

torch::Tensor reconstruction_loss(const torch::Tensor &original,
                                  const torch::Tensor &reconstructed) {
  if (original.sizes() != reconstructed.sizes())
    throw ShapeError("reconstruction_loss: batch shapes differ");
  return (original - reconstructed).abs().mean();
}

} // namespace rlcf::gan
