#pragma once

#include <functional>

#include <torch/torch.h>

namespace rlcf::gan {

// mean(d_src_real) - mean(d_src_fake) - lambda_gp * gp_term
torch::Tensor adversarial_loss(const torch::Tensor &d_src_real, const torch::Tensor &d_src_fake,
                               const torch::Tensor &gp_term, double lambda_gp);

// mean over the batch of (||grad_x critic(x)||_2 - 1)^2, per-item gradient
// norms at the interpolants. The graph is kept so the term can be
// differentiated again with respect to the critic's parameters.
torch::Tensor gradient_penalty(const std::function<torch::Tensor(const torch::Tensor &)> &critic,
                               const torch::Tensor &interpolants);

// Mean negative log softmax probability of the labelled action.
torch::Tensor classification_loss(const torch::Tensor &logits, const torch::Tensor &actions);

// Mean absolute difference over all elements.
torch::Tensor reconstruction_loss(const torch::Tensor &original,
                                  const torch::Tensor &reconstructed);

} // namespace rlcf::gan
