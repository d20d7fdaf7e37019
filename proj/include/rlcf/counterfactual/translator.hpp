#pragma once

#include <string>

#include "rlcf/core/image.hpp"
#include "rlcf/env/action_space.hpp"

namespace rlcf {

struct Translation {
  Image image;
  double forward_seconds = 0.0; // network forward pass only
};

// Image-to-image model conditioned on a target action. Implementations must
// be safe for concurrent calls.
class Translator {
public:
  virtual ~Translator() = default;
  virtual Translation translate(const Image &state, ActionId target) const = 0;
  virtual int num_actions() const = 0;
  virtual const std::string &id() const = 0;
};

// Returns its input unchanged.
class IdentityTranslator final : public Translator {
public:
  explicit IdentityTranslator(int num_actions, std::string id = "identity")
      : k_(num_actions), id_(std::move(id)) {}
  Translation translate(const Image &state, ActionId) const override { return {state, 0.0}; }
  int num_actions() const override { return k_; }
  const std::string &id() const override { return id_; }

private:
  int k_;
  std::string id_;
};

// Returns the same image whatever the input and target.
class ConstantTranslator final : public Translator {
public:
  ConstantTranslator(Image output, int num_actions, std::string id = "constant")
      : out_(std::move(output)), k_(num_actions), id_(std::move(id)) {}
  Translation translate(const Image &, ActionId) const override { return {out_, 0.0}; }
  int num_actions() const override { return k_; }
  const std::string &id() const override { return id_; }

private:
  Image out_;
  int k_;
  std::string id_;
};

} // namespace rlcf
