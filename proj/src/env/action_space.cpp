#include "rlcf/env/action_space.hpp"

#include <set>
#include <stdexcept>

#include "rlcf/core/error.hpp"

namespace rlcf {

ActionSpace::ActionSpace(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.size() < 2)
    throw ConfigError("actions", "an action space needs at least 2 actions");
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size())
    throw ConfigError("actions", "action names must be unique");
}

ActionSpace ActionSpace::gridpac() {
  return ActionSpace({"Do nothing", "Up", "Down", "Left", "Right"});
}

const std::string &ActionSpace::name(ActionId a) const {
  if (!contains(a))
    throw std::out_of_range("action id " + std::to_string(a) +
                            " outside action space of size " +
                            std::to_string(size()));
  return names_[static_cast<std::size_t>(a)];
}

ActionId ActionSpace::id_of(const std::string &name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name)
      return static_cast<ActionId>(i);
  throw std::out_of_range("unknown action name '" + name + "'");
}

ActionId reverse_direction(ActionId a) {
  using namespace gridpac_action;
  switch (a) {
  case up:
    return down;
  case down:
    return up;
  case left:
    return right;
  case right:
    return left;
  default:
    return a;
  }
}

} // namespace rlcf
