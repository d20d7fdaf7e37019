#pragma once

#include <string>
#include <vector>

namespace rlcf {

using ActionId = int;

// Ordered discrete actions; ids are 0..size()-1.
class ActionSpace {
public:
  ActionSpace() = default;
  explicit ActionSpace(std::vector<std::string> names);

  // {Do nothing, Up, Down, Left, Right}
  static ActionSpace gridpac();

  int size() const noexcept { return static_cast<int>(names_.size()); }
  bool contains(ActionId a) const noexcept { return a >= 0 && a < size(); }
  const std::string &name(ActionId a) const;
  ActionId id_of(const std::string &name) const;
  const std::vector<std::string> &names() const noexcept { return names_; }

  friend bool operator==(const ActionSpace &, const ActionSpace &) = default;

private:
  std::vector<std::string> names_;
};

namespace gridpac_action {
inline constexpr ActionId noop = 0;
inline constexpr ActionId up = 1;
inline constexpr ActionId down = 2;
inline constexpr ActionId left = 3;
inline constexpr ActionId right = 4;
} // namespace gridpac_action

// Opposite movement direction; noop has none and maps to itself.
ActionId reverse_direction(ActionId a);

} // namespace rlcf
