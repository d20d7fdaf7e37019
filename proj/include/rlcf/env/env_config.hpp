#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace rlcf {

using Rgb = std::array<std::uint8_t, 3>;

// Tile classes visible in a rendered GridPac frame.
enum class Tile : std::uint8_t {
  empty = 0,
  wall,
  pill,
  power_pill,
  ghost,
  frightened_ghost,
  player,
};
inline constexpr int tile_kinds = 7;

const char *tile_name(Tile t);

// One solid color per tile class. Ghost colors must dominate the pill colors
// channel-wise so the flicker max never mixes a ghost with what it covers, and
// grayscale luminances must stay separable for the agent-side decoder.
struct Palette {
  std::array<Rgb, tile_kinds> colors{{
      {0, 0, 0},       // empty
      {10, 10, 170},   // wall
      {110, 50, 10},   // pill
      {140, 90, 140},  // power pill
      {255, 90, 140},  // ghost
      {140, 200, 255}, // frightened ghost
      {255, 255, 0},   // player
  }};

  const Rgb &operator[](Tile t) const {
    return colors[static_cast<std::size_t>(t)];
  }
  double luminance(Tile t) const;
};

// Crop rectangle in raw-frame pixels.
struct CropRect {
  int x = 0;
  int y = 0;
  int width = 0; // 0 = full frame
  int height = 0;
};

struct EnvConfig {
  std::string env_id = "gridpac";
  // '#' wall, '.' pill, 'o' power pill, ' ' empty, 'P' player start,
  // 'G' ghost start (empty floor underneath).
  std::vector<std::string> maze;
  std::string reward_profile = "hunter";
  Palette palette;
  CropRect crop;
  int noop_max = 30;
  int tile_px = 4;
  int max_steps = 300;
  int power_duration = 20;
  // Ghosts move on ticks divisible by ghost_period.
  int ghost_period = 2;
  double ghost_chase_prob = 0.5;
  // Agent features only report ghosts within this BFS distance.
  int ghost_radius = 6;
  int obs_height = 32;
  int obs_width = 32;

  static EnvConfig gridpac_default();

  int rows() const { return static_cast<int>(maze.size()); }
  int cols() const { return maze.empty() ? 0 : static_cast<int>(maze[0].size()); }
  int raw_height() const { return rows() * tile_px; }
  int raw_width() const { return cols() * tile_px; }
  // Crop rectangle with 0-sized extents resolved to the full frame.
  CropRect resolved_crop() const;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

nlohmann::json to_json(const EnvConfig &config);
EnvConfig env_config_from_json(const nlohmann::json &j);
EnvConfig load_env_config(const std::string &path);
void save_env_config(const std::string &path, const EnvConfig &config);

} // namespace rlcf
