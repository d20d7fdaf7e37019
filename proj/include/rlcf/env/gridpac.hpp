#pragma once

#include <cstdint>
#include <vector>

#include "rlcf/agent/reward_profile.hpp"
#include "rlcf/core/rng.hpp"
#include "rlcf/env/env_config.hpp"
#include "rlcf/env/environment.hpp"

namespace rlcf {

// Row-major tile classes, as they appear in a rendered frame.
struct TileGrid {
  int rows = 0;
  int cols = 0;
  std::vector<Tile> tiles;

  Tile at(int r, int c) const {
    return tiles[static_cast<std::size_t>(r) * cols + c];
  }
  friend bool operator==(const TileGrid &, const TileGrid &) = default;
};

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell &, const Cell &) = default;
};

// Cell reached by moving in `action`'s direction (noop stays).
Cell neighbor(Cell c, ActionId action);

// Desk-scale Pacman-like maze: one player, scripted ghosts, pills and power
// pills. Each tick renders two raw sub-frames; ghosts are drawn on even raw
// frames only, so the flicker countermeasure is needed to see them.
class GridPac final : public Environment {
public:
  explicit GridPac(EnvConfig config);

  StateImage reset(std::uint64_t seed, int noop_max) override;
  StepResult step(ActionId action) override;

  const ActionSpace &action_space() const override { return actions_; }
  AgentObservation observation() const override {
    return history_.observation();
  }
  const StateImage &state_image() const override { return image_; }
  bool done() const override { return done_; }

  const EnvConfig &config() const noexcept { return config_; }
  const RewardProfile &reward_profile() const noexcept { return profile_; }
  // Ground-truth tile classes of the current frame.
  TileGrid tile_grid() const;
  Cell player() const noexcept { return player_; }
  int tick() const noexcept { return tick_; }
  int noops_at_reset() const noexcept { return noops_at_reset_; }
  const StepEvents &last_events() const noexcept { return events_; }
  int power_pills_eaten() const noexcept { return power_pills_eaten_; }
  // Open movement directions around the player.
  std::vector<ActionId> open_directions() const;
  // The two raw frames of the most recent tick (previous, current).
  const RawFrame &previous_raw() const noexcept { return raw_prev_; }
  const RawFrame &current_raw() const noexcept { return raw_curr_; }

  // Skip pixel rendering (training on ground-truth tiles only). Observations
  // and state images are stale while disabled.
  void set_rendering(bool enabled) noexcept { rendering_ = enabled; }

  // Rasterizes a tile grid at tile_px resolution (uncropped).
  static Image render_tiles(const TileGrid &grid, const EnvConfig &config);

private:
  struct Ghost {
    Cell pos;
    Cell home;
    ActionId heading = gridpac_action::noop;
    bool frightened = false;
  };

  void build_world();
  void advance(ActionId action);
  void move_ghosts();
  void resolve_collisions(Cell player_before,
                          const std::vector<Cell> &ghosts_before);
  RawFrame render_raw(bool ghosts_visible, std::uint64_t index) const;
  void render_tick();
  bool wall(Cell c) const;
  int distance(Cell a, Cell b) const;

  EnvConfig config_;
  RewardProfile profile_;
  ActionSpace actions_;
  std::vector<char> walls_;
  std::vector<int> dist_; // all-pairs BFS distances between cells
  std::vector<Tile> items_; // pill / power_pill / empty per cell
  Cell player_start_;
  std::vector<Cell> ghost_homes_;

  Rng rng_;
  Cell player_;
  std::vector<Ghost> ghosts_;
  int power_timer_ = 0;
  int tick_ = 0;
  int pills_left_ = 0;
  int noops_at_reset_ = 0;
  int power_pills_eaten_ = 0;
  int episode_ = -1;
  bool done_ = true;
  bool rendering_ = true;
  StepEvents events_;
  std::uint64_t raw_index_ = 0;
  RawFrame raw_prev_;
  RawFrame raw_curr_;
  StateImage image_;
  FrameHistory history_;
};

} // namespace rlcf
