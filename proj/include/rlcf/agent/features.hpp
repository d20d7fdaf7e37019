#pragma once

#include <vector>

#include "rlcf/env/env_config.hpp"
#include "rlcf/env/gridpac.hpp"
#include "rlcf/env/preprocess.hpp"

namespace rlcf {

inline constexpr int kFeatureEncodingVersion = 1;

// Compact GridPac state used by the toy agents. Directions use action ids
// (0 = none, 1..4 = up/down/left/right) and name the first step of a
// shortest path from the player.
struct FeatureState {
  int player_cell = -1; // row * cols + col; -1 when no player is visible
  int ghost_dir = 0;    // nearest ghost within ghost_radius
  int pill_dir = 0;     // nearest pill or power pill
  bool power = false;   // a frightened ghost is visible
  friend bool operator==(const FeatureState &, const FeatureState &) = default;
};

// Fixed decoder from pixels to tile classes and features. Works on the
// agent's preprocessed grayscale frames and on RGB state images.
class FeatureEncoder {
public:
  explicit FeatureEncoder(EnvConfig config);

  const EnvConfig &config() const noexcept { return config_; }

  // Nearest palette luminance per tile, averaged over observation pixels
  // lying entirely inside the tile.
  TileGrid decode(const GrayFrame &frame) const;
  // Nearest palette color per tile (mean over the tile's pixels).
  TileGrid decode_rgb(const Image &state) const;

  FeatureState features(const TileGrid &grid) const;

  int num_states() const noexcept { return num_states_; }
  int index(const FeatureState &f) const;
  int encode(const AgentObservation &obs) const {
    return index(features(decode(obs.newest())));
  }

private:
  EnvConfig config_;
  int num_states_ = 0;
  // per tile: observation pixel indices to average, empty = outside crop
  std::vector<std::vector<int>> tile_taps_;
  std::vector<double> levels_; // palette luminance / 255
};

} // namespace rlcf
