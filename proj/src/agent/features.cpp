#include "rlcf/agent/features.hpp"

#include <cmath>
#include <limits>
#include <queue>

#include "rlcf/core/error.hpp"

namespace rlcf {

FeatureEncoder::FeatureEncoder(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  const int R = config_.rows(), C = config_.cols();
  num_states_ = R * C * 5 * 5 * 2 + 1;
  for (int t = 0; t < tile_kinds; ++t)
    levels_.push_back(config_.palette.luminance(static_cast<Tile>(t)) / 255.0);

  const CropRect cr = config_.resolved_crop();
  const double sy = static_cast<double>(cr.height) / config_.obs_height;
  const double sx = static_cast<double>(cr.width) / config_.obs_width;
  const int tp = config_.tile_px;
  tile_taps_.resize(static_cast<std::size_t>(R * C));
  // obs pixel range fully inside [lo, hi) along one axis
  const auto inside = [](double lo, double hi, double scale, int n) {
    int first = static_cast<int>(std::ceil(lo / scale - 1e-9));
    int last = static_cast<int>(std::floor(hi / scale + 1e-9)) - 1;
    if (first > last) // tile thinner than one obs pixel: use its center
      first = last = static_cast<int>(((lo + hi) / 2.0) / scale);
    return std::pair{std::max(first, 0), std::min(last, n - 1)};
  };
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const double y0 = r * tp - cr.y, y1 = y0 + tp;
      const double x0 = c * tp - cr.x, x1 = x0 + tp;
      if (y0 < 0 || x0 < 0 || y1 > cr.height || x1 > cr.width)
        continue;
      const auto [fy, ly] = inside(y0, y1, sy, config_.obs_height);
      const auto [fx, lx] = inside(x0, x1, sx, config_.obs_width);
      auto &taps = tile_taps_[r * C + c];
      for (int y = fy; y <= ly; ++y)
        for (int x = fx; x <= lx; ++x)
          taps.push_back(y * config_.obs_width + x);
    }
}

TileGrid FeatureEncoder::decode(const GrayFrame &frame) const {
  if (frame.height != config_.obs_height || frame.width != config_.obs_width)
    throw ShapeError("decode: observation frame has the wrong resolution");
  const int R = config_.rows(), C = config_.cols();
  TileGrid grid{R, C, std::vector<Tile>(static_cast<std::size_t>(R * C))};
  for (int i = 0; i < R * C; ++i) {
    const auto &taps = tile_taps_[i];
    if (taps.empty()) {
      grid.tiles[i] = Tile::wall;
      continue;
    }
    double mean = 0.0;
    for (int idx : taps)
      mean += frame.values[idx];
    mean /= static_cast<double>(taps.size());
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (int t = 0; t < tile_kinds; ++t) {
      const double d = std::abs(mean - levels_[t]);
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    grid.tiles[i] = static_cast<Tile>(best);
  }
  return grid;
}

TileGrid FeatureEncoder::decode_rgb(const Image &state) const {
  const CropRect cr = config_.resolved_crop();
  if (state.height != cr.height || state.width != cr.width)
    throw ShapeError("decode_rgb: state image has the wrong resolution");
  const int R = config_.rows(), C = config_.cols(), tp = config_.tile_px;
  TileGrid grid{R, C, std::vector<Tile>(static_cast<std::size_t>(R * C))};
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const int y0 = r * tp - cr.y, x0 = c * tp - cr.x;
      if (y0 < 0 || x0 < 0 || y0 + tp > cr.height || x0 + tp > cr.width) {
        grid.tiles[r * C + c] = Tile::wall;
        continue;
      }
      double mean[3] = {0, 0, 0};
      for (int y = y0; y < y0 + tp; ++y)
        for (int x = x0; x < x0 + tp; ++x)
          for (int ch = 0; ch < 3; ++ch)
            mean[ch] += state.at(y, x, ch);
      int best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (int t = 0; t < tile_kinds; ++t) {
        double d = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          const double diff = mean[ch] / (tp * tp) - config_.palette.colors[t][ch];
          d += diff * diff;
        }
        if (d < best_d) {
          best_d = d;
          best = t;
        }
      }
      grid.tiles[r * C + c] = static_cast<Tile>(best);
    }
  return grid;
}

FeatureState FeatureEncoder::features(const TileGrid &grid) const {
  FeatureState f;
  const int R = grid.rows, C = grid.cols;
  for (int i = 0; i < R * C; ++i) {
    if (grid.tiles[i] == Tile::player && f.player_cell < 0)
      f.player_cell = i;
    if (grid.tiles[i] == Tile::frightened_ghost)
      f.power = true;
  }
  if (f.player_cell < 0)
    return f;

  // BFS from the player; first_dir[cell] = first step taken to reach it.
  std::vector<int> dist(static_cast<std::size_t>(R * C), -1);
  std::vector<int> first_dir(static_cast<std::size_t>(R * C), 0);
  std::queue<int> q;
  dist[f.player_cell] = 0;
  q.push(f.player_cell);
  bool ghost_found = false, pill_found = false;
  while (!q.empty() && !(ghost_found && pill_found)) {
    const int cell = q.front();
    q.pop();
    const Tile t = grid.tiles[cell];
    if (cell != f.player_cell) {
      if (!ghost_found && (t == Tile::ghost || t == Tile::frightened_ghost)) {
        ghost_found = true;
        if (dist[cell] <= config_.ghost_radius)
          f.ghost_dir = first_dir[cell];
      }
      if (!pill_found && (t == Tile::pill || t == Tile::power_pill)) {
        pill_found = true;
        f.pill_dir = first_dir[cell];
      }
    }
    for (ActionId a = gridpac_action::up; a <= gridpac_action::right; ++a) {
      const Cell n = neighbor({cell / C, cell % C}, a);
      if (n.row < 0 || n.col < 0 || n.row >= R || n.col >= C)
        continue;
      const int id = n.row * C + n.col;
      if (dist[id] >= 0 || grid.tiles[id] == Tile::wall)
        continue;
      dist[id] = dist[cell] + 1;
      first_dir[id] = cell == f.player_cell ? a : first_dir[cell];
      q.push(id);
    }
  }
  return f;
}

int FeatureEncoder::index(const FeatureState &f) const {
  if (f.player_cell < 0)
    return num_states_ - 1;
  return ((f.player_cell * 5 + f.ghost_dir) * 5 + f.pill_dir) * 2 +
         (f.power ? 1 : 0);
}

} // namespace rlcf
