#include "rlcf/env/gridpac.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "rlcf/core/error.hpp"

namespace rlcf {

using namespace gridpac_action;

Cell neighbor(Cell c, ActionId action) {
  switch (action) {
  case up:
    return {c.row - 1, c.col};
  case down:
    return {c.row + 1, c.col};
  case left:
    return {c.row, c.col - 1};
  case right:
    return {c.row, c.col + 1};
  default:
    return c;
  }
}

GridPac::GridPac(EnvConfig config)
    : config_(std::move(config)),
      profile_(RewardProfile::by_name(config_.reward_profile)),
      actions_(ActionSpace::gridpac()) {
  config_.validate();
  const int R = config_.rows(), C = config_.cols();
  walls_.assign(static_cast<std::size_t>(R * C), 0);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const char ch = config_.maze[r][c];
      walls_[r * C + c] = ch == '#';
      if (ch == 'P')
        player_start_ = {r, c};
      if (ch == 'G')
        ghost_homes_.push_back({r, c});
    }

  const int N = R * C;
  dist_.assign(static_cast<std::size_t>(N) * N, std::numeric_limits<int>::max());
  for (int s = 0; s < N; ++s) {
    if (walls_[s])
      continue;
    std::queue<int> q;
    q.push(s);
    dist_[s * N + s] = 0;
    while (!q.empty()) {
      const int cell = q.front();
      q.pop();
      for (ActionId a = up; a <= right; ++a) {
        const Cell n = neighbor({cell / C, cell % C}, a);
        const int id = n.row * C + n.col;
        if (!walls_[id] && dist_[s * N + id] == std::numeric_limits<int>::max()) {
          dist_[s * N + id] = dist_[s * N + cell] + 1;
          q.push(id);
        }
      }
    }
  }
}

bool GridPac::wall(Cell c) const {
  return walls_[static_cast<std::size_t>(c.row) * config_.cols() + c.col] != 0;
}

int GridPac::distance(Cell a, Cell b) const {
  const int C = config_.cols();
  const int N = config_.rows() * C;
  return dist_[static_cast<std::size_t>(a.row * C + a.col) * N + b.row * C + b.col];
}

void GridPac::build_world() {
  const int R = config_.rows(), C = config_.cols();
  items_.assign(static_cast<std::size_t>(R * C), Tile::empty);
  pills_left_ = 0;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const char ch = config_.maze[r][c];
      if (ch == '.')
        items_[r * C + c] = Tile::pill;
      else if (ch == 'o')
        items_[r * C + c] = Tile::power_pill;
      pills_left_ += ch == '.' || ch == 'o';
    }
  player_ = player_start_;
  ghosts_.clear();
  for (const Cell &home : ghost_homes_)
    ghosts_.push_back({home, home, noop, false});
  power_timer_ = 0;
  tick_ = 0;
  power_pills_eaten_ = 0;
  done_ = false;
  events_ = {};
}

StateImage GridPac::reset(std::uint64_t seed, int noop_max) {
  if (noop_max < 0)
    throw ConfigError("noop_max", "must be >= 0");
  rng_ = Rng(seed);
  ++episode_;
  // A ghost may catch the idle player during the no-op phase; redraw then.
  for (int attempt = 0;; ++attempt) {
    noops_at_reset_ = static_cast<int>(rng_.uniform_int(0, noop_max));
    build_world();
    history_.clear();
    render_tick();
    for (int i = 0; i < noops_at_reset_ && !done_; ++i)
      advance(noop);
    if (!done_)
      break;
    if (attempt == 64)
      throw StateError("reset: no-op phase keeps ending the episode");
  }
  events_ = {};
  return image_;
}

StepResult GridPac::step(ActionId action) {
  if (done_)
    throw StateError("step called on a finished episode; call reset first");
  if (!actions_.contains(action))
    throw std::out_of_range("action " + std::to_string(action) +
                            " outside the GridPac action space");
  StepResult result;
  if (rendering_)
    result.transition.state = history_.observation();
  result.transition.action = action;
  advance(action);
  result.transition.reward = profile_.reward(events_);
  if (rendering_)
    result.transition.next_state = history_.observation();
  result.transition.done = done_;
  result.image = image_;
  return result;
}

void GridPac::advance(ActionId action) {
  events_ = {};
  ++tick_;
  const Cell player_before = player_;
  const Cell target = neighbor(player_, action);
  if (!wall(target))
    player_ = target;
  resolve_collisions(player_before, {});

  if (!events_.died) {
    const int C = config_.cols();
    Tile &item = items_[static_cast<std::size_t>(player_.row) * C + player_.col];
    if (item == Tile::pill) {
      ++events_.pills;
      --pills_left_;
    } else if (item == Tile::power_pill) {
      ++events_.power_pills;
      ++power_pills_eaten_;
      --pills_left_;
      power_timer_ = config_.power_duration;
      for (Ghost &g : ghosts_)
        g.frightened = true;
    }
    item = Tile::empty;
  }

  if (!events_.died && tick_ % config_.ghost_period == 0) {
    std::vector<Cell> before;
    for (const Ghost &g : ghosts_)
      before.push_back(g.pos);
    move_ghosts();
    resolve_collisions(player_before, before);
  }

  if (power_timer_ > 0 && --power_timer_ == 0)
    for (Ghost &g : ghosts_)
      g.frightened = false;

  events_.cleared = !events_.died && pills_left_ == 0;
  done_ = events_.died || events_.cleared || tick_ >= config_.max_steps;
  render_tick();
}

void GridPac::move_ghosts() {
  for (Ghost &g : ghosts_) {
    std::vector<ActionId> options;
    for (ActionId a = up; a <= right; ++a)
      if (!wall(neighbor(g.pos, a)))
        options.push_back(a);
    if (options.size() > 1 && g.heading != noop)
      std::erase(options, reverse_direction(g.heading));
    ActionId choice = options.front();
    if (rng_.bernoulli(config_.ghost_chase_prob)) {
      int best = g.frightened ? -1 : std::numeric_limits<int>::max();
      for (ActionId a : options) {
        const int d = distance(neighbor(g.pos, a), player_);
        if (g.frightened ? d > best : d < best) {
          best = d;
          choice = a;
        }
      }
    } else {
      choice = options[rng_.uniform_index(options.size())];
    }
    g.pos = neighbor(g.pos, choice);
    g.heading = choice;
  }
}

void GridPac::resolve_collisions(Cell player_before,
                                 const std::vector<Cell> &ghosts_before) {
  for (std::size_t i = 0; i < ghosts_.size(); ++i) {
    Ghost &g = ghosts_[i];
    const bool same = g.pos == player_;
    const bool swapped = !ghosts_before.empty() && g.pos == player_before &&
                         ghosts_before[i] == player_;
    if (!same && !swapped)
      continue;
    if (g.frightened) {
      ++events_.ghosts_eaten;
      g.pos = g.home;
      g.heading = noop;
      g.frightened = false;
    } else {
      events_.died = true;
    }
  }
}

TileGrid GridPac::tile_grid() const {
  const int R = config_.rows(), C = config_.cols();
  TileGrid grid{R, C, std::vector<Tile>(static_cast<std::size_t>(R * C))};
  for (int i = 0; i < R * C; ++i)
    grid.tiles[i] = walls_[i] ? Tile::wall : items_[i];
  for (const Ghost &g : ghosts_)
    grid.tiles[g.pos.row * C + g.pos.col] =
        g.frightened ? Tile::frightened_ghost : Tile::ghost;
  grid.tiles[player_.row * C + player_.col] = Tile::player;
  return grid;
}

std::vector<ActionId> GridPac::open_directions() const {
  std::vector<ActionId> open;
  for (ActionId a = up; a <= right; ++a)
    if (!wall(neighbor(player_, a)))
      open.push_back(a);
  return open;
}

Image GridPac::render_tiles(const TileGrid &grid, const EnvConfig &config) {
  const int t = config.tile_px;
  Image img(grid.rows * t, grid.cols * t);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      const Rgb &color = config.palette[grid.at(r, c)];
      for (int y = r * t; y < (r + 1) * t; ++y)
        for (int x = c * t; x < (c + 1) * t; ++x)
          for (int ch = 0; ch < 3; ++ch)
            img.at(y, x, ch) = color[ch];
    }
  return img;
}

RawFrame GridPac::render_raw(bool ghosts_visible, std::uint64_t index) const {
  TileGrid grid = tile_grid();
  if (!ghosts_visible) {
    const int C = config_.cols();
    for (const Ghost &g : ghosts_) {
      const int id = g.pos.row * C + g.pos.col;
      if (grid.tiles[id] != Tile::player)
        grid.tiles[id] = items_[id];
    }
  }
  return {render_tiles(grid, config_), index};
}

void GridPac::render_tick() {
  if (!rendering_)
    return;
  // Which of the two sub-frames shows the ghosts alternates per tick.
  const auto visible = [&](std::uint64_t i) { return (i + tick_) % 2 == 0; };
  raw_prev_ = render_raw(visible(raw_index_), raw_index_);
  raw_curr_ = render_raw(visible(raw_index_ + 1), raw_index_ + 1);
  raw_index_ += 2;
  const CropRect cr = config_.resolved_crop();
  image_.pixels = crop(deflicker(raw_curr_.pixels, raw_prev_.pixels), cr.x,
                       cr.y, cr.width, cr.height);
  image_.env_id = config_.env_id;
  image_.episode = episode_;
  image_.step = tick_;
  history_.push(preprocess(image_.pixels, config_.obs_height, config_.obs_width));
}

} // namespace rlcf
