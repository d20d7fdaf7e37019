#include "rlcf/env/env_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "rlcf/agent/reward_profile.hpp"
#include "rlcf/core/error.hpp"

namespace rlcf {

const char *tile_name(Tile t) {
  switch (t) {
  case Tile::empty:
    return "empty";
  case Tile::wall:
    return "wall";
  case Tile::pill:
    return "pill";
  case Tile::power_pill:
    return "power_pill";
  case Tile::ghost:
    return "ghost";
  case Tile::frightened_ghost:
    return "frightened_ghost";
  case Tile::player:
    return "player";
  }
  return "?";
}

double Palette::luminance(Tile t) const {
  const auto &c = (*this)[t];
  return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
}

EnvConfig EnvConfig::gridpac_default() {
  EnvConfig c;
  c.maze = {
      "#############",
      "#o.........o#",
      "#.##.#.#.##.#",
      "#.#.......#.#",
      "#...##.##...#",
      "#.#.......#.#",
      "#...#G.G#...#",
      "#.#.......#.#",
      "#...##.##...#",
      "#.#.......#.#",
      "#.##.#.#.##.#",
      "#o....P....o#",
      "#############",
  };
  return c;
}

CropRect EnvConfig::resolved_crop() const {
  CropRect r = crop;
  if (r.width == 0)
    r.width = raw_width() - r.x;
  if (r.height == 0)
    r.height = raw_height() - r.y;
  return r;
}

void EnvConfig::validate() const {
  if (env_id.empty())
    throw ConfigError("env_id", "must be non-empty");
  if (maze.size() < 3)
    throw ConfigError("maze", "needs at least 3 rows");
  const std::size_t w = maze[0].size();
  if (w < 3)
    throw ConfigError("maze", "needs at least 3 columns");
  int players = 0, ghosts = 0, pills = 0;
  for (std::size_t r = 0; r < maze.size(); ++r) {
    if (maze[r].size() != w)
      throw ConfigError("maze", "row " + std::to_string(r) +
                                    " has a different width");
    for (std::size_t c = 0; c < w; ++c) {
      const char ch = maze[r][c];
      if (std::string_view("#.o PG").find(ch) == std::string_view::npos)
        throw ConfigError("maze", std::string("unknown tile character '") +
                                      ch + "'");
      const bool border = r == 0 || c == 0 || r + 1 == maze.size() || c + 1 == w;
      if (border && ch != '#')
        throw ConfigError("maze", "border must be walls");
      players += ch == 'P';
      ghosts += ch == 'G';
      pills += ch == '.' || ch == 'o';
    }
  }
  if (players != 1)
    throw ConfigError("maze", "exactly one player start 'P' required");
  if (ghosts < 1)
    throw ConfigError("maze", "at least one ghost start 'G' required");
  if (pills < 1)
    throw ConfigError("maze", "at least one pill required");

  // every floor tile reachable from the player start
  const int R = rows(), C = cols();
  std::vector<char> seen(static_cast<std::size_t>(R * C), 0);
  std::queue<int> q;
  int floor = 0;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      if (maze[r][c] != '#')
        ++floor;
      if (maze[r][c] == 'P') {
        q.push(r * C + c);
        seen[r * C + c] = 1;
      }
    }
  int reached = 0;
  while (!q.empty()) {
    const int cell = q.front();
    q.pop();
    ++reached;
    const int r = cell / C, c = cell % C;
    const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
    for (const auto &n : nbr) {
      const int id = n[0] * C + n[1];
      if (maze[n[0]][n[1]] != '#' && !seen[id]) {
        seen[id] = 1;
        q.push(id);
      }
    }
  }
  if (reached != floor)
    throw ConfigError("maze", "all floor tiles must be connected");

  RewardProfile::by_name(reward_profile);

  if (tile_px < 1)
    throw ConfigError("tile_px", "must be >= 1");
  if (noop_max < 0)
    throw ConfigError("noop_max", "must be >= 0");
  if (max_steps < 1)
    throw ConfigError("max_steps", "must be >= 1");
  if (power_duration < 1)
    throw ConfigError("power_duration", "must be >= 1");
  if (ghost_period < 1)
    throw ConfigError("ghost_period", "must be >= 1");
  if (!(ghost_chase_prob >= 0.0 && ghost_chase_prob <= 1.0))
    throw ConfigError("ghost_chase_prob", "must be in [0,1]");
  if (ghost_radius < 1)
    throw ConfigError("ghost_radius", "must be >= 1");

  const CropRect cr = resolved_crop();
  if (cr.x < 0 || cr.y < 0 || cr.width <= 0 || cr.height <= 0 ||
      cr.x + cr.width > raw_width() || cr.y + cr.height > raw_height())
    throw ConfigError("crop", "rectangle must lie inside the raw frame");
  if (obs_height < 1 || obs_height > cr.height)
    throw ConfigError("obs_height", "must be in [1, crop height]");
  if (obs_width < 1 || obs_width > cr.width)
    throw ConfigError("obs_width", "must be in [1, crop width]");

  std::vector<double> lum;
  for (int t = 0; t < tile_kinds; ++t)
    lum.push_back(palette.luminance(static_cast<Tile>(t)));
  std::sort(lum.begin(), lum.end());
  for (std::size_t i = 1; i < lum.size(); ++i)
    if (lum[i] - lum[i - 1] < 16.0)
      throw ConfigError("palette",
                        "tile luminances must be at least 16 levels apart");
  for (Tile g : {Tile::ghost, Tile::frightened_ghost})
    for (Tile under : {Tile::empty, Tile::pill, Tile::power_pill})
      for (int ch = 0; ch < 3; ++ch)
        if (palette[g][ch] < palette[under][ch])
          throw ConfigError("palette", std::string(tile_name(g)) +
                                           " color must dominate " +
                                           tile_name(under));
}

namespace {

nlohmann::json rgb_json(const Rgb &c) { return {c[0], c[1], c[2]}; }

Rgb rgb_from(const nlohmann::json &j, const std::string &field) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(field, "expected [r,g,b]");
  Rgb c{};
  for (int i = 0; i < 3; ++i) {
    const int v = j[i].get<int>();
    if (v < 0 || v > 255)
      throw ConfigError(field, "channel outside [0,255]");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

template <typename T>
void read_opt(const nlohmann::json &j, const char *key, T &out) {
  if (!j.contains(key))
    return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(key, e.what());
  }
}

} // namespace

nlohmann::json to_json(const EnvConfig &c) {
  nlohmann::json palette;
  for (int t = 0; t < tile_kinds; ++t)
    palette[tile_name(static_cast<Tile>(t))] = rgb_json(c.palette.colors[t]);
  return {
      {"env_id", c.env_id},
      {"maze", c.maze},
      {"reward_profile", c.reward_profile},
      {"palette", palette},
      {"crop",
       {{"x", c.crop.x},
        {"y", c.crop.y},
        {"width", c.crop.width},
        {"height", c.crop.height}}},
      {"noop_max", c.noop_max},
      {"tile_px", c.tile_px},
      {"max_steps", c.max_steps},
      {"power_duration", c.power_duration},
      {"ghost_period", c.ghost_period},
      {"ghost_chase_prob", c.ghost_chase_prob},
      {"ghost_radius", c.ghost_radius},
      {"obs_height", c.obs_height},
      {"obs_width", c.obs_width},
  };
}

EnvConfig env_config_from_json(const nlohmann::json &j) {
  if (!j.is_object())
    throw ConfigError("env_config", "expected a JSON object");
  EnvConfig c = EnvConfig::gridpac_default();
  read_opt(j, "env_id", c.env_id);
  read_opt(j, "maze", c.maze);
  read_opt(j, "reward_profile", c.reward_profile);
  if (j.contains("palette")) {
    const auto &p = j.at("palette");
    if (!p.is_object())
      throw ConfigError("palette", "expected an object");
    for (int t = 0; t < tile_kinds; ++t) {
      const char *name = tile_name(static_cast<Tile>(t));
      if (p.contains(name))
        c.palette.colors[t] = rgb_from(p.at(name), std::string("palette.") + name);
    }
  }
  if (j.contains("crop")) {
    const auto &cr = j.at("crop");
    if (!cr.is_object())
      throw ConfigError("crop", "expected an object");
    read_opt(cr, "x", c.crop.x);
    read_opt(cr, "y", c.crop.y);
    read_opt(cr, "width", c.crop.width);
    read_opt(cr, "height", c.crop.height);
  }
  read_opt(j, "noop_max", c.noop_max);
  read_opt(j, "tile_px", c.tile_px);
  read_opt(j, "max_steps", c.max_steps);
  read_opt(j, "power_duration", c.power_duration);
  read_opt(j, "ghost_period", c.ghost_period);
  read_opt(j, "ghost_chase_prob", c.ghost_chase_prob);
  read_opt(j, "ghost_radius", c.ghost_radius);
  read_opt(j, "obs_height", c.obs_height);
  read_opt(j, "obs_width", c.obs_width);
  c.validate();
  return c;
}

EnvConfig load_env_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("env_config", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("env_config", e.what());
  }
  return env_config_from_json(j);
}

void save_env_config(const std::string &path, const EnvConfig &config) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << to_json(config).dump(2) << "\n";
}

} // namespace rlcf
