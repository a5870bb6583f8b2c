#include "apart/gridworld.hpp"

#include <deque>
#include <stdexcept>
#include <string>

namespace apart {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Stay: return "stay";
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::Up: return "up";
    case Action::Down: return "down";
  }
  return "?";
}

EnvName parse_env_name(std::string_view name) {
  if (name == "rooms" || name == "four_rooms") return EnvName::FourRooms;
  if (name == "empty") return EnvName::Empty;
  if (name == "umaze" || name == "u_maze") return EnvName::UMaze;
  throw std::invalid_argument("unknown environment '" + std::string(name) +
                              "' (expected rooms, empty or umaze)");
}

std::string_view env_name_str(EnvName name) {
  switch (name) {
    case EnvName::FourRooms: return "rooms";
    case EnvName::Empty: return "empty";
    case EnvName::UMaze: return "umaze";
  }
  return "?";
}

ObsEncoding parse_obs_encoding(std::string_view name) {
  if (name == "concat") return ObsEncoding::Concat;
  if (name == "outer") return ObsEncoding::Outer;
  throw std::invalid_argument("unknown observation encoding '" +
                              std::string(name) + "' (expected concat or outer)");
}

std::string_view obs_encoding_str(ObsEncoding mode) {
  return mode == ObsEncoding::Concat ? "concat" : "outer";
}

GridEnv::GridEnv(int width, int height, std::vector<bool> walls, Cell start,
                 int horizon)
    : width_(width),
      height_(height),
      walls_(std::move(walls)),
      start_(start),
      horizon_(horizon) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (static_cast<int>(walls_.size()) != width * height) {
    throw std::invalid_argument("wall mask size does not match grid");
  }
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (!is_free(start)) throw std::invalid_argument("start cell is a wall");

  free_index_.assign(walls_.size(), -1);
  for (Cell c = 0; c < num_cells(); ++c) {
    if (!walls_[c]) {
      free_index_[c] = static_cast<int>(free_states_.size());
      free_states_.push_back(c);
    }
  }
}

int GridEnv::free_index(Cell c) const {
  if (!is_free(c)) {
    throw std::logic_error("cell " + std::to_string(c) + " is not a free state");
  }
  return free_index_[c];
}

Cell GridEnv::step(Cell s, Action a) const {
  if (!is_free(s)) {
    throw std::logic_error("step from non-free cell " + std::to_string(s));
  }
  int x = x_of(s);
  int y = y_of(s);
  switch (a) {
    case Action::Stay: return s;
    case Action::Left: --x; break;
    case Action::Right: ++x; break;
    case Action::Up: ++y; break;
    case Action::Down: --y; break;
  }
  if (!in_bounds(x, y)) return s;
  const Cell next = cell_at(x, y);
  return walls_[next] ? s : next;
}

GridEnv GridEnv::with_horizon(int horizon) const {
  return GridEnv(width_, height_, walls_, start_, horizon);
}

std::string GridEnv::ascii() const {
  std::string out;
  out.reserve(static_cast<size_t>((width_ + 1) * height_));
  for (int y = height_ - 1; y >= 0; --y) {
    for (int x = 0; x < width_; ++x) {
      const Cell c = cell_at(x, y);
      out += c == start_ ? 'S' : (walls_[c] ? '#' : '.');
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<bool> four_rooms_walls() {
  std::vector<bool> walls(100, false);
  for (int i = 0; i < 10; ++i) {
    walls[i * 10 + 5] = true;  // x = 5
    walls[5 * 10 + i] = true;  // y = 5
  }
  // One doorway in the middle of each wall arm.
  walls[2 * 10 + 5] = false;
  walls[7 * 10 + 5] = false;
  walls[5 * 10 + 2] = false;
  walls[5 * 10 + 7] = false;
  return walls;
}

std::vector<bool> u_maze_walls() {
  // Three-wide corridor: up the left, along the bottom, up the right.
  std::vector<bool> walls(100, false);
  for (int y = 3; y < 10; ++y) {
    for (int x = 3; x < 7; ++x) walls[y * 10 + x] = true;
  }
  return walls;
}

}  // namespace

GridEnv build_env(EnvName name, int horizon) {
  switch (name) {
    case EnvName::FourRooms:
      return GridEnv(10, 10, four_rooms_walls(), 1 * 10 + 1, horizon);
    case EnvName::Empty:
      return GridEnv(10, 10, std::vector<bool>(100, false), 5 * 10 + 5,
                     horizon);
    case EnvName::UMaze:
      return GridEnv(10, 10, u_maze_walls(), 1 * 10 + 1, horizon);
  }
  throw std::invalid_argument("unknown environment");
}

GridEnv make_open_grid(int width, int height, Cell start, int horizon) {
  return GridEnv(width, height,
                 std::vector<bool>(static_cast<size_t>(width * height), false),
                 start, horizon);
}

std::vector<int> bfs_distances(const GridEnv& env, Cell from) {
  std::vector<int> dist(static_cast<size_t>(env.num_cells()), -1);
  std::deque<Cell> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (Action a : kAllActions) {
      const Cell n = env.step(c, a);
      if (dist[n] < 0) {
        dist[n] = dist[c] + 1;
        queue.push_back(n);
      }
    }
  }
  return dist;
}

Observation encode_disc_obs(const GridEnv& env, Cell s) {
  Observation obs(static_cast<size_t>(env.num_free()), 0.0);
  obs[env.free_index(s)] = 1.0;
  return obs;
}

int rl_obs_size(const GridEnv& env, int num_latents, ObsEncoding mode) {
  return mode == ObsEncoding::Concat ? env.num_free() + num_latents
                                     : env.num_free() * num_latents;
}

HotIndices rl_obs_indices(const GridEnv& env, Cell s, int z, int num_latents,
                          ObsEncoding mode) {
  if (z < 0 || z >= num_latents) {
    throw std::out_of_range("latent " + std::to_string(z) + " out of range");
  }
  const int si = env.free_index(s);
  HotIndices hot;
  if (mode == ObsEncoding::Concat) {
    hot.index = {si, env.num_free() + z};
    hot.count = 2;
  } else {
    hot.index = {si * num_latents + z, 0};
    hot.count = 1;
  }
  return hot;
}

Observation encode_rl_obs(const GridEnv& env, Cell s, int z, int num_latents,
                          ObsEncoding mode) {
  Observation obs(static_cast<size_t>(rl_obs_size(env, num_latents, mode)),
                  0.0);
  const HotIndices hot = rl_obs_indices(env, s, z, num_latents, mode);
  for (int k = 0; k < hot.count; ++k) obs[hot.index[k]] = 1.0;
  return obs;
}

}  // namespace apart
