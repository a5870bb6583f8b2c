#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace apart {

// Linear cell index, y * width + x. x grows rightward, y grows upward.
using Cell = int;

enum class Action : int { Stay = 0, Left = 1, Right = 2, Up = 3, Down = 4 };

inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Stay, Action::Left, Action::Right, Action::Up, Action::Down};

std::string_view action_name(Action a);

enum class EnvName { FourRooms, Empty, UMaze };

EnvName parse_env_name(std::string_view name);
std::string_view env_name_str(EnvName name);

// Dense observation vector. Every encoding produced here is one-hot or
// two-hot; the training code uses the active indices directly.
using Observation = std::vector<double>;

enum class ObsEncoding { Concat, Outer };

ObsEncoding parse_obs_encoding(std::string_view name);
std::string_view obs_encoding_str(ObsEncoding mode);

// Deterministic tabular grid MDP. Immutable after construction.
class GridEnv {
 public:
  GridEnv(int width, int height, std::vector<bool> walls, Cell start,
          int horizon);

  int width() const { return width_; }
  int height() const { return height_; }
  int horizon() const { return horizon_; }
  Cell start() const { return start_; }
  int num_cells() const { return width_ * height_; }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }
  Cell cell_at(int x, int y) const { return y * width_ + x; }
  int x_of(Cell c) const { return c % width_; }
  int y_of(Cell c) const { return c / width_; }

  bool is_wall(Cell c) const { return walls_.at(c); }
  bool is_free(Cell c) const {
    return c >= 0 && c < num_cells() && !walls_[c];
  }

  // Free cells in increasing cell-index order.
  const std::vector<Cell>& free_states() const { return free_states_; }
  int num_free() const { return static_cast<int>(free_states_.size()); }

  // Position of `c` within free_states(); throws if `c` is a wall.
  int free_index(Cell c) const;

  // Adjacent cell in direction `a` if it is free, otherwise `s`.
  Cell step(Cell s, Action a) const;

  // Same grid with a different episode length.
  GridEnv with_horizon(int horizon) const;

  // Rows printed top (largest y) to bottom. '#' wall, '.' free, 'S' start.
  std::string ascii() const;

 private:
  int width_;
  int height_;
  std::vector<bool> walls_;
  Cell start_;
  int horizon_;
  std::vector<Cell> free_states_;
  std::vector<int> free_index_;
};

GridEnv build_env(EnvName name, int horizon = 40);

// Open width x height grid with no walls.
GridEnv make_open_grid(int width, int height, Cell start, int horizon);

// Shortest-path step counts from start; -1 for walls.
std::vector<int> bfs_distances(const GridEnv& env, Cell from);

Observation encode_disc_obs(const GridEnv& env, Cell s);

Observation encode_rl_obs(const GridEnv& env, Cell s, int z, int num_latents,
                          ObsEncoding mode);

int rl_obs_size(const GridEnv& env, int num_latents, ObsEncoding mode);

// Indices of the ones in encode_rl_obs; one entry for Outer, two for Concat.
struct HotIndices {
  std::array<int, 2> index{};
  int count = 0;
};

HotIndices rl_obs_indices(const GridEnv& env, Cell s, int z, int num_latents,
                          ObsEncoding mode);

}  // namespace apart
