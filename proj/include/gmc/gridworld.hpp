#ifndef GMC_GRIDWORLD_HPP_
#define GMC_GRIDWORLD_HPP_

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <vector>

#include "gmc/random.hpp"

namespace gmc {

// MiniGrid index tables (subset used by DoorKey).
enum class ObjectType : int { kEmpty = 1, kWall = 2, kDoor = 4, kKey = 5, kGoal = 8, kAgent = 10 };
enum class Color : int { kRed = 0, kGreen = 1, kYellow = 4, kGrey = 5 };
enum class DoorState : int { kOpen = 0, kClosed = 1, kLocked = 2 };

enum class GridAction : int { kLeft = 0, kRight = 1, kForward = 2, kPickup = 3, kDrop = 4, kToggle = 5, kDone = 6 };
inline constexpr int kNumGridActions = 7;
inline constexpr int kObsChannels = 4;

struct Tile {
  ObjectType type = ObjectType::kEmpty;
  Color color = Color::kRed;
  int state = 0;

  bool operator==(const Tile&) const = default;
};

struct Pos {
  int x = 0;
  int y = 0;

  bool operator==(const Pos&) const = default;
};

inline int manhattan(Pos a, Pos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

struct DoorKeyConfig {
  int size = 8;
  int max_steps = 0;  // 0 -> 10 * size * size
  bool door_noise = false;
  double noise_std = 1.0;

  void validate() const;
  int effective_max_steps() const { return max_steps > 0 ? max_steps : 10 * size * size; }
};

// size x size x 4, laid out [(y * size + x) * 4 + c]. Channels 0-2 hold the raw
// MiniGrid (object, color, state) indices; channel 3 is the door-noise channel.
struct Observation {
  int size = 0;
  std::vector<double> channels;

  double at(int x, int y, int c) const {
    return channels[static_cast<std::size_t>((y * size + x) * kObsChannels + c)];
  }
  // Per-channel scaling by the largest index value: object / 10, color / 5, state / 3.
  std::vector<double> normalized() const;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool reached_goal = false;
  int steps = 0;
};

// Fills channel 3 with iid N(0, std^2) over every tile when enabled and the agent
// is on or orthogonally next to the door; zeros it otherwise. Channels 0-2 are untouched.
void apply_door_noise(Observation& obs, Pos agent, Pos door, Rng& rng, bool enabled,
                      double noise_std = 1.0);

// Fully observable DoorKey. Layout generation mirrors MiniGrid's DoorKeyEnv:
// outer wall, a vertical wall at a random column with a locked yellow door,
// agent and key on the left, goal in the bottom-right corner.
class DoorKeyEnv {
 public:
  explicit DoorKeyEnv(DoorKeyConfig config = {});

  Observation reset(std::uint64_t seed);
  StepResult step(int action);

  const DoorKeyConfig& config() const { return config_; }
  int size() const { return config_.size; }
  int max_steps() const { return max_steps_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  bool carrying_key() const { return carrying_.has_value(); }
  Pos agent_pos() const { return agent_; }
  int agent_dir() const { return dir_; }
  Pos door_pos() const { return door_; }
  Pos goal_pos() const { return goal_; }
  int split_column() const { return split_; }
  std::optional<Pos> key_pos() const;
  const Tile& tile(Pos p) const { return grid_[index(p)]; }
  bool door_open() const;
  bool door_locked() const;

  // Observation of the current state, including door noise if configured.
  Observation observe();
  // Channels 0-2 only (channel 3 left at zero).
  Observation encode() const;

 private:
  std::size_t index(Pos p) const { return static_cast<std::size_t>(p.y * config_.size + p.x); }
  Pos front() const;
  Pos random_empty(Rng& rng, int x_end);

  DoorKeyConfig config_;
  int max_steps_;
  std::vector<Tile> grid_;
  Pos agent_;
  int dir_ = 0;  // 0 east, 1 south, 2 west, 3 north
  Pos door_;
  Pos goal_;
  int split_ = 0;
  std::optional<Tile> carrying_;
  int steps_ = 0;
  bool done_ = true;
  Rng noise_rng_;
};

// Shortest action sequence to the goal by BFS over (x, y, dir, has_key, door_open).
// Returns nullopt when the goal is unreachable.
std::optional<std::vector<int>> plan_to_goal(const DoorKeyEnv& env);

struct TrajectoryRecord {
  int step = 0;
  int action = 0;
  Pos agent;
  int dir = 0;
  double reward = 0.0;
  bool done = false;
};

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records);

}  // namespace gmc

#endif  // GMC_GRIDWORLD_HPP_
