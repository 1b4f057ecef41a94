#include "gmc/gridworld.hpp"

#include <array>
#include <deque>
#include <string>

#include "gmc/errors.hpp"

namespace gmc {

namespace {

enum Stream : std::uint64_t { kLayout = 0, kNoise = 1 };

constexpr std::array<Pos, 4> kDirVec = {Pos{1, 0}, Pos{0, 1}, Pos{-1, 0}, Pos{0, -1}};

constexpr Tile kWallTile{ObjectType::kWall, Color::kGrey, 0};
constexpr Tile kEmptyTile{ObjectType::kEmpty, Color::kRed, 0};

bool passable(const Tile& t) {
  if (t.type == ObjectType::kEmpty || t.type == ObjectType::kGoal) return true;
  return t.type == ObjectType::kDoor && t.state == static_cast<int>(DoorState::kOpen);
}

}  // namespace

void DoorKeyConfig::validate() const {
  if (size < 5) throw std::invalid_argument("DoorKey size must be >= 5");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
}

std::vector<double> Observation::normalized() const {
  static constexpr std::array<double, 3> kScale = {10.0, 5.0, 3.0};
  std::vector<double> out(channels);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t c = i % kObsChannels;
    if (c < 3) out[i] /= kScale[c];
  }
  return out;
}

void apply_door_noise(Observation& obs, Pos agent, Pos door, Rng& rng, bool enabled,
                      double noise_std) {
  const bool trigger = enabled && manhattan(agent, door) <= 1;
  std::normal_distribution<double> dist(0.0, noise_std);
  for (std::size_t i = 3; i < obs.channels.size(); i += kObsChannels) {
    obs.channels[i] = trigger ? dist(rng) : 0.0;
  }
}

DoorKeyEnv::DoorKeyEnv(DoorKeyConfig config)
    : config_(config), max_steps_(config.effective_max_steps()) {
  config_.validate();
}

Pos DoorKeyEnv::random_empty(Rng& rng, int x_end) {
  const int n = config_.size;
  for (;;) {
    const Pos p{uniform_int(rng, 0, x_end), uniform_int(rng, 0, n)};
    if (grid_[index(p)].type == ObjectType::kEmpty && !(p == agent_)) return p;
  }
}

Observation DoorKeyEnv::reset(std::uint64_t seed) {
  const int n = config_.size;
  Rng rng = make_rng(seed, kLayout);
  noise_rng_ = make_rng(seed, kNoise);
  grid_.assign(static_cast<std::size_t>(n * n), kEmptyTile);
  for (int i = 0; i < n; ++i) {
    grid_[index({i, 0})] = kWallTile;
    grid_[index({i, n - 1})] = kWallTile;
    grid_[index({0, i})] = kWallTile;
    grid_[index({n - 1, i})] = kWallTile;
  }
  goal_ = {n - 2, n - 2};
  grid_[index(goal_)] = Tile{ObjectType::kGoal, Color::kGreen, 0};

  split_ = uniform_int(rng, 2, n - 2);
  for (int y = 0; y < n; ++y) grid_[index({split_, y})] = kWallTile;

  agent_ = {-1, -1};
  agent_ = random_empty(rng, split_);
  dir_ = uniform_int(rng, 0, 4);

  door_ = {split_, uniform_int(rng, 1, n - 2)};
  grid_[index(door_)] = Tile{ObjectType::kDoor, Color::kYellow, static_cast<int>(DoorState::kLocked)};

  const Pos key = random_empty(rng, split_);
  grid_[index(key)] = Tile{ObjectType::kKey, Color::kYellow, 0};

  carrying_.reset();
  steps_ = 0;
  done_ = false;
  return observe();
}

Pos DoorKeyEnv::front() const {
  const Pos d = kDirVec[static_cast<std::size_t>(dir_)];
  return {agent_.x + d.x, agent_.y + d.y};
}

std::optional<Pos> DoorKeyEnv::key_pos() const {
  const int n = config_.size;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (grid_[index({x, y})].type == ObjectType::kKey) return Pos{x, y};
    }
  }
  return std::nullopt;
}

bool DoorKeyEnv::door_open() const {
  return grid_[index(door_)].state == static_cast<int>(DoorState::kOpen);
}

bool DoorKeyEnv::door_locked() const {
  return grid_[index(door_)].state == static_cast<int>(DoorState::kLocked);
}

StepResult DoorKeyEnv::step(int action) {
  if (done_) throw StateError("step() called on a finished episode; call reset()");
  if (action < 0 || action >= kNumGridActions) {
    throw RangeError("grid action " + std::to_string(action) + " outside [0, 7)");
  }
  ++steps_;
  StepResult out;
  const Pos f = front();
  Tile& ft = grid_[index(f)];
  switch (static_cast<GridAction>(action)) {
    case GridAction::kLeft:
      dir_ = (dir_ + 3) % 4;
      break;
    case GridAction::kRight:
      dir_ = (dir_ + 1) % 4;
      break;
    case GridAction::kForward:
      if (passable(ft)) agent_ = f;
      if (ft.type == ObjectType::kGoal) {
        out.reached_goal = true;
        out.reward = 1.0 - 0.9 * static_cast<double>(steps_) / static_cast<double>(max_steps_);
      }
      break;
    case GridAction::kPickup:
      if (ft.type == ObjectType::kKey && !carrying_) {
        carrying_ = ft;
        ft = kEmptyTile;
      }
      break;
    case GridAction::kDrop:
      if (ft.type == ObjectType::kEmpty && carrying_) {
        ft = *carrying_;
        carrying_.reset();
      }
      break;
    case GridAction::kToggle:
      if (ft.type == ObjectType::kDoor) {
        if (ft.state == static_cast<int>(DoorState::kLocked)) {
          if (carrying_ && carrying_->type == ObjectType::kKey && carrying_->color == ft.color) {
            ft.state = static_cast<int>(DoorState::kOpen);
          }
        } else {
          ft.state = ft.state == static_cast<int>(DoorState::kOpen) ? static_cast<int>(DoorState::kClosed)
                                                                    : static_cast<int>(DoorState::kOpen);
        }
      }
      break;
    case GridAction::kDone:
      break;
  }
  done_ = out.reached_goal || steps_ >= max_steps_;
  out.done = done_;
  out.steps = steps_;
  out.observation = observe();
  return out;
}

Observation DoorKeyEnv::encode() const {
  const int n = config_.size;
  Observation obs;
  obs.size = n;
  obs.channels.assign(static_cast<std::size_t>(n * n * kObsChannels), 0.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const std::size_t base = static_cast<std::size_t>((y * n + x) * kObsChannels);
      if (Pos{x, y} == agent_) {
        obs.channels[base] = static_cast<double>(ObjectType::kAgent);
        obs.channels[base + 1] = static_cast<double>(Color::kRed);
        obs.channels[base + 2] = dir_;
        continue;
      }
      const Tile& t = grid_[index({x, y})];
      obs.channels[base] = static_cast<double>(t.type);
      obs.channels[base + 1] = static_cast<double>(t.color);
      obs.channels[base + 2] = t.state;
    }
  }
  return obs;
}

Observation DoorKeyEnv::observe() {
  Observation obs = encode();
  apply_door_noise(obs, agent_, door_, noise_rng_, config_.door_noise, config_.noise_std);
  return obs;
}

std::optional<std::vector<int>> plan_to_goal(const DoorKeyEnv& env) {
  if (env.done()) return std::nullopt;
  const int n = env.size();
  const std::optional<Pos> key = env.key_pos();
  // Door state: 0 open, 1 closed, 2 locked (MiniGrid encoding).
  struct Node {
    int x, y, dir, key, door;
  };
  auto id = [n](const Node& s) {
    return (((s.y * n + s.x) * 4 + s.dir) * 2 + s.key) * 3 + s.door;
  };
  const std::size_t states = static_cast<std::size_t>(n * n * 4 * 2 * 3);
  std::vector<int> parent(states, -2);
  std::vector<int> via(states, -1);

  const Pos door = env.door_pos();
  auto blocked = [&](Pos p, const Node& s) {
    if (p == door) return s.door != 0;
    if (key && p == *key) return s.key == 0;
    return env.tile(p).type == ObjectType::kWall;
  };

  const Node start{env.agent_pos().x, env.agent_pos().y, env.agent_dir(), env.carrying_key() ? 1 : 0,
                   env.tile(door).state};
  std::deque<Node> queue{start};
  parent[static_cast<std::size_t>(id(start))] = -1;
  const Pos goal = env.goal_pos();
  while (!queue.empty()) {
    const Node s = queue.front();
    queue.pop_front();
    const Pos d = kDirVec[static_cast<std::size_t>(s.dir)];
    const Pos f{s.x + d.x, s.y + d.y};
    for (int a : {0, 1, 2, 3, 5}) {
      Node t = s;
      bool reached = false;
      switch (a) {
        case 0: t.dir = (s.dir + 3) % 4; break;
        case 1: t.dir = (s.dir + 1) % 4; break;
        case 2:
          if (blocked(f, s)) continue;
          t.x = f.x;
          t.y = f.y;
          reached = f == goal;
          break;
        case 3:
          if (!(key && f == *key && s.key == 0)) continue;
          t.key = 1;
          break;
        case 5:
          if (!(f == door)) continue;
          if (s.door == 2) {
            if (s.key == 0) continue;
            t.door = 0;
          } else {
            t.door = s.door == 0 ? 1 : 0;
          }
          break;
      }
      const std::size_t tid = static_cast<std::size_t>(id(t));
      if (parent[tid] != -2) continue;
      parent[tid] = id(s);
      via[tid] = a;
      if (reached) {
        std::vector<int> plan;
        for (int cur = static_cast<int>(tid); parent[static_cast<std::size_t>(cur)] != -1;
             cur = parent[static_cast<std::size_t>(cur)]) {
          plan.push_back(via[static_cast<std::size_t>(cur)]);
        }
        return std::vector<int>(plan.rbegin(), plan.rend());
      }
      queue.push_back(t);
    }
  }
  return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  out << "step,action,x,y,dir,reward,done\n";
  for (const auto& r : records) {
    out << r.step << ',' << r.action << ',' << r.agent.x << ',' << r.agent.y << ',' << r.dir << ','
        << r.reward << ',' << (r.done ? 1 : 0) << '\n';
  }
}

}  // namespace gmc
