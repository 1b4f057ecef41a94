#include "gmc/bandit_env.hpp"

#include <array>
#include <string>

#include "gmc/errors.hpp"

namespace gmc {

namespace {

constexpr std::array<int, 1> kA = {0};
constexpr std::array<int, 2> kB = {1, 2};
constexpr std::array<int, 3> kC = {3, 4, 5};
constexpr std::array<int, 4> kD = {6, 7, 8, 9};

constexpr std::uint64_t kScrambleStream = 0x736372616d626c65ULL;
constexpr std::uint64_t kSampleStream = 0x73616d706c65ULL;

}  // namespace

std::string_view to_string(BanditMode mode) {
  return mode == BanditMode::kCurriculum ? "curriculum" : "noise";
}

BanditMode parse_bandit_mode(std::string_view name) {
  if (name == "curriculum" || name == "Curriculum") return BanditMode::kCurriculum;
  if (name == "noise" || name == "Noise") return BanditMode::kNoise;
  throw std::invalid_argument("unknown bandit condition: " + std::string(name));
}

int GroupScheme::group_of(int cls) {
  if (cls < 0 || cls >= kNumClasses) throw RangeError("class " + std::to_string(cls) + " out of range");
  if (cls == 0) return 0;
  if (cls <= 2) return 1;
  if (cls <= 5) return 2;
  return 3;
}

std::span<const int> GroupScheme::classes(int group) {
  switch (group) {
    case 0: return kA;
    case 1: return kB;
    case 2: return kC;
    case 3: return kD;
    default: throw RangeError("group " + std::to_string(group) + " out of range");
  }
}

char GroupScheme::group_name(int group) {
  classes(group);
  return static_cast<char>('A' + group);
}

double noise_level(int group) {
  return 1.0 - 1.0 / static_cast<double>(GroupScheme::group_size(group));
}

ActionSpace action_space_for(BanditMode mode) {
  return mode == BanditMode::kCurriculum ? ActionSpace::kPerClass : ActionSpace::kPerGroup;
}

int num_actions(ActionSpace space) {
  return space == ActionSpace::kPerClass ? kNumClasses : GroupScheme::kNumGroups;
}

BanditEnv::BanditEnv(const LabeledSet& data, BanditMode mode, std::uint64_t seed)
    : BanditEnv(data, mode, action_space_for(mode), seed) {}

BanditEnv::BanditEnv(const LabeledSet& data, BanditMode mode, ActionSpace action_space,
                     std::uint64_t seed)
    : data_(&data), mode_(mode), action_space_(action_space), rng_(make_rng(seed, kSampleStream)) {
  if (action_space != action_space_for(mode)) {
    throw std::invalid_argument(std::string(to_string(mode)) +
                                " condition requires the " +
                                (mode == BanditMode::kCurriculum ? "per-class" : "per-group") +
                                " action space");
  }
  scrambled_ = data.labels;
  if (mode == BanditMode::kCurriculum) {
    Rng scramble = make_rng(seed, kScrambleStream);
    for (std::size_t i = 0; i < scrambled_.size(); ++i) {
      const auto cls = GroupScheme::classes(GroupScheme::group_of(data.labels[i]));
      scrambled_[i] = cls[static_cast<std::size_t>(uniform_int(scramble, 0, static_cast<int>(cls.size())))];
    }
  }
  pools_.resize(static_cast<std::size_t>(num_actions()));
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    const int cls = data.labels[i];
    const int a = action_space_ == ActionSpace::kPerClass ? cls : GroupScheme::group_of(cls);
    pools_[static_cast<std::size_t>(a)].push_back(i);
  }
  for (std::size_t a = 0; a < pools_.size(); ++a) {
    if (pools_[a].empty()) throw ConsistencyError("dataset has no samples for action " + std::to_string(a));
  }
}

std::span<const std::size_t> BanditEnv::pool(int action) const {
  if (action < 0 || action >= num_actions()) {
    throw RangeError("action " + std::to_string(action) + " outside [0, " +
                     std::to_string(num_actions()) + ")");
  }
  return pools_[static_cast<std::size_t>(action)];
}

EpisodeOutcome BanditEnv::step(int action) {
  const auto candidates = pool(action);
  const std::size_t sample =
      candidates[static_cast<std::size_t>(uniform_int(rng_, 0, static_cast<int>(candidates.size())))];
  EpisodeOutcome out;
  out.sample = sample;
  out.action = action;
  out.group = GroupScheme::group_of(data_->labels[sample]);
  if (mode_ == BanditMode::kCurriculum) {
    out.label = scrambled_[sample];
  } else {
    const auto cls = GroupScheme::classes(out.group);
    out.label = cls[static_cast<std::size_t>(uniform_int(rng_, 0, static_cast<int>(cls.size())))];
  }
  return out;
}

std::vector<int> BanditEnv::target_labels(std::size_t sample) const {
  if (mode_ == BanditMode::kCurriculum) return {scrambled_[sample]};
  const auto cls = GroupScheme::classes(GroupScheme::group_of(data_->labels[sample]));
  return {cls.begin(), cls.end()};
}

}  // namespace gmc
