#ifndef GMC_BANDIT_ENV_HPP_
#define GMC_BANDIT_ENV_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gmc/datasets.hpp"
#include "gmc/random.hpp"

namespace gmc {

enum class BanditMode { kCurriculum, kNoise };
enum class ActionSpace { kPerClass, kPerGroup };

std::string_view to_string(BanditMode mode);
BanditMode parse_bandit_mode(std::string_view name);

// Fixed partition of the ten classes: A={0}, B={1,2}, C={3,4,5}, D={6,7,8,9}.
class GroupScheme {
 public:
  static constexpr int kNumGroups = 4;

  static int group_of(int cls);
  static std::span<const int> classes(int group);
  static std::size_t group_size(int group) { return classes(group).size(); }
  static char group_name(int group);
};

// Fraction of labels that differ from the original class when a label is
// redrawn uniformly within the group: 1 - 1/|group|.
double noise_level(int group);

// Curriculum protocol selects a class, Noise protocol selects a group.
ActionSpace action_space_for(BanditMode mode);
int num_actions(ActionSpace space);

struct EpisodeOutcome {
  std::size_t sample = 0;  // row in the dataset
  int label = 0;
  int group = 0;
  int action = 0;
};

// Stateless selection environment over a labeled set. No extrinsic reward
// exists; an episode is a single (select, observe, label) triple.
class BanditEnv {
 public:
  // `action_space` defaults to the one the mode's protocol prescribes; other
  // combinations are rejected.
  BanditEnv(const LabeledSet& data, BanditMode mode, std::uint64_t seed);
  BanditEnv(const LabeledSet& data, BanditMode mode, ActionSpace action_space,
            std::uint64_t seed);

  BanditMode mode() const { return mode_; }
  ActionSpace action_space() const { return action_space_; }
  int num_actions() const { return gmc::num_actions(action_space_); }
  const LabeledSet& data() const { return *data_; }

  EpisodeOutcome step(int action);

  // Permanent curriculum label of a sample; the original label in Noise mode.
  int scrambled_label(std::size_t sample) const { return scrambled_[sample]; }
  // Candidate labels an evaluator should average over for this sample.
  std::vector<int> target_labels(std::size_t sample) const;
  // Sample indices eligible for the given action.
  std::span<const std::size_t> pool(int action) const;

 private:
  const LabeledSet* data_;
  BanditMode mode_;
  ActionSpace action_space_;
  Rng rng_;
  std::vector<int> scrambled_;
  std::vector<std::vector<std::size_t>> pools_;
};

}  // namespace gmc

#endif  // GMC_BANDIT_ENV_HPP_
