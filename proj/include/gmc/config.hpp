#ifndef GMC_CONFIG_HPP_
#define GMC_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gmc/bandit_experiment.hpp"
#include "gmc/datasets.hpp"
#include "gmc/rl_agents.hpp"

namespace gmc {

enum class Track { kBandit, kGridworld };
enum class Condition { kCurriculum, kNoise, kNoNoise, kDoorNoise };

std::string_view to_string(Track track);
std::string_view to_string(Condition condition);
Track parse_track(std::string_view name);
Condition parse_condition(std::string_view name);

// Seeds 0..19.
std::vector<std::uint64_t> default_seeds();

// Everything one sweep needs. Defaults are the reference settings; an
// empty config file therefore runs the bandit Noise condition on synthetic data.
struct ExperimentConfig {
  Track track = Track::kBandit;
  Condition condition = Condition::kNoise;
  std::vector<std::string> methods = {"uniform", "curiosity", "gmc"};
  std::vector<std::uint64_t> seeds = default_seeds();
  std::filesystem::path output_dir = "out";

  DataSource data_source = DataSource::kSynthetic;
  SyntheticSpec synthetic;
  std::filesystem::path mnist_images;
  std::filesystem::path mnist_labels;
  std::vector<std::filesystem::path> cifar_batches;

  BanditConfig bandit;
  // Optional override of the action space implied by the condition.
  std::string action_space;
  RlConfig rl;

  // Throws ConfigError with a message naming the offending field.
  void validate() const;

  BanditConfig bandit_for(std::string_view method) const;
  RlConfig rl_for(std::string_view method) const;
};

// "A..B" (inclusive), "A,B,C" or a single integer.
std::vector<std::uint64_t> parse_seeds(std::string_view text);

// INI file with sections [experiment], [data], [bandit], [ppo], [icm], [gmc], [env].
// Unknown sections or keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view text);

// Fully resolved settings in the same INI format, for provenance next to outputs.
std::string dump_config(const ExperimentConfig& config);

}  // namespace gmc

#endif  // GMC_CONFIG_HPP_
