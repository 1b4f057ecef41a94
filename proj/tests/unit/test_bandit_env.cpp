#include <array>
#include <map>
#include <vector>

#include "doctest.h"
#include "gmc/bandit_env.hpp"
#include "gmc/errors.hpp"

namespace gmc {
namespace {

LabeledSet small_set() {
  SyntheticSpec spec;
  spec.input_dim = 4;
  spec.samples_per_class = 30;
  return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("group scheme partitions the ten classes") {
  std::array<int, 10> expected = {0, 1, 1, 2, 2, 2, 3, 3, 3, 3};
  for (int c = 0; c < 10; ++c) CHECK(GroupScheme::group_of(c) == expected[static_cast<std::size_t>(c)]);
  CHECK(GroupScheme::group_size(3) == 4);
  CHECK(GroupScheme::group_name(1) == 'B');
  CHECK_THROWS_AS(GroupScheme::group_of(10), RangeError);
  CHECK_THROWS_AS(GroupScheme::classes(4), RangeError);
  CHECK(noise_level(0) == 0.0);
  CHECK(noise_level(1) == doctest::Approx(0.5));
  CHECK(noise_level(2) == doctest::Approx(2.0 / 3.0));
  CHECK(noise_level(3) == doctest::Approx(0.75));
  CHECK(num_actions(action_space_for(BanditMode::kNoise)) == 4);
  CHECK(num_actions(action_space_for(BanditMode::kCurriculum)) == 10);
  CHECK(parse_bandit_mode(to_string(BanditMode::kCurriculum)) == BanditMode::kCurriculum);
}

TEST_CASE("noise mode redraws labels within the group on every draw") {
  LabeledSet data = small_set();
  BanditEnv env(data, BanditMode::kNoise, 5);
  CHECK_THROWS(BanditEnv(data, BanditMode::kNoise, ActionSpace::kPerClass, 5));
  std::map<int, std::array<int, 10>> counts;
  std::array<int, 4> changed{}, draws{};
  for (int i = 0; i < 40000; ++i) {
    const int a = i % 4;
    EpisodeOutcome o = env.step(a);
    CHECK(o.group == a);
    CHECK(GroupScheme::group_of(o.label) == a);
    CHECK(GroupScheme::group_of(data.labels[o.sample]) == a);
    ++draws[static_cast<std::size_t>(a)];
    if (o.label != data.labels[o.sample]) ++changed[static_cast<std::size_t>(a)];
  }
  for (int g = 0; g < 4; ++g) {
    const double rate = static_cast<double>(changed[static_cast<std::size_t>(g)]) / draws[static_cast<std::size_t>(g)];
    CHECK(rate == doctest::Approx(noise_level(g)).epsilon(0.05).scale(1.0));
  }
  CHECK(env.target_labels(env.pool(3)[0]).size() == 4);
  CHECK_THROWS_AS(env.step(4), RangeError);
  CHECK_THROWS_AS(env.step(-1), RangeError);
}

TEST_CASE("curriculum mode scrambles once and keeps labels fixed") {
  LabeledSet data = small_set();
  BanditEnv env(data, BanditMode::kCurriculum, 9);
  CHECK(env.num_actions() == 10);
  std::size_t scrambled = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(GroupScheme::group_of(env.scrambled_label(i)) == GroupScheme::group_of(data.labels[i]));
    if (data.labels[i] == 0) CHECK(env.scrambled_label(i) == 0);
    if (env.scrambled_label(i) != data.labels[i]) ++scrambled;
  }
  CHECK(scrambled > 0);
  for (int i = 0; i < 2000; ++i) {
    EpisodeOutcome o = env.step(i % 10);
    CHECK(data.labels[o.sample] == i % 10);
    CHECK(o.label == env.scrambled_label(o.sample));
  }
  CHECK(env.target_labels(0) == std::vector<int>{env.scrambled_label(0)});
  // Same seed, same scrambling.
  BanditEnv again(data, BanditMode::kCurriculum, 9);
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(again.scrambled_label(i) == env.scrambled_label(i));
}

TEST_CASE("missing classes are reported") {
  LabeledSet data = small_set();
  LabeledSet partial;
  std::vector<double> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] == 4) continue;
    partial.labels.push_back(data.labels[i]);
    rows.insert(rows.end(), data.images.row(i).begin(), data.images.row(i).end());
  }
  partial.images = Tensor::matrix(partial.labels.size(), 4, rows);
  CHECK_THROWS_AS(BanditEnv(partial, BanditMode::kCurriculum, 0), ConsistencyError);
  CHECK_NOTHROW(BanditEnv(partial, BanditMode::kNoise, 0));
}

}  // namespace gmc
