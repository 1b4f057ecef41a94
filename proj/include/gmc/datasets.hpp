#ifndef GMC_DATASETS_HPP_
#define GMC_DATASETS_HPP_

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "gmc/tensor.hpp"

namespace gmc {

inline constexpr int kNumClasses = 10;

enum class DataSource { kSynthetic, kMnist, kCifar10 };

std::string_view to_string(DataSource source);

// Images are (n, input_dim) with features in [0, 1]; labels lie in [0, 10).
struct LabeledSet {
  Tensor images;
  std::vector<int> labels;
  DataSource source = DataSource::kSynthetic;

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return images.cols(); }
  // Sample indices per class.
  std::vector<std::vector<std::size_t>> index_by_class() const;
};

// Class c is drawn as clamp(0.5 + s_c * p_c / 2 + N(0, noise_std), 0, 1), where
// p_c is a random +/-1 prototype and s_c = separation * (1 - difficulty_spread * group(c) / 3).
// A positive spread makes later (larger) groups harder to tell apart.
struct SyntheticSpec {
  std::size_t input_dim = 64;
  double separation = 1.0;
  double difficulty_spread = 0.0;
  double noise_std = 0.1;
  std::size_t samples_per_class = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

LabeledSet generate_synthetic(const SyntheticSpec& spec);

// Big-endian IDX: images magic 0x00000803 (n, rows, cols), labels magic 0x00000801 (n).
LabeledSet load_mnist_idx(const std::filesystem::path& images_path,
                          const std::filesystem::path& labels_path);

// CIFAR-10 binary batches: records of 1 label byte + 3072 pixel bytes.
LabeledSet load_cifar10_bin(const std::vector<std::filesystem::path>& paths);

}  // namespace gmc

#endif  // GMC_DATASETS_HPP_
