#include "gmc/datasets.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <string>

#include "gmc/bandit_env.hpp"
#include "gmc/errors.hpp"
#include "gmc/random.hpp"

namespace gmc {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
constexpr std::size_t kCifarPixels = 3072;
constexpr std::size_t kCifarRecord = kCifarPixels + 1;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t pos,
                        const std::filesystem::path& path) {
  if (pos + 4 > buf.size()) throw FormatError("truncated IDX header in " + path.string());
  return (std::uint32_t{buf[pos]} << 24) | (std::uint32_t{buf[pos + 1]} << 16) |
         (std::uint32_t{buf[pos + 2]} << 8) | std::uint32_t{buf[pos + 3]};
}

int checked_label(unsigned char raw, const std::filesystem::path& path) {
  if (raw >= kNumClasses) {
    throw FormatError("label " + std::to_string(raw) + " outside [0, 10) in " + path.string());
  }
  return raw;
}

}  // namespace

std::string_view to_string(DataSource source) {
  switch (source) {
    case DataSource::kSynthetic: return "synthetic";
    case DataSource::kMnist: return "mnist";
    case DataSource::kCifar10: return "cifar10";
  }
  return "unknown";
}

std::vector<std::vector<std::size_t>> LabeledSet::index_by_class() const {
  std::vector<std::vector<std::size_t>> out(kNumClasses);
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
  return out;
}

void SyntheticSpec::validate() const {
  if (input_dim == 0 || samples_per_class == 0) {
    throw std::invalid_argument("synthetic input_dim and samples_per_class must be >= 1");
  }
  if (!(separation > 0.0)) throw std::invalid_argument("synthetic separation must be > 0");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("synthetic noise_std must be >= 0");
  if (!(difficulty_spread >= 0.0 && difficulty_spread < 1.0)) {
    throw std::invalid_argument("synthetic difficulty_spread must lie in [0, 1)");
  }
}

LabeledSet generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng proto_rng = make_rng(spec.seed, 0x70726f746fULL);
  Rng noise_rng = make_rng(spec.seed, 0x6e6f697365ULL);
  std::vector<std::vector<double>> prototypes(kNumClasses, std::vector<double>(spec.input_dim));
  for (auto& p : prototypes) {
    for (double& x : p) x = uniform01(proto_rng) < 0.5 ? -1.0 : 1.0;
  }
  const std::size_t n = spec.samples_per_class * kNumClasses;
  LabeledSet set;
  set.source = DataSource::kSynthetic;
  set.images = Tensor::zeros({n, spec.input_dim});
  set.labels.resize(n);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t row = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const double sep = spec.separation *
                       (1.0 - spec.difficulty_spread * static_cast<double>(GroupScheme::group_of(c)) / 3.0);
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
      auto r = set.images.row(row);
      for (std::size_t j = 0; j < spec.input_dim; ++j) {
        const double eps = spec.noise_std > 0.0 ? spec.noise_std * noise(noise_rng) : 0.0;
        r[j] = std::clamp(0.5 + 0.5 * sep * prototypes[static_cast<std::size_t>(c)][j] + eps, 0.0, 1.0);
      }
      set.labels[row] = c;
    }
  }
  return set;
}

LabeledSet load_mnist_idx(const std::filesystem::path& images_path,
                          const std::filesystem::path& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);
  if (read_be32(img, 0, images_path) != kIdxImageMagic) {
    throw FormatError("bad IDX image magic in " + images_path.string());
  }
  if (read_be32(lab, 0, labels_path) != kIdxLabelMagic) {
    throw FormatError("bad IDX label magic in " + labels_path.string());
  }
  const std::size_t n = read_be32(img, 4, images_path);
  const std::size_t rows = read_be32(img, 8, images_path);
  const std::size_t cols = read_be32(img, 12, images_path);
  const std::size_t n_labels = read_be32(lab, 4, labels_path);
  const std::size_t dim = rows * cols;
  if (img.size() != 16 + n * dim) {
    throw FormatError("IDX image payload size mismatch in " + images_path.string());
  }
  if (lab.size() != 8 + n_labels) {
    throw FormatError("IDX label payload size mismatch in " + labels_path.string());
  }
  if (n != n_labels) {
    throw ConsistencyError("IDX image count " + std::to_string(n) + " != label count " +
                           std::to_string(n_labels));
  }
  LabeledSet set;
  set.source = DataSource::kMnist;
  set.images = Tensor::zeros({n, dim});
  auto data = set.images.data();
  for (std::size_t i = 0; i < n * dim; ++i) data[i] = img[16 + i] / 255.0;
  set.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) set.labels[i] = checked_label(lab[8 + i], labels_path);
  return set;
}

LabeledSet load_cifar10_bin(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::vector<unsigned char>> files;
  std::size_t n = 0;
  for (const auto& p : paths) {
    files.push_back(read_file(p));
    if (files.back().size() % kCifarRecord != 0) {
      throw FormatError("CIFAR-10 file length is not a multiple of 3073: " + p.string());
    }
    n += files.back().size() / kCifarRecord;
  }
  LabeledSet set;
  set.source = DataSource::kCifar10;
  set.images = Tensor::zeros({n, kCifarPixels});
  set.labels.resize(n);
  std::size_t row = 0;
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto& buf = files[f];
    for (std::size_t off = 0; off < buf.size(); off += kCifarRecord, ++row) {
      set.labels[row] = checked_label(buf[off], paths[f]);
      auto r = set.images.row(row);
      for (std::size_t j = 0; j < kCifarPixels; ++j) r[j] = buf[off + 1 + j] / 255.0;
    }
  }
  return set;
}

}  // namespace gmc
