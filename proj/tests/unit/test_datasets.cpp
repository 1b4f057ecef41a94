#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "gmc/bandit_env.hpp"
#include "gmc/datasets.hpp"
#include "gmc/errors.hpp"

namespace gmc {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("gmc_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put_be32(std::vector<unsigned char>& buf, std::uint32_t x) {
  for (int s = 24; s >= 0; s -= 8) buf.push_back(static_cast<unsigned char>(x >> s));
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Three 2x2 images with labels 7, 0, 9.
void write_idx(const fs::path& dir, std::uint32_t image_magic = 0x803, std::uint32_t n_labels = 3,
               bool truncate = false) {
  std::vector<unsigned char> img;
  put_be32(img, image_magic);
  put_be32(img, 3);
  put_be32(img, 2);
  put_be32(img, 2);
  for (int i = 0; i < (truncate ? 10 : 12); ++i) img.push_back(static_cast<unsigned char>(i * 20));
  write_bytes(dir / "images", img);
  std::vector<unsigned char> lab;
  put_be32(lab, 0x801);
  put_be32(lab, n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) lab.push_back(std::vector<unsigned char>{7, 0, 9, 1}[i]);
  write_bytes(dir / "labels", lab);
}

}  // namespace

TEST_CASE("synthetic data is deterministic, bounded and balanced") {
  SyntheticSpec spec;
  spec.input_dim = 16;
  spec.samples_per_class = 20;
  spec.seed = 3;
  LabeledSet a = generate_synthetic(spec);
  LabeledSet b = generate_synthetic(spec);
  CHECK(a.size() == 200);
  CHECK(a.input_dim() == 16);
  CHECK(std::equal(a.images.data().begin(), a.images.data().end(), b.images.data().begin()));
  CHECK(a.labels == b.labels);
  for (double x : a.images.data()) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  auto by_class = a.index_by_class();
  REQUIRE(by_class.size() == 10);
  for (const auto& idx : by_class) CHECK(idx.size() == 20);
  spec.seed = 4;
  CHECK_FALSE(generate_synthetic(spec).images.data()[0] == a.images.data()[0]);

  SyntheticSpec bad;
  bad.difficulty_spread = 1.0;
  CHECK_THROWS(generate_synthetic(bad));
  bad = {};
  bad.separation = 0.0;
  CHECK_THROWS(generate_synthetic(bad));
}

TEST_CASE("difficulty spread shrinks class separation for later groups") {
  SyntheticSpec spec;
  spec.input_dim = 64;
  spec.samples_per_class = 200;
  spec.noise_std = 0.0;
  spec.difficulty_spread = 0.6;
  LabeledSet d = generate_synthetic(spec);
  // Without noise every sample of a class sits on 0.5 +/- s_c / 2.
  auto by_class = d.index_by_class();
  auto offset = [&](int c) { return std::abs(d.images.row(by_class[static_cast<std::size_t>(c)][0])[0] - 0.5); };
  CHECK(offset(0) == doctest::Approx(0.5));
  CHECK(offset(9) == doctest::Approx(0.5 * (1.0 - 0.6)));
  CHECK(offset(0) > offset(1));
  CHECK(offset(1) > offset(3));
  CHECK(offset(3) > offset(6));
}

TEST_CASE("IDX loader parses and rejects malformed files") {
  fs::path dir = scratch_dir("idx");
  write_idx(dir);
  LabeledSet s = load_mnist_idx(dir / "images", dir / "labels");
  CHECK(s.size() == 3);
  CHECK(s.input_dim() == 4);
  CHECK(s.labels == std::vector<int>{7, 0, 9});
  CHECK(s.images(1, 0) == doctest::Approx(80.0 / 255.0));
  CHECK(s.source == DataSource::kMnist);

  write_idx(dir, 0x802);
  CHECK_THROWS_AS(load_mnist_idx(dir / "images", dir / "labels"), FormatError);
  write_idx(dir, 0x803, 4);
  CHECK_THROWS_AS(load_mnist_idx(dir / "images", dir / "labels"), ConsistencyError);
  write_idx(dir, 0x803, 3, true);
  CHECK_THROWS_AS(load_mnist_idx(dir / "images", dir / "labels"), FormatError);
  CHECK_THROWS_AS(load_mnist_idx(dir / "missing", dir / "labels"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("CIFAR loader reads records and rejects bad lengths") {
  fs::path dir = scratch_dir("cifar");
  std::vector<unsigned char> rec;
  for (int r = 0; r < 2; ++r) {
    rec.push_back(static_cast<unsigned char>(r == 0 ? 3 : 8));
    for (int j = 0; j < 3072; ++j) rec.push_back(static_cast<unsigned char>((j + r) % 256));
  }
  write_bytes(dir / "b1.bin", rec);
  write_bytes(dir / "b2.bin", std::vector<unsigned char>(rec.begin(), rec.begin() + 3073));
  LabeledSet s = load_cifar10_bin({dir / "b1.bin", dir / "b2.bin"});
  CHECK(s.size() == 3);
  CHECK(s.input_dim() == 3072);
  CHECK(s.labels == std::vector<int>{3, 8, 3});
  CHECK(s.images(1, 0) == doctest::Approx(1.0 / 255.0));
  rec.pop_back();
  write_bytes(dir / "bad.bin", rec);
  CHECK_THROWS_AS(load_cifar10_bin({dir / "bad.bin"}), FormatError);
  fs::remove_all(dir);
}

}  // namespace gmc
