#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "gmc/adam.hpp"
#include "gmc/errors.hpp"
#include "gmc/loss.hpp"
#include "gmc/mlp.hpp"
#include "gmc/param_store.hpp"
#include "gmc/random.hpp"
#include "gmc/tensor.hpp"
#include "oracles.hpp"

namespace gmc {
namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> data(rows * cols);
  for (double& x : data) x = standard_normal(rng);
  return Tensor::matrix(rows, cols, std::move(data));
}

// Forward pass written out with plain loops over the stored parameters.
std::vector<double> naive_forward(const Mlp& net, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  const auto& p = net.params();
  const int layers = static_cast<int>(net.spec().num_layers());
  for (int k = 0; k < layers; ++k) {
    auto w = p.values(p.segment("layer" + std::to_string(k) + ".weight"));
    auto b = p.values(p.segment("layer" + std::to_string(k) + ".bias"));
    std::vector<double> out(b.size());
    for (std::size_t o = 0; o < b.size(); ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < a.size(); ++i) s += w[o * a.size() + i] * a[i];
      out[o] = (k + 1 < layers) ? std::max(s, 0.0) : s;
    }
    a = std::move(out);
  }
  return a;
}

}  // namespace

TEST_CASE("tensor validates shape and finiteness") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), DimensionError);
  CHECK_THROWS_AS(Tensor::matrix(1, 2, {1.0, std::nan("")}), NumericalError);
  CHECK_THROWS_AS(Tensor::matrix(1, 1, {std::numeric_limits<double>::infinity()}), NumericalError);
  Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t(1, 2) == 6.0);
  CHECK(t.row(1)[0] == 4.0);
  Tensor v({4}, {1, 2, 3, 4});
  CHECK_THROWS_AS(v.rows(), DimensionError);
}

TEST_CASE("param store tiles segments and clips gradient norm") {
  ParamStore p;
  p.add("a", 3, 0);
  p.add("b", 2, 0);
  p.add("c", 4, 1);
  CHECK(p.size() == 9);
  CHECK(p.layer_range(0).length == 5);
  CHECK(p.last_layer().offset == 5);
  CHECK_THROWS_AS(p.add("a", 1, 1), ConsistencyError);
  CHECK_THROWS_AS(p.add("d", 1, 0), ConsistencyError);
  CHECK_THROWS_AS(p.segment("zzz"), RangeError);
  for (std::size_t i = 0; i < p.size(); ++i) p.grads()[i] = static_cast<double>(i + 1);
  double ref = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) ref += (i + 1.0) * (i + 1.0);
  ref = std::sqrt(ref);
  CHECK(clip_grad_norm(p, 0.5) == doctest::Approx(ref).epsilon(1e-14));
  // torch-style coefficient max_norm / (norm + 1e-6)
  CHECK(p.grad_norm() == doctest::Approx(0.5 * ref / (ref + 1e-6)).epsilon(1e-12));
  // Already within bounds: untouched.
  const double before = p.grads()[3];
  clip_grad_norm(p, 10.0);
  CHECK(p.grads()[3] == before);
}

TEST_CASE("mlp forward matches a scalar loop") {
  Rng rng = make_rng(1, 0);
  Mlp net({5, {7, 6}, 3}, rng);
  Tensor x = random_matrix(4, 5, rng);
  const Tensor& y = net.forward(x);
  Tensor y2 = net.predict(x);
  for (std::size_t i = 0; i < 4; ++i) {
    auto ref = naive_forward(net, x.row(i));
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(y(i, j) == doctest::Approx(ref[j]).epsilon(1e-13));
      CHECK(y2(i, j) == y(i, j));
    }
  }
  CHECK_THROWS_AS(net.forward(random_matrix(2, 4, rng)), DimensionError);
  Mlp fresh({2, {2}, 1}, rng);
  CHECK_THROWS_AS(fresh.backward(Tensor::matrix(1, 1, {1.0})), StateError);
}

TEST_CASE("mlp init is kaiming-uniform by fan-in") {
  Rng rng = make_rng(2, 0);
  Mlp net({16, {32}, 4}, rng);
  const auto& p = net.params();
  for (double w : p.values(p.segment("layer0.weight"))) CHECK(std::abs(w) <= 0.25);
  for (double w : p.values(p.segment("layer1.weight"))) CHECK(std::abs(w) <= 1.0 / std::sqrt(32.0));
}

TEST_CASE("backward matches central differences on cross-entropy") {
  Rng rng = make_rng(3, 0);
  Mlp net({6, {10, 8}, 4}, rng);
  Tensor x = random_matrix(5, 6, rng);
  std::vector<int> labels = {0, 3, 1, 2, 3};
  auto loss_fn = [&] { return softmax_cross_entropy(net.predict(x), labels).value; };
  auto out = softmax_cross_entropy(net.forward(x), labels);
  Tensor grad_x = net.backward(out.grad);
  std::vector<double> analytic(net.params().grads().begin(), net.params().grads().end());
  auto numeric = oracle::central_difference(loss_fn, net.params().values(), 1e-5);
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    CHECK(oracle::relative_error(analytic[i], numeric[i]) < 1e-4);
  }
  // Input gradient too.
  auto fx = [&] { return softmax_cross_entropy(net.predict(x), labels).value; };
  auto numeric_x = oracle::central_difference(fx, x.data(), 1e-5);
  for (std::size_t i = 0; i < numeric_x.size(); ++i) {
    CHECK(oracle::relative_error(grad_x.data()[i], numeric_x[i]) < 1e-4);
  }
}

TEST_CASE("per-sample contractions match explicit per-sample gradients") {
  Rng rng = make_rng(4, 0);
  Mlp net({5, {9, 7}, 3}, rng);
  Tensor x = random_matrix(6, 5, rng);
  Tensor up = random_matrix(6, 3, rng);
  auto explicit_g = per_sample_gradients(net, x, up);
  net.forward(x);
  net.backward(up);

  const std::size_t d = net.num_params();
  std::vector<double> w(d), dir(d);
  for (std::size_t p = 0; p < d; ++p) {
    w[p] = std::abs(standard_normal(rng));
    dir[p] = standard_normal(rng);
  }
  auto l1 = net.per_sample_weighted_l1(w);
  auto dot = net.per_sample_dot(dir);
  auto sq = net.per_sample_sq_norm();
  auto sq_sum = net.per_sample_sq_grad_sum();
  Segment last = net.params().last_layer();
  auto l1_last = net.per_sample_weighted_l1(w, last);

  std::vector<double> sum_ref(d, 0.0), sq_sum_ref(d, 0.0);
  for (std::size_t i = 0; i < 6; ++i) {
    double a = 0.0, b = 0.0, c = 0.0, e = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      const double g = explicit_g[i][p];
      a += std::abs(g) * w[p];
      b += g * dir[p];
      c += g * g;
      if (p >= last.offset && p < last.end()) e += std::abs(g) * w[p];
      sum_ref[p] += g;
      sq_sum_ref[p] += g * g;
    }
    CHECK(l1[i] == doctest::Approx(a).epsilon(1e-12));
    CHECK(dot[i] == doctest::Approx(b).epsilon(1e-10));
    CHECK(sq[i] == doctest::Approx(c).epsilon(1e-12));
    CHECK(l1_last[i] == doctest::Approx(e).epsilon(1e-12));
  }
  for (std::size_t p = 0; p < d; ++p) {
    CHECK(net.params().grads()[p] == doctest::Approx(sum_ref[p]).epsilon(1e-12).scale(1e-12));
    CHECK(sq_sum[p] == doctest::Approx(sq_sum_ref[p]).epsilon(1e-12).scale(1e-300));
  }
  CHECK_THROWS_AS(net.per_sample_dot(std::vector<double>(d - 1)), DimensionError);
}

TEST_CASE("loss values and gradients") {
  std::vector<double> logits = {1.0, 2.0, 0.5};
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(0.5));
  CHECK(cross_entropy_loss(logits, 1) == doctest::Approx(lse - 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(cross_entropy_loss(logits, 3), RangeError);
  // Large logits stay finite.
  std::vector<double> big = {1000.0, 0.0};
  CHECK(cross_entropy_loss(big, 0) == doctest::Approx(0.0));
  CHECK(std::isfinite(cross_entropy_loss(big, 1)));

  std::vector<int> cand = {0, 2};
  CHECK(expected_cross_entropy(logits, cand) ==
        doctest::Approx(0.5 * (cross_entropy_loss(logits, 0) + cross_entropy_loss(logits, 2))));
  std::vector<int> one = {1};
  CHECK(expected_cross_entropy(logits, one) == cross_entropy_loss(logits, 1));
  CHECK(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)));

  Rng rng = make_rng(5, 0);
  Tensor pred = random_matrix(3, 4, rng);
  Tensor target = random_matrix(3, 4, rng);
  for (Reduction red : {Reduction::kMean, Reduction::kSum}) {
    auto mse = mse_loss(pred, target, red);
    auto half = half_squared_error(pred, target, red);
    auto f_mse = [&] { return mse_loss(pred, target, red).value; };
    auto f_half = [&] { return half_squared_error(pred, target, red).value; };
    auto n_mse = oracle::central_difference(f_mse, pred.data(), 1e-6);
    auto n_half = oracle::central_difference(f_half, pred.data(), 1e-6);
    for (std::size_t i = 0; i < n_mse.size(); ++i) {
      CHECK(oracle::relative_error(mse.grad.data()[i], n_mse[i]) < 1e-6);
      CHECK(oracle::relative_error(half.grad.data()[i], n_half[i]) < 1e-6);
    }
  }
  auto mse = mse_loss(pred, target, Reduction::kSum);
  double s0 = 0.0;
  for (std::size_t j = 0; j < 4; ++j) s0 += (pred(0, j) - target(0, j)) * (pred(0, j) - target(0, j));
  CHECK(mse.per_sample[0] == doctest::Approx(s0 / 4.0));
  CHECK_THROWS_AS(mse_loss(pred, random_matrix(3, 5, rng)), DimensionError);
}

TEST_CASE("adam step matches the textbook recurrence") {
  ParamStore p;
  p.add("w", 2, 0);
  p.values()[0] = 1.0;
  p.values()[1] = -2.0;
  Adam adam(2, {0.1, 0.9, 0.999, 1e-8});
  double m0 = 0, v0 = 0, w0 = 1.0;
  const double grads[3] = {0.5, -1.0, 2.0};
  for (int t = 1; t <= 3; ++t) {
    p.grads()[0] = grads[t - 1];
    p.grads()[1] = 0.0;
    adam.step(p);
    m0 = 0.9 * m0 + 0.1 * grads[t - 1];
    v0 = 0.999 * v0 + 0.001 * grads[t - 1] * grads[t - 1];
    const double mh = m0 / (1 - std::pow(0.9, t));
    const double vh = v0 / (1 - std::pow(0.999, t));
    w0 -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p.values()[0] == doctest::Approx(w0).epsilon(1e-14));
  }
  CHECK(p.values()[1] == -2.0);
  CHECK(adam.steps() == 3);
  ParamStore other;
  other.add("w", 3, 0);
  CHECK_THROWS_AS(adam.step(other), DimensionError);
}

}  // namespace gmc
