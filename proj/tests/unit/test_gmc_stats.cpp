#include <cmath>
#include <vector>

#include "doctest.h"
#include "gmc/errors.hpp"
#include "gmc/gmc_stats.hpp"
#include "gmc/random.hpp"

namespace gmc {

TEST_CASE("ewma update follows the closed form") {
  GmcState s(3, {0.9, 0.8, 1e-8, false});
  std::vector<std::vector<double>> gs = {{1, -2, 0}, {3, 0.5, -1}, {-1, 1, 2}};
  for (const auto& g : gs) s.update(g);
  // m_T = sum_t (1 - b) b^(T - t) g_t
  for (std::size_t i = 0; i < 3; ++i) {
    double m = 0.0, v = 0.0;
    for (std::size_t t = 0; t < 3; ++t) {
      m += 0.1 * std::pow(0.9, 2.0 - static_cast<double>(t)) * gs[t][i];
      v += 0.2 * std::pow(0.8, 2.0 - static_cast<double>(t)) * gs[t][i] * gs[t][i];
    }
    CHECK(s.m()[i] == doctest::Approx(m).epsilon(1e-14));
    CHECK(s.v()[i] == doctest::Approx(v).epsilon(1e-14));
  }
  CHECK(s.step_count() == 3);
  CHECK_THROWS_AS(s.update(std::vector<double>(2)), DimensionError);
}

TEST_CASE("bias correction divides by 1 - beta^t") {
  GmcState raw(2, {0.99, 0.999, 1e-8, false});
  GmcState corrected(2, {0.99, 0.999, 1e-8, true});
  std::vector<double> g = {0.3, -0.7};
  for (int t = 0; t < 5; ++t) {
    raw.update(g);
    corrected.update(g);
  }
  auto m = corrected.momentum();
  auto v = corrected.second_moment();
  for (std::size_t i = 0; i < 2; ++i) {
    // A constant gradient is recovered exactly once corrected.
    CHECK(m[i] == doctest::Approx(g[i]).epsilon(1e-12));
    CHECK(v[i] == doctest::Approx(g[i] * g[i]).epsilon(1e-12));
    CHECK(raw.momentum()[i] == raw.m()[i]);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS(GmcState(2, {1.0, 0.5, 1e-8, false}));
  CHECK_THROWS(GmcState(2, {0.5, 0.0, 1e-8, false}));
  CHECK_THROWS(GmcState(2, {0.5, 0.5, -1.0, false}));
}

TEST_CASE("m^2 <= v for equal decays, single and batch forms") {
  Rng rng = make_rng(7, 0);
  GmcState single(50, {0.99, 0.99, 1e-8, false});
  GmcState batch(50, {0.99, 0.99, 1e-8, false});
  std::size_t violations = 0;
  for (int step = 0; step < 2000; ++step) {
    std::vector<double> g(50), mean(50, 0.0), sq(50, 0.0);
    for (double& x : g) x = standard_normal(rng) * std::exp(2.0 * standard_normal(rng));
    single.update(g);
    for (int b = 0; b < 8; ++b) {
      for (std::size_t i = 0; i < 50; ++i) {
        const double gi = standard_normal(rng) + 0.5;
        mean[i] += gi / 8.0;
        sq[i] += gi * gi / 8.0;
      }
    }
    batch.update(mean, sq);
    for (std::size_t i = 0; i < 50; ++i) {
      if (single.m()[i] * single.m()[i] > single.v()[i]) ++violations;
      if (batch.m()[i] * batch.m()[i] > batch.v()[i]) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("coupling weights") {
  GmcState s(2, {0.5, 0.5, 1e-8, false});
  s.update(std::vector<double>{2.0, -4.0}, std::vector<double>{8.0, 32.0});
  // m = (1, -2), v = (4, 16)
  auto w = s.coupling_weights();
  auto u = s.coupling_direction();
  CHECK(w[0] == doctest::Approx(1.0 / (4.0 + 1e-8)));
  CHECK(u[1] == doctest::Approx(-2.0 / (16.0 + 1e-8)));
  CHECK(w[1] == -u[1]);
}

TEST_CASE("momentum change: exact form vs first order") {
  std::vector<double> m = {3.0, 4.0};
  std::vector<double> g = {0.0, 1.0};
  CHECK(momentum_change_first_order(m, g) == doctest::Approx(0.8));
  CHECK(momentum_change_exact(m, g) == doctest::Approx(std::sqrt(9.0 + 25.0) - 5.0).epsilon(1e-14));
  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS(momentum_change_first_order(zero, g), DegenerateMomentumError);
  CHECK(momentum_change_exact(zero, g) == doctest::Approx(1.0));
  CHECK_THROWS_AS(momentum_change_exact(m, std::vector<double>{1.0}), DimensionError);

  // Tiny g: the cancellation-free form agrees with a long-double reference.
  Rng rng = make_rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> mm(30), gg(30);
    for (double& x : mm) x = standard_normal(rng);
    for (double& x : gg) x = 1e-9 * standard_normal(rng);
    long double a = 0, b = 0;
    for (std::size_t i = 0; i < 30; ++i) {
      a += static_cast<long double>(mm[i] + gg[i]) * (mm[i] + gg[i]);
      b += static_cast<long double>(mm[i]) * mm[i];
    }
    long double mg = 0, g2 = 0;
    for (std::size_t i = 0; i < 30; ++i) {
      mg += static_cast<long double>(mm[i]) * gg[i];
      g2 += static_cast<long double>(gg[i]) * gg[i];
    }
    const long double ref = (2 * mg + g2) / (std::sqrt(a) + std::sqrt(b));
    CHECK(momentum_change_exact(mm, gg) ==
          doctest::Approx(static_cast<double>(ref)).epsilon(1e-9));
  }
}

}  // namespace gmc
