#ifndef GMC_ANALYSIS_HPP_
#define GMC_ANALYSIS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmc/mlp.hpp"
#include "gmc/tensor.hpp"

namespace gmc {

// Per-epoch, per-group curves of one bandit run.
struct RunMetrics {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> test_loss;  // [epoch][group]
  std::vector<std::vector<double>> visits;     // [epoch][group]

  std::size_t epochs() const { return test_loss.size(); }
  // Test loss averaged over groups, one value per epoch.
  std::vector<double> mean_test_loss() const;
  // visits[*][group] as a curve.
  std::vector<double> visit_curve(int group) const;
  // Fraction of visits per group over epochs [first, last).
  std::vector<double> allocation(std::size_t first, std::size_t last) const;
};

// A balanced evaluation set: each sample carries the labels its loss is averaged over.
struct EvalSet {
  Tensor images;
  std::vector<std::vector<int>> targets;
  std::vector<int> groups;
};

// Mean loss per group of `model` on `eval`; num_groups entries.
std::vector<double> group_test_loss(const Mlp& model, const EvalSet& eval, int num_groups);

// Left Riemann sum with unit epoch width.
double auc(std::span<const double> loss_curve);

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};

// mean +/- t_{(1+level)/2, n-1} * s / sqrt(n).
Interval confidence_interval(std::span<const double> samples, double level = 0.95);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

struct WelchResult {
  double t_stat = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Two-sided Welch t-test of mean(a) vs mean(b).
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct SummaryRow {
  std::string condition;
  std::string method;
  double mean_auc = 0.0;
  double ci95 = 0.0;
  std::size_t n = 0;
};

SummaryRow summarize_aucs(std::string condition, std::string method, std::span<const double> aucs);

// Divides mean_auc and ci95 by the Uniform row of the same condition.
std::vector<SummaryRow> normalize_by_uniform(const std::vector<SummaryRow>& rows);

// Argmax of the centered moving average (edge values repeated to fill the window).
// Ties resolve to the earliest epoch.
std::size_t peak_epoch(std::span<const double> curve, std::size_t window = 5);
std::vector<std::size_t> peak_epochs(const std::vector<std::vector<double>>& curves,
                                     std::size_t window = 5);

}  // namespace gmc

#endif  // GMC_ANALYSIS_HPP_
