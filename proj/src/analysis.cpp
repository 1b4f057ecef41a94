#include "gmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "gmc/errors.hpp"
#include "gmc/loss.hpp"

namespace gmc {

std::vector<double> RunMetrics::mean_test_loss() const {
  std::vector<double> out;
  out.reserve(test_loss.size());
  for (const auto& row : test_loss) out.push_back(mean(row));
  return out;
}

std::vector<double> RunMetrics::visit_curve(int group) const {
  std::vector<double> out;
  out.reserve(visits.size());
  for (const auto& row : visits) out.push_back(row.at(static_cast<std::size_t>(group)));
  return out;
}

std::vector<double> RunMetrics::allocation(std::size_t first, std::size_t last) const {
  if (visits.empty()) return {};
  std::vector<double> total(visits.front().size(), 0.0);
  for (std::size_t e = first; e < last && e < visits.size(); ++e) {
    for (std::size_t g = 0; g < total.size(); ++g) total[g] += visits[e][g];
  }
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  if (sum > 0.0) {
    for (double& x : total) x /= sum;
  }
  return total;
}

std::vector<double> group_test_loss(const Mlp& model, const EvalSet& eval, int num_groups) {
  if (eval.targets.size() != eval.images.rows() || eval.groups.size() != eval.images.rows()) {
    throw DimensionError("evaluation set rows, targets and groups disagree");
  }
  const Tensor logits = model.predict(eval.images);
  std::vector<double> sum(static_cast<std::size_t>(num_groups), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(num_groups), 0);
  for (std::size_t i = 0; i < eval.groups.size(); ++i) {
    const auto g = static_cast<std::size_t>(eval.groups[i]);
    if (g >= sum.size()) throw RangeError("evaluation group out of range");
    sum[g] += expected_cross_entropy(logits.row(i), eval.targets[i]);
    ++count[g];
  }
  for (std::size_t g = 0; g < sum.size(); ++g) {
    sum[g] = count[g] ? sum[g] / static_cast<double>(count[g]) : 0.0;
  }
  return sum;
}

double auc(std::span<const double> loss_curve) {
  return std::accumulate(loss_curve.begin(), loss_curve.end(), 0.0);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DimensionError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw DimensionError("sample variance needs n >= 2");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("t distribution needs dof > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile level must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, dof);
  double lo = 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, dof) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Interval confidence_interval(std::span<const double> samples, double level) {
  const std::size_t n = samples.size();
  if (n < 2) throw DimensionError("confidence interval needs n >= 2");
  const double s = std::sqrt(sample_variance(samples));
  const double t = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(n - 1));
  return Interval{mean(samples), t * s / std::sqrt(static_cast<double>(n))};
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DimensionError("Welch t-test needs at least two samples per group");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double qa = sample_variance(a) / na;
  const double qb = sample_variance(b) / nb;
  const double diff = mean(a) - mean(b);
  WelchResult r;
  double se2 = qa + qb;
  if (se2 == 0.0) {
    // Both samples constant: the separation limit.
    r.dof = na + nb - 2.0;
    if (diff == 0.0) return WelchResult{0.0, r.dof, 1.0};
    se2 = std::numeric_limits<double>::min();
  } else {
    r.dof = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  }
  r.t_stat = diff / std::sqrt(se2);
  const double x = r.dof / (r.dof + r.t_stat * r.t_stat);
  r.p_value = regularized_incomplete_beta(0.5 * r.dof, 0.5, x);
  return r;
}

SummaryRow summarize_aucs(std::string condition, std::string method, std::span<const double> aucs) {
  SummaryRow row{std::move(condition), std::move(method), 0.0, 0.0, aucs.size()};
  if (aucs.size() >= 2) {
    const Interval ci = confidence_interval(aucs);
    row.mean_auc = ci.mean;
    row.ci95 = ci.half_width;
  } else if (!aucs.empty()) {
    row.mean_auc = aucs.front();
  }
  return row;
}

std::vector<SummaryRow> normalize_by_uniform(const std::vector<SummaryRow>& rows) {
  std::map<std::string, double> uniform;
  for (const auto& r : rows) {
    if (r.method == "uniform") uniform[r.condition] = r.mean_auc;
  }
  std::vector<SummaryRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const auto it = uniform.find(r.condition);
    if (it == uniform.end()) {
      throw ConsistencyError("no uniform row for condition " + r.condition);
    }
    if (it->second == 0.0) throw NumericalError("uniform AUC is zero for " + r.condition);
    SummaryRow n = r;
    n.mean_auc /= it->second;
    n.ci95 /= it->second;
    out.push_back(std::move(n));
  }
  return out;
}

std::size_t peak_epoch(std::span<const double> curve, std::size_t window) {
  if (curve.empty()) throw DimensionError("peak_epoch of an empty curve");
  if (window == 0) window = 1;
  const std::size_t half = window / 2;
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::ptrdiff_t>(curve.size());
  const auto h = static_cast<std::ptrdiff_t>(half);
  for (std::size_t e = 0; e < curve.size(); ++e) {
    // Edge values are repeated so every epoch averages the same number of terms.
    double s = 0.0;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(e) - h; j <= static_cast<std::ptrdiff_t>(e) + h; ++j) {
      s += curve[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, n - 1))];
    }
    s /= static_cast<double>(2 * half + 1);
    // Strict improvement beyond rounding noise, so flat curves stay at the earliest epoch.
    if (e == 0 || s > best_value + 1e-12 * std::max(1.0, std::abs(best_value))) {
      best_value = s;
      best = e;
    }
  }
  return best;
}

std::vector<std::size_t> peak_epochs(const std::vector<std::vector<double>>& curves,
                                     std::size_t window) {
  std::vector<std::size_t> out;
  out.reserve(curves.size());
  for (const auto& c : curves) out.push_back(peak_epoch(c, window));
  return out;
}

}  // namespace gmc
