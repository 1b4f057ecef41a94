#ifndef GMC_EXPERIMENT_HPP_
#define GMC_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gmc/analysis.hpp"
#include "gmc/config.hpp"
#include "gmc/datasets.hpp"
#include "gmc/rl_agents.hpp"

namespace gmc {

// Per-rollout curve of one gridworld run.
struct GridRun {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<double> mean_episodic_reward;
  std::vector<double> intrinsic_mean;

  double final_reward() const { return mean_episodic_reward.empty() ? 0.0 : mean_episodic_reward.back(); }
};

struct TTestRow {
  std::string condition;
  std::string baseline;
  double t_stat = 0.0;
  double p_value = 1.0;
};

struct SweepSummary {
  std::vector<SummaryRow> rows;
  std::vector<SummaryRow> normalized;  // empty when no "uniform" row exists
  std::vector<TTestRow> ttests;        // focal method vs every other method
};

// CSV schemas:
//   bandit metrics:    epoch,seed,method,group,test_loss,visit_count
//   gridworld metrics: rollout,seed,method,mean_episodic_reward,intrinsic_mean
//   summary:           condition,method,mean_auc,ci95,n   (gridworld: mean_final_reward)
//   t-tests:           condition,baseline,t_stat,p_value
void write_bandit_header(std::ostream& out);
void write_bandit_rows(std::ostream& out, const RunMetrics& run);
std::vector<RunMetrics> read_bandit_metrics(std::istream& in);

void write_grid_header(std::ostream& out);
void write_grid_rows(std::ostream& out, const std::string& method, std::uint64_t seed,
                     const std::vector<RolloutMetrics>& rollouts);
std::vector<GridRun> read_grid_metrics(std::istream& in);

// AUC of the group-averaged test loss per run, grouped by method in first-seen order.
SweepSummary summarize_bandit(const std::string& condition, const std::vector<RunMetrics>& runs,
                              const std::string& focal = "gmc");
// Final running-mean episodic reward per run.
SweepSummary summarize_grid(const std::string& condition, const std::vector<GridRun>& runs,
                            const std::string& focal = "icm_gmc");

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows,
                       const std::string& value_column = "mean_auc");
void write_ttest_csv(std::ostream& out, const std::vector<TTestRow>& rows);
std::vector<SummaryRow> read_summary_csv(std::istream& in);

// Shortest round-trip decimal form used in every CSV.
std::string format_double(double x);

LabeledSet load_dataset(const ExperimentConfig& config);

// Runs every (method, seed) pair and writes metrics.csv, summary.csv,
// summary_normalized.csv (bandit, when Uniform is present), ttest.csv and
// config.ini into config.output_dir. Progress lines go to `log` when given.
void run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

// Recomputes the summary files from an existing metrics.csv in `dir`.
void summarize_directory(const std::filesystem::path& dir, const std::string& condition);

}  // namespace gmc

#endif  // GMC_EXPERIMENT_HPP_
