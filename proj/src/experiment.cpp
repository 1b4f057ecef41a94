#include "gmc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "gmc/bandit_env.hpp"
#include "gmc/errors.hpp"

namespace gmc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError("expected CSV header '" + header + "', got '" + line + "'");
  }
}

// Groups values by method in first-seen order.
std::vector<std::pair<std::string, std::vector<double>>> by_method(
    const std::vector<std::pair<std::string, double>>& values) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  for (const auto& [method, v] : values) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == method; });
    if (it == out.end()) {
      out.push_back({method, {}});
      it = out.end() - 1;
    }
    it->second.push_back(v);
  }
  return out;
}

SweepSummary summarize_values(const std::string& condition,
                              const std::vector<std::pair<std::string, double>>& values,
                              const std::string& focal) {
  SweepSummary s;
  const auto grouped = by_method(values);
  for (const auto& [method, xs] : grouped) s.rows.push_back(summarize_aucs(condition, method, xs));
  const bool has_uniform = std::any_of(s.rows.begin(), s.rows.end(),
                                       [](const SummaryRow& r) { return r.method == "uniform"; });
  if (has_uniform) s.normalized = normalize_by_uniform(s.rows);
  const auto f = std::find_if(grouped.begin(), grouped.end(), [&](const auto& p) { return p.first == focal; });
  if (f != grouped.end() && f->second.size() >= 2) {
    for (const auto& [method, xs] : grouped) {
      if (method == focal || xs.size() < 2) continue;
      const WelchResult w = welch_t_test(f->second, xs);
      s.ttests.push_back(TTestRow{condition, method, w.t_stat, w.p_value});
    }
  }
  return s;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_summaries(const std::filesystem::path& dir, const SweepSummary& s, Track track) {
  const std::string column = track == Track::kBandit ? "mean_auc" : "mean_final_reward";
  {
    auto out = open_out(dir / "summary.csv");
    write_summary_csv(out, s.rows, column);
  }
  if (!s.normalized.empty()) {
    auto out = open_out(dir / "summary_normalized.csv");
    write_summary_csv(out, s.normalized, column);
  }
  auto out = open_out(dir / "ttest.csv");
  write_ttest_csv(out, s.ttests);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_bandit_header(std::ostream& out) {
  out << "epoch,seed,method,group,test_loss,visit_count\n";
}

void write_bandit_rows(std::ostream& out, const RunMetrics& run) {
  for (std::size_t e = 0; e < run.epochs(); ++e) {
    for (std::size_t g = 0; g < run.test_loss[e].size(); ++g) {
      out << e << ',' << run.seed << ',' << run.method << ',' << GroupScheme::group_name(static_cast<int>(g))
          << ',' << format_double(run.test_loss[e][g]) << ',' << format_double(run.visits[e][g]) << '\n';
    }
  }
}

std::vector<RunMetrics> read_bandit_metrics(std::istream& in) {
  expect_header(in, "epoch,seed,method,group,test_loss,visit_count");
  std::vector<RunMetrics> runs;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6 || cells[3].size() != 1) {
      throw FormatError("CSV line " + std::to_string(line_no) + ": expected 6 fields");
    }
    const std::size_t epoch = to_u64(cells[0], line_no);
    const std::uint64_t seed = to_u64(cells[1], line_no);
    const int group = cells[3][0] - 'A';
    if (group < 0 || group >= GroupScheme::kNumGroups) {
      throw FormatError("CSV line " + std::to_string(line_no) + ": unknown group '" + cells[3] + "'");
    }
    const auto key = std::make_pair(cells[2], seed);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, runs.size()).first;
      runs.push_back(RunMetrics{cells[2], seed, {}, {}});
    }
    RunMetrics& run = runs[it->second];
    if (epoch >= run.test_loss.size()) {
      run.test_loss.resize(epoch + 1, std::vector<double>(GroupScheme::kNumGroups, 0.0));
      run.visits.resize(epoch + 1, std::vector<double>(GroupScheme::kNumGroups, 0.0));
    }
    run.test_loss[epoch][static_cast<std::size_t>(group)] = to_double(cells[4], line_no);
    run.visits[epoch][static_cast<std::size_t>(group)] = to_double(cells[5], line_no);
  }
  return runs;
}

void write_grid_header(std::ostream& out) {
  out << "rollout,seed,method,mean_episodic_reward,intrinsic_mean\n";
}

void write_grid_rows(std::ostream& out, const std::string& method, std::uint64_t seed,
                     const std::vector<RolloutMetrics>& rollouts) {
  for (std::size_t r = 0; r < rollouts.size(); ++r) {
    out << r << ',' << seed << ',' << method << ',' << format_double(rollouts[r].mean_episode_reward) << ','
        << format_double(rollouts[r].mean_intrinsic) << '\n';
  }
}

std::vector<GridRun> read_grid_metrics(std::istream& in) {
  expect_header(in, "rollout,seed,method,mean_episodic_reward,intrinsic_mean");
  std::vector<GridRun> runs;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw FormatError("CSV line " + std::to_string(line_no) + ": expected 5 fields");
    const std::size_t rollout = to_u64(cells[0], line_no);
    const std::uint64_t seed = to_u64(cells[1], line_no);
    const auto key = std::make_pair(cells[2], seed);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, runs.size()).first;
      runs.push_back(GridRun{cells[2], seed, {}, {}});
    }
    GridRun& run = runs[it->second];
    if (rollout >= run.mean_episodic_reward.size()) {
      run.mean_episodic_reward.resize(rollout + 1, 0.0);
      run.intrinsic_mean.resize(rollout + 1, 0.0);
    }
    run.mean_episodic_reward[rollout] = to_double(cells[3], line_no);
    run.intrinsic_mean[rollout] = to_double(cells[4], line_no);
  }
  return runs;
}

SweepSummary summarize_bandit(const std::string& condition, const std::vector<RunMetrics>& runs,
                              const std::string& focal) {
  std::vector<std::pair<std::string, double>> values;
  for (const auto& r : runs) values.emplace_back(r.method, auc(r.mean_test_loss()));
  return summarize_values(condition, values, focal);
}

SweepSummary summarize_grid(const std::string& condition, const std::vector<GridRun>& runs,
                            const std::string& focal) {
  std::vector<std::pair<std::string, double>> values;
  for (const auto& r : runs) values.emplace_back(r.method, r.final_reward());
  return summarize_values(condition, values, focal);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows,
                       const std::string& value_column) {
  out << "condition,method," << value_column << ",ci95,n\n";
  for (const auto& r : rows) {
    out << r.condition << ',' << r.method << ',' << format_double(r.mean_auc) << ','
        << format_double(r.ci95) << ',' << r.n << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("condition,method,", 0) != 0) {
    throw FormatError("not a summary CSV");
  }
  std::vector<SummaryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 5) throw FormatError("CSV line " + std::to_string(line_no) + ": expected 5 fields");
    rows.push_back(SummaryRow{c[0], c[1], to_double(c[2], line_no), to_double(c[3], line_no),
                              static_cast<std::size_t>(to_u64(c[4], line_no))});
  }
  return rows;
}

void write_ttest_csv(std::ostream& out, const std::vector<TTestRow>& rows) {
  out << "condition,baseline,t_stat,p_value\n";
  for (const auto& r : rows) {
    out << r.condition << ',' << r.baseline << ',' << format_double(r.t_stat) << ','
        << format_double(r.p_value) << '\n';
  }
}

LabeledSet load_dataset(const ExperimentConfig& config) {
  switch (config.data_source) {
    case DataSource::kSynthetic:
      return generate_synthetic(config.synthetic);
    case DataSource::kMnist:
      return load_mnist_idx(config.mnist_images, config.mnist_labels);
    case DataSource::kCifar10:
      return load_cifar10_bin(config.cifar_batches);
  }
  throw ConfigError("unknown data source");
}

void run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "config.ini");
    out << dump_config(config);
  }
  const std::string condition(to_string(config.condition));
  auto metrics = open_out(dir / "metrics.csv");

  if (config.track == Track::kBandit) {
    const LabeledSet data = load_dataset(config);
    write_bandit_header(metrics);
    std::vector<RunMetrics> runs;
    for (const auto& method : config.methods) {
      const BanditConfig bc = config.bandit_for(method);
      for (std::uint64_t seed : config.seeds) {
        RunMetrics run;
        try {
          run = run_bandit(bc, data, seed);
        } catch (const NumericalError& e) {
          throw NumericalError("bandit " + condition + " " + method + " seed " + std::to_string(seed) + ": " +
                               e.what());
        }
        write_bandit_rows(metrics, run);
        metrics.flush();
        if (log) *log << "bandit " << condition << ' ' << method << " seed " << seed << " auc "
                      << format_double(auc(run.mean_test_loss())) << '\n';
        runs.push_back(std::move(run));
      }
    }
    write_summaries(dir, summarize_bandit(condition, runs), config.track);
  } else {
    write_grid_header(metrics);
    std::vector<GridRun> runs;
    for (const auto& method : config.methods) {
      const RlConfig rc = config.rl_for(method);
      for (std::uint64_t seed : config.seeds) {
        RlRunResult res;
        try {
          res = run_rl(rc, seed);
        } catch (const NumericalError& e) {
          throw NumericalError("gridworld " + condition + " " + method + " seed " + std::to_string(seed) +
                               ": " + e.what());
        }
        write_grid_rows(metrics, method, seed, res.rollouts);
        metrics.flush();
        GridRun gr{method, seed, {}, {}};
        for (const auto& m : res.rollouts) {
          gr.mean_episodic_reward.push_back(m.mean_episode_reward);
          gr.intrinsic_mean.push_back(m.mean_intrinsic);
        }
        if (log) *log << "gridworld " << condition << ' ' << method << " seed " << seed
                      << " final_reward " << format_double(gr.final_reward()) << '\n';
        runs.push_back(std::move(gr));
      }
    }
    write_summaries(dir, summarize_grid(condition, runs), config.track);
  }
}

void summarize_directory(const std::filesystem::path& dir, const std::string& condition) {
  std::ifstream in(dir / "metrics.csv", std::ios::binary);
  if (!in) throw FormatError("no metrics.csv in " + dir.string());
  std::string header;
  std::getline(in, header);
  in.seekg(0);
  if (header.rfind("epoch,", 0) == 0) {
    write_summaries(dir, summarize_bandit(condition, read_bandit_metrics(in)), Track::kBandit);
  } else if (header.rfind("rollout,", 0) == 0) {
    write_summaries(dir, summarize_grid(condition, read_grid_metrics(in)), Track::kGridworld);
  } else {
    throw FormatError("unrecognized metrics.csv header '" + header + "'");
  }
}

}  // namespace gmc
