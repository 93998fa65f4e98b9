#include "pintmf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pintmf/error.hpp"

namespace pintmf::evaluation {

namespace {

double choose2(double x) { return x * (x - 1.0) / 2.0; }

std::vector<int> compact_labels(std::span<const int> labels, int& count) {
  std::map<int, int> index;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = index.emplace(l, static_cast<int>(index.size()));
    out.push_back(it->second);
  }
  count = static_cast<int>(index.size());
  return out;
}

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("ARI: partitions have different lengths");
  int ka = 0;
  int kb = 0;
  const auto la = compact_labels(a, ka);
  const auto lb = compact_labels(b, kb);

  std::vector<double> table(static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb), 0.0);
  std::vector<double> rows(static_cast<std::size_t>(ka), 0.0);
  std::vector<double> cols(static_cast<std::size_t>(kb), 0.0);
  for (std::size_t i = 0; i < la.size(); ++i) {
    table[static_cast<std::size_t>(la[i]) * static_cast<std::size_t>(kb) + static_cast<std::size_t>(lb[i])] += 1.0;
    rows[static_cast<std::size_t>(la[i])] += 1.0;
    cols[static_cast<std::size_t>(lb[i])] += 1.0;
  }

  double index = 0.0;
  for (double v : table) index += choose2(v);
  double sum_rows = 0.0;
  for (double v : rows) sum_rows += choose2(v);
  double sum_cols = 0.0;
  for (double v : cols) sum_cols += choose2(v);
  const double pairs = choose2(static_cast<double>(a.size()));
  const double expected = pairs > 0.0 ? sum_rows * sum_cols / pairs : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);

  if (max_index == expected) {
    // identical iff every non-empty cell fills its whole row and column
    if (ka != kb) return 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double v = table[r * static_cast<std::size_t>(kb) + c];
        if (v != 0.0 && (v != rows[r] || v != cols[c])) return 0.0;
      }
    return 1.0;
  }
  return (index - expected) / (max_index - expected);
}

double adjusted_rand_index(const clustering::Partition& a, const clustering::Partition& b) {
  return adjusted_rand_index(std::span<const int>(a.labels), std::span<const int>(b.labels));
}

double auroc(std::span<const double> scores, std::span<const char> truth) {
  if (scores.size() != truth.size()) throw InputError("AUROC: scores and truth differ in length");
  const auto positives = static_cast<double>(std::count_if(truth.begin(), truth.end(), [](char t) { return t != 0; }));
  const double negatives = static_cast<double>(truth.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw InputError("undefined ROC");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });

  // Walk tie groups; each group is one straight ROC segment.
  double area = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    double group_tp = 0.0;
    double group_fp = 0.0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      (truth[order[end]] != 0 ? group_tp : group_fp) += 1.0;
      ++end;
    }
    area += (group_fp / negatives) * ((tp + 0.5 * group_tp) / positives);
    tp += group_tp;
    fp += group_fp;
    start = end;
  }
  return area;
}

BlockRanking rank_block(const Eigen::MatrixXd& H, double threshold) {
  BlockRanking r;
  const Eigen::Index J = H.cols();
  r.scores.resize(static_cast<std::size_t>(J));
  r.selected.resize(static_cast<std::size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) {
    const auto col = H.col(j);
    const double mean = col.mean();
    r.scores[static_cast<std::size_t>(j)] = std::sqrt((col.array() - mean).square().mean());
    r.selected[static_cast<std::size_t>(j)] = (col.cwiseAbs().array() > threshold).any() ? 1 : 0;
  }
  r.order.resize(static_cast<std::size_t>(J));
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    return r.scores[static_cast<std::size_t>(a)] > r.scores[static_cast<std::size_t>(b)];
  });
  return r;
}

VariableRanking rank_variables(const FactorModel& model, double threshold) {
  VariableRanking out;
  out.reserve(model.H.size());
  for (const auto& h : model.H) out.push_back(rank_block(h, threshold));
  return out;
}

double auroc(const BlockRanking& ranking, std::span<const int> truth_indices) {
  std::vector<char> truth(ranking.scores.size(), 0);
  for (int j : truth_indices) {
    if (j < 0 || static_cast<std::size_t>(j) >= truth.size()) throw InputError("AUROC: truth index out of range");
    truth[static_cast<std::size_t>(j)] = 1;
  }
  return auroc(ranking.scores, truth);
}

StabilityReport jackknife(const MultiBlockDataset& data, int P, const PenaltyConfig& penalties,
                          const FitOptions& opts, double threshold) {
  data.validate();
  const Eigen::Index n = data.samples();
  if (n < 3) throw InputError("jackknife: at least 3 samples are required");
  penalties.validate(data.block_count(), n);

  StabilityReport report;
  report.run_count = static_cast<int>(n);
  std::vector<std::vector<int>> counts;
  for (const auto& b : data.blocks) counts.emplace_back(static_cast<std::size_t>(b.cols()), 0);

  for (Eigen::Index left_out = 0; left_out < n; ++left_out) {
    const auto subset = data.without_sample(left_out);
    PenaltyConfig pen = penalties;
    if (pen.mode == PenaltyMode::fixed) pen.mu.erase(pen.mu.begin() + left_out);
    try {
      const auto model = fit(subset, P, pen, opts);
      for (std::size_t k = 0; k < model.H.size(); ++k) {
        const auto ranking = rank_block(model.H[k], threshold);
        for (std::size_t j = 0; j < ranking.selected.size(); ++j) counts[k][j] += ranking.selected[j];
      }
    } catch (const std::exception& e) {
      ++report.failed_runs;
      report.warnings.push_back("jackknife: run without sample " + data.sample_ids[static_cast<std::size_t>(left_out)] +
                                " failed: " + e.what());
    }
  }

  const int successes = report.run_count - report.failed_runs;
  if (successes == 0) throw NumericalError("jackknife: every leave-one-out fit failed");
  if (report.failed_runs > 0)
    report.warnings.push_back("jackknife: frequencies use " + std::to_string(successes) + " successful runs");
  for (const auto& c : counts) {
    std::vector<double> f(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) f[j] = static_cast<double>(c[j]) / successes;
    report.frequency.push_back(std::move(f));
  }
  return report;
}

}  // namespace pintmf::evaluation
