#pragma once

#include <span>
#include <string>
#include <vector>

#include "pintmf/clustering.hpp"
#include "pintmf/factorization.hpp"

namespace pintmf::evaluation {

/// Adjusted Rand index over arbitrary integer labels. When the expected and maximum index
/// coincide the result is 1 for identical partitions and 0 otherwise.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);
double adjusted_rand_index(const clustering::Partition& a, const clustering::Partition& b);

/// Area under the ROC curve of `scores` (higher ranks first) against binary `truth`.
/// Tied scores share their credit (equivalent to the Mann-Whitney statistic).
/// Throws InputError("undefined ROC") unless truth has both classes.
double auroc(std::span<const double> scores, std::span<const char> truth);

struct BlockRanking {
  /// Variable indices by decreasing score, ties by index.
  std::vector<int> order;
  /// Population standard deviation of each H column across components.
  std::vector<double> scores;
  /// Column has at least one coefficient with |h| > threshold.
  std::vector<char> selected;
};

using VariableRanking = std::vector<BlockRanking>;

BlockRanking rank_block(const Eigen::MatrixXd& H, double threshold = 0.0);
VariableRanking rank_variables(const FactorModel& model, double threshold = 0.0);

/// AUROC of a ranking against true-positive variable indices.
double auroc(const BlockRanking& ranking, std::span<const int> truth_indices);

struct StabilityReport {
  /// frequency[k][j]: share of successful leave-one-out fits selecting variable j of block k.
  std::vector<std::vector<double>> frequency;
  int run_count = 0;
  int failed_runs = 0;
  std::vector<std::string> warnings;
};

/// Refits once per left-out sample (same options and seed) and counts how often each variable
/// has a coefficient with |h| > threshold.
StabilityReport jackknife(const MultiBlockDataset& data, int P, const PenaltyConfig& penalties,
                          const FitOptions& opts = {}, double threshold = 0.0);

}  // namespace pintmf::evaluation
