#pragma once

// Criteria for choosing the number of latent variables P: reconstruction MSE, percentage of
// variation explained relative to each sample's mean profile, and the cophenetic correlation of
// the Ward tree built on W.

#include <optional>
#include <string>
#include <vector>

#include "pintmf/factorization.hpp"

namespace pintmf::selection {

struct BlockScores {
  std::vector<std::optional<double>> blocks;
  std::optional<double> total;
};

/// MSE^k = ||X^k - W H^k||_F^2 / (n J_k); total = mean over blocks.
BlockScores mse(const FactorModel& model, const MultiBlockDataset& data);

/// PVE^k = 1 - ||X^k - W H^k||^2 / ||X^k - rowmean(X^k) 1'||^2; global = mean of available blocks.
/// A block with a zero baseline is missing.
BlockScores pve(const FactorModel& model, const MultiBlockDataset& data);

struct SelectionReport {
  std::vector<int> p_values;
  std::vector<std::optional<double>> mse;
  std::vector<std::vector<std::optional<double>>> mse_blocks;
  std::vector<std::optional<double>> pve;
  std::vector<std::vector<std::optional<double>>> pve_blocks;
  std::vector<std::optional<double>> cophenetic;
  /// Empty when the fit for that P succeeded.
  std::vector<std::string> failures;
  int suggested_p = 0;
  /// "cophenetic", "cophenetic-no-knee" or "pve-plateau".
  std::string rule;
  bool no_knee = false;
};

struct Suggestion {
  int p = 0;
  bool no_knee = false;
};

/// Smallest scanned P whose successor has a strictly lower cophenetic coefficient; the largest P
/// with no_knee set when the sequence never decreases. Needs two present values.
Suggestion suggest_p(const SelectionReport& report);

/// Smallest scanned P whose successor raises the global PVE by less than `min_gain`;
/// the largest P when every step gains at least that much.
int pve_plateau(const SelectionReport& report, double min_gain = 0.01);

/// Fits one model per P (same penalties, options and seed) and fills every criterion.
/// Fit failures are recorded per P; throws NumericalError if all fail.
SelectionReport scan_p(const MultiBlockDataset& data, const std::vector<int>& p_values, const PenaltyConfig& penalties,
                       const FitOptions& opts = {}, std::vector<std::optional<FactorModel>>* models = nullptr);

}  // namespace pintmf::selection
