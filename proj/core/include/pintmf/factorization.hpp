#pragma once

// Penalized integrative matrix factorization.
//
// Blocks X^1..X^K (n x J_k) share one non-negative, row-normalized sample matrix W (n x P) and
// each has a sparse coefficient matrix H^k (P x J_k). The fit alternates lasso solves:
//   - each H^k column against the design W, with one penalty lambda_k per block;
//   - each W row against the stacked H^k', non-negative, with one penalty mu_i per sample;
// followed by dividing every W row by its sum.
//
// Tracked objective (solver scaling made consistent across both subproblems):
//   F = 1/2 sum_k ||X^k - W H^k||_F^2 + n sum_k lambda_k ||H^k||_1 + (sum_k J_k) sum_i mu_i ||w_i||_1

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pintmf/clustering.hpp"
#include "pintmf/dataset.hpp"
#include "pintmf/initialization.hpp"
#include "pintmf/lasso.hpp"

namespace pintmf {

enum class PenaltyMode { auto_cv, fixed };

std::string_view to_string(PenaltyMode mode);

struct PenaltyConfig {
  PenaltyMode mode = PenaltyMode::auto_cv;
  /// Per-block penalties (fixed mode; filled with the tuned values on a fitted model).
  std::vector<double> lambda;
  /// Per-sample penalties (fixed mode; filled with the tuned values on a fitted model).
  std::vector<double> mu;
  int cv_folds = 5;
  std::uint64_t seed = 0;

  static PenaltyConfig automatic(int folds = 5, std::uint64_t seed = 0);
  static PenaltyConfig fixed_values(std::vector<double> lambda, std::vector<double> mu);
  static PenaltyConfig fixed_uniform(std::size_t blocks, Eigen::Index samples, double lambda, double mu);

  void validate(std::size_t blocks, Eigen::Index samples) const;
};

struct FitOptions {
  int max_iter = 50;
  double ari_stop_threshold = 1.0;
  int stable_rounds = 2;
  double inner_tol = 1e-7;
  int inner_max_iter = 100000;
  init::InitSpec init;
  int n_lambda = 100;
  double lambda_ratio = 0.01;
  /// Columns sampled per block for the H penalty cross-validation.
  int h_cv_columns = 200;
  /// Auto mode: re-select penalties every outer iteration (false: only in the first).
  bool retune_penalties = true;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  std::vector<double> block_mse;
  /// ARI between the Ward partitions of consecutive W; absent on the first W.
  std::optional<double> ari_previous;
  std::vector<double> lambda;
  double mean_mu = 0.0;
  /// max_i |sum_p w_ip - 1| and min entry of W after normalization.
  double max_row_sum_error = 0.0;
  double min_weight = 0.0;
  /// Rows whose normalized lasso update was rejected because it fit worse (fixed mode).
  int rejected_rows = 0;
};

struct FitDiagnostics {
  /// Samples whose W row summed to zero at the last normalization (reset to 1/P).
  std::vector<int> zero_rows;
  /// Total zero-row resets over all iterations.
  int zero_row_resets = 0;
  /// Columns of the final W that are identically zero.
  std::vector<int> empty_components;
  std::vector<std::string> warnings;
};

struct FactorModel {
  Eigen::MatrixXd W;
  std::vector<Eigen::MatrixXd> H;
  int P = 0;
  PenaltyConfig penalties;
  std::vector<IterationRecord> history;
  bool converged = false;
  int iterations = 0;
  std::uint64_t seed = 0;
  FitDiagnostics diagnostics;

  /// Ward clustering of the rows of W cut at P.
  clustering::Partition clusters() const;
  Eigen::MatrixXd reconstruction(std::size_t block) const { return W * H[block]; }
};

/// Penalty for one subproblem family: a fixed value, or cross-validation.
struct PenaltyPolicy {
  std::optional<double> fixed;
  lasso::CvOptions cv;
};

struct HStep {
  Eigen::MatrixXd H;
  double lambda = 0.0;
  std::optional<lasso::CvResult> cv;
};

/// Solves one block's coefficient matrix column by column (the vectorized problem with design
/// I_J (x) W is block diagonal). `lambda` is in the per-column convention
/// (1/(2n))||x_j - W h_j||^2 + lambda |h_j|_1; the vectorized problem's own scaling
/// (1/(2nJ)) corresponds to lambda / J. In CV mode at most `cv_columns` columns are sampled.
HStep solve_H(const Eigen::MatrixXd& block, const Eigen::MatrixXd& W, const PenaltyPolicy& policy,
              int cv_columns = 200, const lasso::SolverOptions& solver = {},
              const Eigen::MatrixXd* warm_start = nullptr);

struct WStep {
  Eigen::MatrixXd W;
  std::vector<double> mu;
  /// Rows whose response has no positive correlation with any component (solution 0).
  std::vector<int> degenerate_rows;
};

/// Per-sample mu: either `fixed_mu` (one value per sample) or CV seeded per row from `cv.seed`.
struct MuPolicy {
  std::optional<std::vector<double>> fixed_mu;
  lasso::CvOptions cv;
};

/// Solves every W row independently: response = the sample's concatenated block profiles,
/// design = the H^k stacked side by side and transposed; non-negative lasso.
WStep solve_W(const MultiBlockDataset& data, const std::vector<Eigen::MatrixXd>& H, const MuPolicy& policy,
              const lasso::SolverOptions& solver = {}, const Eigen::MatrixXd* warm_start = nullptr);

struct NormalizedW {
  Eigen::MatrixXd W;
  std::vector<int> zero_rows;
};

/// Divides each row by its sum; rows summing below 1e-12 become uniform 1/P and are reported.
NormalizedW normalize_W(const Eigen::MatrixXd& W);

struct StopState {
  int iteration = 0;
  int stable = 0;
};

struct StopDecision {
  bool stop = false;
  bool by_ari = false;
  double ari = 0.0;
};

/// ARI between the Ward partitions (cut at P) of two W matrices.
double w_partition_ari(const Eigen::MatrixXd& W_prev, const Eigen::MatrixXd& W_curr, int P);

/// Advances `state` by one iteration; stops once the ARI has reached the threshold in
/// `stable_rounds` consecutive iterations, or when max_iter iterations have run.
StopDecision check_stop(const Eigen::MatrixXd& W_prev, const Eigen::MatrixXd& W_curr, int P, const FitOptions& opts,
                        StopState& state);

double penalized_objective(const MultiBlockDataset& data, const Eigen::MatrixXd& W,
                           const std::vector<Eigen::MatrixXd>& H, const std::vector<double>& lambda,
                           const std::vector<double>& mu);

/// Throws InputError for P outside [2, n], constant blocks or invalid options.
FactorModel fit(const MultiBlockDataset& data, int P, const PenaltyConfig& penalties, const FitOptions& opts = {});

}  // namespace pintmf
