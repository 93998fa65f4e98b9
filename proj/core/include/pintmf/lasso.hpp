#pragma once

// Cyclic coordinate-descent lasso with optional non-negativity.
//
// Objective, for an m x q design A and response y:
//
//   (1/(2m)) ||y - A b||^2 + lambda * sum_j w_j |b_j|
//
// No intercept and no standardization. The solver works on the Gram form
// (A'A/m, A'y/m) so that many responses sharing one design reuse the same
// factorization-free precomputation.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace pintmf::lasso {

struct LassoProblem {
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  bool nonneg = false;
  /// Per-coefficient penalty multipliers; empty means all ones.
  Eigen::VectorXd weights;

  Eigen::Index observations() const { return design.rows(); }
  Eigen::Index coefficients() const { return design.cols(); }

  /// Throws InputError when shapes disagree, entries are non-finite or weights are not positive.
  void validate() const;
  Eigen::VectorXd penalty_weights() const;
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 100000;
  /// When set, receives the Gram-form objective after every full sweep (testing aid).
  std::vector<double>* sweep_objectives = nullptr;
};

struct LassoSolution {
  Eigen::VectorXd beta;
  double lambda = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Sufficient statistics of a least-squares problem: A'A/m, A'y/m and y'y/m.
struct GramForm {
  Eigen::MatrixXd gram;
  Eigen::VectorXd cross;
  double response_sq = 0.0;
  Eigen::Index observations = 0;

  static GramForm from(const Eigen::Ref<const Eigen::MatrixXd>& design,
                       const Eigen::Ref<const Eigen::VectorXd>& response);

  /// Objective evaluated through the Gram form.
  double objective(const Eigen::VectorXd& beta, double lambda, const Eigen::VectorXd& weights) const;
};

struct GramSolveStats {
  int iterations = 0;
  bool converged = false;
};

/// Coordinate descent on Gram statistics. `beta` holds the warm start on entry and the solution
/// on exit. Coordinates with a zero diagonal entry are pinned at 0.
GramSolveStats solve_gram(const Eigen::MatrixXd& gram, const Eigen::Ref<const Eigen::VectorXd>& cross,
                          const Eigen::VectorXd& weights, bool nonneg, double lambda, Eigen::VectorXd& beta,
                          const SolverOptions& opts);

/// Same, and fills opts.sweep_objectives when requested.
GramSolveStats solve_gram(const GramForm& g, const Eigen::VectorXd& weights, bool nonneg, double lambda,
                          Eigen::VectorXd& beta, const SolverOptions& opts);

LassoSolution solve_lasso(const LassoProblem& problem, double lambda,
                          const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                          const SolverOptions& opts = {});

/// Exact objective (1/(2m))||y - A b||^2 + lambda * sum w_j |b_j|.
double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& beta, double lambda);

/// Largest KKT violation at `beta`, in units of the coordinate gradient.
double kkt_residual(const LassoProblem& problem, const Eigen::VectorXd& beta, double lambda);

/// Smallest penalty at which the all-zero vector is optimal.
double lambda_max(const Eigen::Ref<const Eigen::VectorXd>& cross, const Eigen::VectorXd& weights, bool nonneg);

/// Log-spaced decreasing path from lambda_max down to ratio * lambda_max.
/// Throws DegeneratePathError when lambda_max is zero.
std::vector<double> lambda_path(const LassoProblem& problem, int n_lambda, double ratio);
std::vector<double> lambda_path_from_max(double lmax, int n_lambda, double ratio);

struct CvResult {
  std::vector<double> lambda_path;
  std::vector<double> cv_error;
  std::vector<double> cv_se;
  double lambda_min = 0.0;
  std::size_t index_min = 0;
  int fold_count = 0;
  std::uint64_t fold_seed = 0;
};

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  int n_lambda = 100;
  double ratio = 0.01;
  SolverOptions solver;
};

/// K-fold cross-validation over observations. Folds come from a seeded shuffle; every fold is
/// fit along the full-data path with warm starts. Ties in CV error resolve to the largest lambda.
CvResult cv_select_lambda(const LassoProblem& problem, const CvOptions& opts);

/// Cross-validation for a family of lasso problems sharing one design and one penalty:
/// column c of `responses` is regressed on `design`. Folds partition the design rows and are
/// shared by all columns; the CV error pools every held-out entry. The path head is the
/// largest per-column lambda_max.
CvResult cv_select_shared_lambda(const Eigen::MatrixXd& design, const Eigen::MatrixXd& responses,
                                 bool nonneg, const CvOptions& opts);

/// Fold label (0..folds-1) per observation from a seeded shuffle.
std::vector<int> assign_folds(Eigen::Index observations, int folds, std::uint64_t seed);

}  // namespace pintmf::lasso
