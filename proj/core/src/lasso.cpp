#include "pintmf/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pintmf/error.hpp"
#include "pintmf/random.hpp"

namespace pintmf::lasso {

namespace {

constexpr double kZeroColumn = 1e-300;

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

void LassoProblem::validate() const {
  if (design.rows() < 1 || design.cols() < 1) throw InputError("lasso: design must be at least 1x1");
  if (response.size() != design.rows())
    throw InputError("lasso: response length " + std::to_string(response.size()) + " does not match " +
                     std::to_string(design.rows()) + " design rows");
  if (!all_finite(design) || !response.allFinite()) throw InputError("lasso: non-finite input");
  if (weights.size() != 0) {
    if (weights.size() != design.cols()) throw InputError("lasso: weights length does not match design columns");
    if (!weights.allFinite() || (weights.array() <= 0.0).any())
      throw InputError("lasso: penalty weights must be strictly positive");
  }
}

Eigen::VectorXd LassoProblem::penalty_weights() const {
  if (weights.size() == 0) return Eigen::VectorXd::Ones(design.cols());
  return weights;
}

GramForm GramForm::from(const Eigen::Ref<const Eigen::MatrixXd>& design,
                        const Eigen::Ref<const Eigen::VectorXd>& response) {
  GramForm g;
  g.observations = design.rows();
  const double inv_m = 1.0 / static_cast<double>(design.rows());
  g.gram = (design.transpose() * design) * inv_m;
  g.cross = (design.transpose() * response) * inv_m;
  g.response_sq = response.squaredNorm() * inv_m;
  return g;
}

double GramForm::objective(const Eigen::VectorXd& beta, double lambda, const Eigen::VectorXd& weights) const {
  const double quad = response_sq - 2.0 * cross.dot(beta) + beta.dot(gram * beta);
  return 0.5 * quad + lambda * weights.cwiseProduct(beta.cwiseAbs()).sum();
}

GramSolveStats solve_gram(const Eigen::MatrixXd& gram, const Eigen::Ref<const Eigen::VectorXd>& cross,
                          const Eigen::VectorXd& weights, bool nonneg, double lambda, Eigen::VectorXd& beta,
                          const SolverOptions& opts) {
  const Eigen::Index q = gram.rows();
  if (beta.size() != q) beta = Eigen::VectorXd::Zero(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    if (gram(j, j) <= kZeroColumn) beta(j) = 0.0;
    if (nonneg && beta(j) < 0.0) beta(j) = 0.0;
  }

  Eigen::VectorXd gb = gram * beta;
  GramSolveStats stats;
  while (stats.iterations < opts.max_iter) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) {
      const double c = gram(j, j);
      if (c <= kZeroColumn) continue;
      const double z = cross(j) - gb(j) + c * beta(j);
      const double thr = lambda * weights(j);
      double next = soft_threshold(z, thr) / c;
      if (nonneg && next < 0.0) next = 0.0;
      const double delta = next - beta(j);
      if (delta != 0.0) {
        gb.noalias() += gram.col(j) * delta;
        beta(j) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    ++stats.iterations;
    if (max_change < opts.tol) {
      stats.converged = true;
      break;
    }
  }
  return stats;
}

GramSolveStats solve_gram(const GramForm& g, const Eigen::VectorXd& weights, bool nonneg, double lambda,
                          Eigen::VectorXd& beta, const SolverOptions& opts) {
  if (opts.sweep_objectives == nullptr) return solve_gram(g.gram, g.cross, weights, nonneg, lambda, beta, opts);

  // One sweep at a time so the objective can be recorded between sweeps.
  SolverOptions one = opts;
  one.max_iter = 1;
  one.sweep_objectives = nullptr;
  GramSolveStats total;
  while (total.iterations < opts.max_iter) {
    const auto s = solve_gram(g.gram, g.cross, weights, nonneg, lambda, beta, one);
    ++total.iterations;
    opts.sweep_objectives->push_back(g.objective(beta, lambda, weights));
    if (s.converged) {
      total.converged = true;
      break;
    }
  }
  return total;
}

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& beta, double lambda) {
  const double m = static_cast<double>(problem.observations());
  const Eigen::VectorXd r = problem.response - problem.design * beta;
  return r.squaredNorm() / (2.0 * m) + lambda * problem.penalty_weights().cwiseProduct(beta.cwiseAbs()).sum();
}

LassoSolution solve_lasso(const LassoProblem& problem, double lambda, const std::optional<Eigen::VectorXd>& warm_start,
                          const SolverOptions& opts) {
  problem.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lasso: lambda must be a finite non-negative value");
  if (!(opts.tol > 0.0)) throw InputError("lasso: tol must be positive");
  if (opts.max_iter < 1) throw InputError("lasso: max_iter must be at least 1");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(problem.coefficients());
  if (warm_start) {
    if (warm_start->size() != problem.coefficients()) throw InputError("lasso: warm start has the wrong length");
    if (!warm_start->allFinite()) throw InputError("lasso: non-finite warm start");
    if (problem.nonneg && (warm_start->array() < 0.0).any())
      throw InputError("lasso: warm start violates the non-negativity constraint");
    beta = *warm_start;
  }

  const GramForm g = GramForm::from(problem.design, problem.response);
  const Eigen::VectorXd w = problem.penalty_weights();
  const auto stats = solve_gram(g, w, problem.nonneg, lambda, beta, opts);

  LassoSolution sol;
  sol.beta = std::move(beta);
  sol.lambda = lambda;
  sol.objective = lasso_objective(problem, sol.beta, lambda);
  sol.iterations = stats.iterations;
  sol.converged = stats.converged;
  return sol;
}

double kkt_residual(const LassoProblem& problem, const Eigen::VectorXd& beta, double lambda) {
  const GramForm g = GramForm::from(problem.design, problem.response);
  const Eigen::VectorXd w = problem.penalty_weights();
  // z_j - c_j b_j = A_j'r/m with r the full residual.
  const Eigen::VectorXd corr = g.cross - g.gram * beta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (g.gram(j, j) <= kZeroColumn) continue;
    const double thr = lambda * w(j);
    double v = 0.0;
    if (beta(j) > 0.0) {
      v = std::abs(corr(j) - thr);
    } else if (beta(j) < 0.0) {
      v = problem.nonneg ? std::numeric_limits<double>::infinity() : std::abs(corr(j) + thr);
    } else {
      v = problem.nonneg ? std::max(0.0, corr(j) - thr) : std::max(0.0, std::abs(corr(j)) - thr);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double lambda_max(const Eigen::Ref<const Eigen::VectorXd>& cross, const Eigen::VectorXd& weights, bool nonneg) {
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < cross.size(); ++j) {
    const double z = nonneg ? std::max(cross(j), 0.0) : std::abs(cross(j));
    lmax = std::max(lmax, z / weights(j));
  }
  // Guard against rounding in lmax * w_j so that the path head is exactly all-zero.
  for (Eigen::Index j = 0; j < cross.size(); ++j) {
    const double z = nonneg ? std::max(cross(j), 0.0) : std::abs(cross(j));
    while (lmax * weights(j) < z) lmax = std::nextafter(lmax, std::numeric_limits<double>::infinity());
  }
  return lmax;
}

std::vector<double> lambda_path_from_max(double lmax, int n_lambda, double ratio) {
  if (n_lambda < 2) throw InputError("lambda path: n_lambda must be at least 2");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("lambda path: ratio must lie in (0, 1)");
  if (!(lmax > 0.0) || !std::isfinite(lmax)) throw DegeneratePathError();
  std::vector<double> path(static_cast<std::size_t>(n_lambda));
  const double step = std::log(ratio) / static_cast<double>(n_lambda - 1);
  path.front() = lmax;
  for (int i = 1; i < n_lambda - 1; ++i) path[static_cast<std::size_t>(i)] = lmax * std::exp(step * i);
  path.back() = lmax * ratio;
  return path;
}

std::vector<double> lambda_path(const LassoProblem& problem, int n_lambda, double ratio) {
  problem.validate();
  const GramForm g = GramForm::from(problem.design, problem.response);
  return lambda_path_from_max(lambda_max(g.cross, problem.penalty_weights(), problem.nonneg), n_lambda, ratio);
}

std::vector<int> assign_folds(Eigen::Index observations, int folds, std::uint64_t seed) {
  if (folds < 2) throw InputError("cv: folds must be at least 2");
  if (folds > observations)
    throw InputError("cv: " + std::to_string(folds) + " folds exceed " + std::to_string(observations) +
                     " observations");
  std::vector<int> order(static_cast<std::size_t>(observations));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle_in_place(order, rng);
  std::vector<int> fold(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    fold[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return fold;
}

namespace {

struct FoldSplit {
  std::vector<int> train;
  std::vector<int> test;
};

std::vector<FoldSplit> split_folds(const std::vector<int>& fold, int folds) {
  std::vector<FoldSplit> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < fold.size(); ++i) {
    for (int f = 0; f < folds; ++f) {
      auto& s = out[static_cast<std::size_t>(f)];
      (fold[i] == f ? s.test : s.train).push_back(static_cast<int>(i));
    }
  }
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

CvResult summarize(std::vector<double> path, const Eigen::MatrixXd& fold_errors, int folds, std::uint64_t seed) {
  CvResult res;
  res.lambda_path = std::move(path);
  res.fold_count = folds;
  res.fold_seed = seed;
  const auto nl = static_cast<Eigen::Index>(res.lambda_path.size());
  res.cv_error.resize(static_cast<std::size_t>(nl));
  res.cv_se.resize(static_cast<std::size_t>(nl));
  for (Eigen::Index l = 0; l < nl; ++l) {
    const double mean = fold_errors.col(l).mean();
    const double var = folds > 1 ? (fold_errors.col(l).array() - mean).square().sum() / (folds - 1) : 0.0;
    res.cv_error[static_cast<std::size_t>(l)] = mean;
    res.cv_se[static_cast<std::size_t>(l)] = std::sqrt(var / folds);
  }
  // Strict comparison keeps the first (largest) lambda among ties.
  std::size_t best = 0;
  for (std::size_t l = 1; l < res.cv_error.size(); ++l)
    if (res.cv_error[l] < res.cv_error[best]) best = l;
  res.index_min = best;
  res.lambda_min = res.lambda_path[best];
  return res;
}

}  // namespace

CvResult cv_select_lambda(const LassoProblem& problem, const CvOptions& opts) {
  problem.validate();
  const auto path = lambda_path(problem, opts.n_lambda, opts.ratio);
  const auto fold = assign_folds(problem.observations(), opts.folds, opts.seed);
  const auto splits = split_folds(fold, opts.folds);
  const Eigen::VectorXd w = problem.penalty_weights();

  Eigen::MatrixXd fold_errors(opts.folds, static_cast<Eigen::Index>(path.size()));
  for (int f = 0; f < opts.folds; ++f) {
    const auto& s = splits[static_cast<std::size_t>(f)];
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(s.train.size()));
    for (std::size_t r = 0; r < s.train.size(); ++r) y_train(static_cast<Eigen::Index>(r)) = problem.response(s.train[r]);
    const Eigen::MatrixXd a_train = take_rows(problem.design, s.train);
    const Eigen::MatrixXd a_test = take_rows(problem.design, s.test);
    Eigen::VectorXd y_test(static_cast<Eigen::Index>(s.test.size()));
    for (std::size_t r = 0; r < s.test.size(); ++r) y_test(static_cast<Eigen::Index>(r)) = problem.response(s.test[r]);

    const GramForm g = GramForm::from(a_train, y_train);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(problem.coefficients());
    for (std::size_t l = 0; l < path.size(); ++l) {
      solve_gram(g.gram, g.cross, w, problem.nonneg, path[l], beta, opts.solver);
      fold_errors(f, static_cast<Eigen::Index>(l)) =
          (y_test - a_test * beta).squaredNorm() / static_cast<double>(s.test.size());
    }
  }
  return summarize(path, fold_errors, opts.folds, opts.seed);
}

CvResult cv_select_shared_lambda(const Eigen::MatrixXd& design, const Eigen::MatrixXd& responses, bool nonneg,
                                 const CvOptions& opts) {
  if (design.rows() < 1 || design.cols() < 1 || responses.cols() < 1)
    throw InputError("cv: empty design or responses");
  if (responses.rows() != design.rows()) throw InputError("cv: responses and design disagree on row count");
  if (!design.allFinite() || !responses.allFinite()) throw InputError("cv: non-finite input");

  const Eigen::Index p = design.cols();
  const Eigen::Index cols = responses.cols();
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(p);

  const double inv_n = 1.0 / static_cast<double>(design.rows());
  const Eigen::MatrixXd cross_all = (design.transpose() * responses) * inv_n;
  double lmax = 0.0;
  for (Eigen::Index c = 0; c < cols; ++c) lmax = std::max(lmax, lambda_max(cross_all.col(c), w, nonneg));
  const auto path = lambda_path_from_max(lmax, opts.n_lambda, opts.ratio);
  const auto nl = static_cast<Eigen::Index>(path.size());

  const auto fold = assign_folds(design.rows(), opts.folds, opts.seed);
  const auto splits = split_folds(fold, opts.folds);

  Eigen::MatrixXd fold_errors(opts.folds, nl);
  for (int f = 0; f < opts.folds; ++f) {
    const auto& s = splits[static_cast<std::size_t>(f)];
    const Eigen::MatrixXd a_train = take_rows(design, s.train);
    const Eigen::MatrixXd a_test = take_rows(design, s.test);
    const Eigen::MatrixXd y_train = take_rows(responses, s.train);
    const Eigen::MatrixXd y_test = take_rows(responses, s.test);
    const double inv_m = 1.0 / static_cast<double>(s.train.size());
    const Eigen::MatrixXd gram = (a_train.transpose() * a_train) * inv_m;
    const Eigen::MatrixXd cross = (a_train.transpose() * y_train) * inv_m;

    // Per-column errors are reduced in column order afterwards, independent of scheduling.
    Eigen::MatrixXd col_err(cols, nl);
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cols; ++c) {
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
      for (Eigen::Index l = 0; l < nl; ++l) {
        solve_gram(gram, cross.col(c), w, nonneg, path[static_cast<std::size_t>(l)], beta, opts.solver);
        col_err(c, l) = (y_test.col(c) - a_test * beta).squaredNorm();
      }
    }
    const double count = static_cast<double>(s.test.size()) * static_cast<double>(cols);
    for (Eigen::Index l = 0; l < nl; ++l) {
      double sum = 0.0;
      for (Eigen::Index c = 0; c < cols; ++c) sum += col_err(c, l);
      fold_errors(f, l) = sum / count;
    }
  }
  return summarize(path, fold_errors, opts.folds, opts.seed);
}

}  // namespace pintmf::lasso
