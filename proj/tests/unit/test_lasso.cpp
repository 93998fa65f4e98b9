#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pintmf/error.hpp"
#include "pintmf/lasso.hpp"

using namespace pintmf;
using namespace pintmf::lasso;

namespace {

LassoProblem identity_problem(bool nonneg) {
  LassoProblem p;
  p.design = Eigen::MatrixXd::Identity(2, 2);
  p.response = Eigen::Vector2d(3.0, -1.0);
  p.nonneg = nonneg;
  return p;
}

LassoProblem random_problem(std::mt19937_64& rng, int m, int q, bool nonneg, bool weighted) {
  std::normal_distribution<double> nd(0.0, 1.0);
  LassoProblem p;
  p.design = Eigen::MatrixXd::NullaryExpr(m, q, [&] { return nd(rng); });
  p.response = Eigen::VectorXd::NullaryExpr(m, [&] { return nd(rng); });
  p.nonneg = nonneg;
  if (weighted) {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    p.weights = Eigen::VectorXd::NullaryExpr(q, [&] { return u(rng); });
  }
  return p;
}

// Penalty scale that is positive for every non-zero problem.
double scale_of(LassoProblem p) {
  p.nonneg = false;
  return lambda_path(p, 2, 0.5)[0];
}

}  // namespace

TEST_CASE("identity design, no penalty, gives the response") {
  const auto sol = solve_lasso(identity_problem(false), 0.0);
  CHECK(sol.beta(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sol.beta(1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(sol.converged);
}

TEST_CASE("identity design with non-negativity projects onto the orthant") {
  const auto sol = solve_lasso(identity_problem(true), 0.0);
  CHECK(sol.beta(0) == doctest::Approx(3.0));
  CHECK(sol.beta(1) == 0.0);
}

TEST_CASE("identity design soft-thresholds at m * lambda") {
  auto p = identity_problem(false);
  const auto sol = solve_lasso(p, 0.5);
  // beta_i = sign(y_i) max(|y_i| - m lambda, 0) with m = 2
  CHECK(sol.beta(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sol.beta(1) == 0.0);
  const Eigen::VectorXd ref = oracle::lasso_enumerate(p.design, p.response, Eigen::VectorXd::Ones(2), 0.5, false);
  CHECK((sol.beta - ref).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lambda_max and path endpoints") {
  const auto p = identity_problem(false);
  const auto path = lambda_path(p, 2, 0.01);
  REQUIRE(path.size() == 2);
  CHECK(path[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(path[1] == doctest::Approx(0.015).epsilon(1e-15));

  const auto full = lambda_path(p, 100, 0.01);
  for (std::size_t i = 1; i < full.size(); ++i) CHECK(full[i] < full[i - 1]);
  CHECK(full.front() == path[0]);
  CHECK(full.back() == path[1]);
}

TEST_CASE("path head gives exactly zero") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    const bool nonneg = t % 2 == 0;
    auto p = random_problem(rng, 7, 4, nonneg, t % 3 == 0);
    const double head = p.nonneg && (p.design.transpose() * p.response).maxCoeff() <= 0.0
                            ? 0.0
                            : lambda_path(p, 10, 0.1).front();
    const auto sol = solve_lasso(p, head);
    CHECK(sol.beta.isZero(0.0));
  }
}

TEST_CASE("all-zero response has a degenerate path") {
  auto p = identity_problem(false);
  p.response.setZero();
  CHECK_THROWS_AS(lambda_path(p, 10, 0.1), DegeneratePathError);
  CHECK_THROWS_WITH(lambda_path(p, 10, 0.1), "degenerate path");
}

TEST_CASE("non-negative path uses the positive part only") {
  auto p = identity_problem(true);
  p.response = Eigen::Vector2d(-3.0, 1.0);
  CHECK(lambda_path(p, 2, 0.5)[0] == doctest::Approx(0.5));
  p.response = Eigen::Vector2d(-3.0, -1.0);
  CHECK_THROWS_AS(lambda_path(p, 2, 0.5), DegeneratePathError);
}

TEST_CASE("input validation") {
  auto p = identity_problem(false);
  CHECK_THROWS_AS(solve_lasso(p, -1.0), InputError);
  p.design(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_lasso(p, 0.1), InputError);
  p = identity_problem(false);
  p.weights = Eigen::Vector2d(1.0, 0.0);
  CHECK_THROWS_AS(solve_lasso(p, 0.1), InputError);
  p = identity_problem(true);
  CHECK_THROWS_AS(solve_lasso(p, 0.1, Eigen::VectorXd(Eigen::Vector2d(-1.0, 0.0))), InputError);
  CHECK_THROWS_AS(solve_lasso(p, 0.1, Eigen::VectorXd(Eigen::Vector3d::Zero())), InputError);
  SolverOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(solve_lasso(identity_problem(false), 0.1, std::nullopt, bad), InputError);
  CHECK_THROWS_AS(lambda_path(identity_problem(false), 1, 0.1), InputError);
  CHECK_THROWS_AS(lambda_path(identity_problem(false), 5, 1.0), InputError);
}

TEST_CASE("zero design column stays at zero") {
  LassoProblem p;
  p.design = Eigen::MatrixXd(3, 2);
  p.design << 1, 0, 2, 0, -1, 0;
  p.response = Eigen::Vector3d(1, 2, 3);
  const auto sol = solve_lasso(p, 0.0);
  CHECK(sol.beta(1) == 0.0);
  CHECK(std::isfinite(sol.beta(0)));
  CHECK(sol.beta(0) == doctest::Approx(0.0 + (1 + 4 - 3) / 6.0));
}

TEST_CASE("reported objective matches the definition") {
  std::mt19937_64 rng(5);
  auto p = random_problem(rng, 6, 3, false, true);
  const auto sol = solve_lasso(p, 0.05);
  CHECK(sol.objective == doctest::Approx(oracle::lasso_objective(p.design, p.response, p.weights, 0.05, sol.beta))
                             .epsilon(1e-14));
}

TEST_CASE("objective never increases across sweeps") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 40; ++t) {
    auto p = random_problem(rng, 8, 4, t % 2 == 1, t % 4 == 0);
    const double lambda = 0.3 * scale_of(p);
    std::vector<double> sweeps;
    SolverOptions opts;
    opts.tol = 1e-12;
    opts.sweep_objectives = &sweeps;
    solve_lasso(p, lambda, std::nullopt, opts);
    REQUIRE(!sweeps.empty());
    for (std::size_t s = 1; s < sweeps.size(); ++s)
      CHECK(sweeps[s] <= sweeps[s - 1] + 1e-12 * std::abs(sweeps[s - 1]));
  }
}

TEST_CASE("matches the sign-enumeration oracle and satisfies KKT") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> mdist(1, 8);
  std::uniform_int_distribution<int> qdist(1, 4);
  SolverOptions opts;
  opts.tol = 1e-10;
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const int q = qdist(rng);
    const int m = std::max(mdist(rng), q);
    auto p = random_problem(rng, m, q, t % 2 == 0, t % 5 == 0);
    const double lmax = scale_of(p);
    const double lambda = lmax * std::uniform_real_distribution<double>(0.02, 1.1)(rng);
    const auto sol = solve_lasso(p, lambda, std::nullopt, opts);
    const auto ref = oracle::lasso_enumerate(p.design, p.response, p.penalty_weights(), lambda, p.nonneg);
    CHECK((sol.beta - ref).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(kkt_residual(p, sol.beta, lambda) <= 10 * opts.tol);
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("proximal-gradient oracle agrees on objective") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    auto p = random_problem(rng, 8, 3, t % 2 == 0, false);
    const double lambda = 0.2 * scale_of(p);
    const auto sol = solve_lasso(p, lambda);
    const auto ref = oracle::lasso_proximal_gradient(p.design, p.response, p.penalty_weights(), lambda, p.nonneg, 20000);
    const double f_ref = oracle::lasso_objective(p.design, p.response, p.penalty_weights(), lambda, ref);
    CHECK(sol.objective <= f_ref + 1e-9);
  }
}

TEST_CASE("warm start reaches the same solution") {
  std::mt19937_64 rng(3);
  auto p = random_problem(rng, 8, 4, false, false);
  const double lambda = 0.1 * scale_of(p);
  SolverOptions opts;
  opts.tol = 1e-12;
  const auto cold = solve_lasso(p, lambda, std::nullopt, opts);
  const auto warm = solve_lasso(p, lambda, Eigen::VectorXd::Constant(4, 5.0), opts);
  CHECK((cold.beta - warm.beta).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cross-validation: shape, determinism, noiseless data picks the smallest lambda") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  LassoProblem p;
  p.design = Eigen::MatrixXd::NullaryExpr(40, 3, [&] { return nd(rng); });
  p.response = p.design * Eigen::Vector3d(1.0, -2.0, 0.5);
  CvOptions opts;
  opts.seed = 42;
  opts.n_lambda = 30;
  const auto a = cv_select_lambda(p, opts);
  const auto b = cv_select_lambda(p, opts);
  CHECK(a.cv_error.size() == 30);
  CHECK(a.cv_se.size() == 30);
  CHECK(a.cv_error == b.cv_error);
  CHECK(a.lambda_min == b.lambda_min);
  CHECK(a.lambda_min == a.lambda_path.back());
  CHECK(a.fold_count == 5);
  CHECK(a.fold_seed == 42);

  opts.folds = 41;
  CHECK_THROWS_AS(cv_select_lambda(p, opts), InputError);
}

TEST_CASE("cross-validation ties resolve to the largest lambda") {
  LassoProblem p;
  p.design = Eigen::MatrixXd::Zero(10, 1);
  p.design(0, 0) = 1.0;
  p.response = Eigen::VectorXd::Zero(10);
  p.response(0) = 1.0;
  p.response(5) = 2.0;
  CvOptions opts;
  opts.folds = 10;
  opts.n_lambda = 5;
  const auto r = cv_select_lambda(p, opts);
  // Held-out predictions are zero on every path point (the only informative row is either held
  // out or predicts a row that is never tested), so all CV errors tie.
  for (double e : r.cv_error) CHECK(e == doctest::Approx(r.cv_error.front()).epsilon(1e-15));
  CHECK(r.index_min == 0);
  CHECK(r.lambda_min == r.lambda_path.front());
}

TEST_CASE("fold assignment is balanced and seeded") {
  const auto f1 = assign_folds(23, 5, 9);
  const auto f2 = assign_folds(23, 5, 9);
  const auto f3 = assign_folds(23, 5, 10);
  CHECK(f1 == f2);
  CHECK(f1 != f3);
  std::vector<int> count(5, 0);
  for (int f : f1) ++count[static_cast<std::size_t>(f)];
  for (int c : count) CHECK((c == 4 || c == 5));
}

TEST_CASE("shared-design cross-validation is deterministic and pools columns") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::MatrixXd W = Eigen::MatrixXd::NullaryExpr(30, 3, [&] { return std::abs(nd(rng)); });
  const Eigen::MatrixXd H = Eigen::MatrixXd::NullaryExpr(3, 12, [&] { return nd(rng); });
  const Eigen::MatrixXd X = W * H + 0.1 * Eigen::MatrixXd::NullaryExpr(30, 12, [&] { return nd(rng); });
  CvOptions opts;
  opts.seed = 3;
  opts.n_lambda = 20;
  const auto a = cv_select_shared_lambda(W, X, false, opts);
  const auto b = cv_select_shared_lambda(W, X, false, opts);
  CHECK(a.cv_error == b.cv_error);
  CHECK(a.cv_error.size() == 20);
  double lmax = 0.0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    LassoProblem p{W, X.col(c), false, {}};
    lmax = std::max(lmax, lambda_path(p, 2, 0.5)[0]);
  }
  CHECK(a.lambda_path.front() == doctest::Approx(lmax).epsilon(1e-14));
  // Single column: same as the ordinary CV on that problem.
  LassoProblem p0{W, X.col(0), false, {}};
  const auto single = cv_select_shared_lambda(W, X.col(0), false, opts);
  const auto plain = cv_select_lambda(p0, opts);
  for (std::size_t l = 0; l < plain.cv_error.size(); ++l)
    CHECK(single.cv_error[l] == doctest::Approx(plain.cv_error[l]).epsilon(1e-12));
}
