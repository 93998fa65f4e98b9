#include "pintmf/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pintmf/error.hpp"
#include "pintmf/evaluation.hpp"
#include "pintmf/random.hpp"

namespace pintmf {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kTagHCv = 1;
constexpr std::uint64_t kTagWCv = 2;
constexpr std::uint64_t kTagColumns = 3;
constexpr double kZeroRowSum = 1e-12;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

double block_sq_error(const Eigen::MatrixXd& x, const Eigen::MatrixXd& W, const Eigen::MatrixXd& H) {
  return (x - W * H).squaredNorm();
}

}  // namespace

std::string_view to_string(PenaltyMode mode) { return mode == PenaltyMode::fixed ? "fixed" : "auto"; }

PenaltyConfig PenaltyConfig::automatic(int folds, std::uint64_t seed) {
  PenaltyConfig c;
  c.mode = PenaltyMode::auto_cv;
  c.cv_folds = folds;
  c.seed = seed;
  return c;
}

PenaltyConfig PenaltyConfig::fixed_values(std::vector<double> lambda, std::vector<double> mu) {
  PenaltyConfig c;
  c.mode = PenaltyMode::fixed;
  c.lambda = std::move(lambda);
  c.mu = std::move(mu);
  return c;
}

PenaltyConfig PenaltyConfig::fixed_uniform(std::size_t blocks, Eigen::Index samples, double lambda, double mu) {
  return fixed_values(std::vector<double>(blocks, lambda), std::vector<double>(static_cast<std::size_t>(samples), mu));
}

void PenaltyConfig::validate(std::size_t blocks, Eigen::Index samples) const {
  if (mode == PenaltyMode::fixed) {
    if (lambda.size() != blocks)
      throw InputError("penalties: fixed mode needs " + std::to_string(blocks) + " lambda values, got " +
                       std::to_string(lambda.size()));
    if (static_cast<Eigen::Index>(mu.size()) != samples)
      throw InputError("penalties: fixed mode needs " + std::to_string(samples) + " mu values, got " +
                       std::to_string(mu.size()));
    auto bad = [](double v) { return !(v >= 0.0) || !std::isfinite(v); };
    if (std::any_of(lambda.begin(), lambda.end(), bad) || std::any_of(mu.begin(), mu.end(), bad))
      throw InputError("penalties: values must be finite and non-negative");
  } else if (cv_folds < 2) {
    throw InputError("penalties: cross-validation needs at least 2 folds");
  }
}

void FitOptions::validate() const {
  if (max_iter < 1) throw InputError("fit: max_iter must be at least 1");
  if (!(ari_stop_threshold > 0.0 && ari_stop_threshold <= 1.0))
    throw InputError("fit: ARI stop threshold must lie in (0, 1]");
  if (stable_rounds < 1) throw InputError("fit: stable_rounds must be at least 1");
  if (!(inner_tol > 0.0)) throw InputError("fit: inner tolerance must be positive");
  if (inner_max_iter < 1) throw InputError("fit: inner max_iter must be at least 1");
  if (n_lambda < 2) throw InputError("fit: n_lambda must be at least 2");
  if (!(lambda_ratio > 0.0 && lambda_ratio < 1.0)) throw InputError("fit: lambda ratio must lie in (0, 1)");
  if (h_cv_columns < 1) throw InputError("fit: h_cv_columns must be positive");
  init.validate();
}

clustering::Partition FactorModel::clusters() const { return clustering::ward_partition(W, P); }

HStep solve_H(const Eigen::MatrixXd& block, const Eigen::MatrixXd& W, const PenaltyPolicy& policy, int cv_columns,
              const lasso::SolverOptions& solver, const Eigen::MatrixXd* warm_start) {
  if (block.rows() != W.rows()) throw InputError("solve_H: block and W disagree on the sample count");
  require_finite(block, "solve_H");
  require_finite(W, "solve_H");
  const Eigen::Index n = W.rows();
  const Eigen::Index P = W.cols();
  const Eigen::Index J = block.cols();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(P);

  const Eigen::MatrixXd gram = (W.transpose() * W) / static_cast<double>(n);
  const Eigen::MatrixXd cross = (W.transpose() * block) / static_cast<double>(n);

  HStep out;
  if (policy.fixed) {
    if (!(*policy.fixed >= 0.0)) throw InputError("solve_H: lambda must be non-negative");
    out.lambda = *policy.fixed;
  } else {
    std::vector<int> cols;
    if (J <= cv_columns) {
      cols.resize(static_cast<std::size_t>(J));
      std::iota(cols.begin(), cols.end(), 0);
    } else {
      Rng rng(derive_seed(policy.cv.seed, {kTagColumns}));
      cols = sample_without_replacement(static_cast<int>(J), cv_columns, rng);
      std::sort(cols.begin(), cols.end());
    }
    Eigen::MatrixXd responses(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) responses.col(static_cast<Eigen::Index>(c)) = block.col(cols[c]);
    try {
      out.cv = lasso::cv_select_shared_lambda(W, responses, false, policy.cv);
      out.lambda = out.cv->lambda_min;
    } catch (const DegeneratePathError&) {
      // No sampled column correlates with W: penalize everything to zero.
      double lmax = 0.0;
      for (Eigen::Index j = 0; j < J; ++j) lmax = std::max(lmax, lasso::lambda_max(cross.col(j), ones, false));
      out.lambda = lmax;
    }
  }

  out.H = Eigen::MatrixXd::Zero(P, J);
  if (warm_start != nullptr) {
    if (warm_start->rows() != P || warm_start->cols() != J) throw InputError("solve_H: warm start has the wrong shape");
    out.H = *warm_start;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < J; ++j) {
    Eigen::VectorXd h = out.H.col(j);
    lasso::solve_gram(gram, cross.col(j), ones, false, out.lambda, h, solver);
    out.H.col(j) = h;
  }
  return out;
}

WStep solve_W(const MultiBlockDataset& data, const std::vector<Eigen::MatrixXd>& H, const MuPolicy& policy,
              const lasso::SolverOptions& solver, const Eigen::MatrixXd* warm_start) {
  const std::size_t K = data.block_count();
  if (H.size() != K) throw InputError("solve_W: one H per block is required");
  const Eigen::Index n = data.samples();
  const Eigen::Index P = H.front().rows();
  const Eigen::Index m = data.total_variables();
  for (std::size_t k = 0; k < K; ++k) {
    if (H[k].rows() != P || H[k].cols() != data.blocks[k].cols()) throw InputError("solve_W: H shape mismatch");
    require_finite(H[k], "solve_W");
  }
  if (policy.fixed_mu && static_cast<Eigen::Index>(policy.fixed_mu->size()) != n)
    throw InputError("solve_W: one mu per sample is required");
  if (warm_start != nullptr && (warm_start->rows() != n || warm_start->cols() != P))
    throw InputError("solve_W: warm start has the wrong shape");

  // design rows are variables of all blocks, columns are components
  Eigen::MatrixXd design(m, P);
  Eigen::MatrixXd responses(m, n);
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const Eigen::Index jk = data.blocks[k].cols();
    design.middleRows(offset, jk) = H[k].transpose();
    responses.middleRows(offset, jk) = data.blocks[k].transpose();
    offset += jk;
  }
  const Eigen::MatrixXd gram = (design.transpose() * design) / static_cast<double>(m);
  const Eigen::MatrixXd cross = (design.transpose() * responses) / static_cast<double>(m);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(P);

  WStep out;
  out.W = Eigen::MatrixXd::Zero(n, P);
  out.mu.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<char> degenerate(static_cast<std::size_t>(n), 0);

#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd w = warm_start != nullptr ? Eigen::VectorXd(warm_start->row(i).transpose())
                                              : Eigen::VectorXd::Zero(P);
    double mu = 0.0;
    bool zero = false;
    if (policy.fixed_mu) {
      mu = (*policy.fixed_mu)[static_cast<std::size_t>(i)];
    } else {
      lasso::LassoProblem prob{design, responses.col(i), true, {}};
      lasso::CvOptions cv = policy.cv;
      cv.seed = derive_seed(policy.cv.seed, {static_cast<std::uint64_t>(i)});
      try {
        mu = lasso::cv_select_lambda(prob, cv).lambda_min;
      } catch (const DegeneratePathError&) {
        zero = true;
      }
    }
    if (zero) {
      w.setZero();
      degenerate[static_cast<std::size_t>(i)] = 1;
    } else {
      lasso::solve_gram(gram, cross.col(i), ones, true, mu, w, solver);
    }
    out.W.row(i) = w.transpose();
    out.mu[static_cast<std::size_t>(i)] = mu;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (degenerate[static_cast<std::size_t>(i)]) out.degenerate_rows.push_back(static_cast<int>(i));
  return out;
}

NormalizedW normalize_W(const Eigen::MatrixXd& W) {
  NormalizedW out;
  out.W = W;
  const Eigen::Index P = W.cols();
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    const double s = W.row(i).sum();
    if (!(s >= kZeroRowSum)) {
      out.W.row(i).setConstant(1.0 / static_cast<double>(P));
      out.zero_rows.push_back(static_cast<int>(i));
    } else {
      out.W.row(i) /= s;
    }
  }
  return out;
}

double w_partition_ari(const Eigen::MatrixXd& W_prev, const Eigen::MatrixXd& W_curr, int P) {
  if (W_prev.rows() != W_curr.rows() || W_prev.cols() != W_curr.cols())
    throw InputError("check_stop: W matrices differ in shape");
  return evaluation::adjusted_rand_index(clustering::ward_partition(W_prev, P), clustering::ward_partition(W_curr, P));
}

StopDecision check_stop(const Eigen::MatrixXd& W_prev, const Eigen::MatrixXd& W_curr, int P, const FitOptions& opts,
                        StopState& state) {
  StopDecision d;
  ++state.iteration;
  d.ari = w_partition_ari(W_prev, W_curr, P);
  state.stable = d.ari >= opts.ari_stop_threshold ? state.stable + 1 : 0;
  d.by_ari = state.stable >= opts.stable_rounds;
  d.stop = d.by_ari || state.iteration >= opts.max_iter;
  return d;
}

double penalized_objective(const MultiBlockDataset& data, const Eigen::MatrixXd& W,
                           const std::vector<Eigen::MatrixXd>& H, const std::vector<double>& lambda,
                           const std::vector<double>& mu) {
  const double n = static_cast<double>(data.samples());
  const double m = static_cast<double>(data.total_variables());
  double f = 0.0;
  for (std::size_t k = 0; k < data.block_count(); ++k) {
    f += 0.5 * block_sq_error(data.blocks[k], W, H[k]);
    f += n * lambda[k] * H[k].cwiseAbs().sum();
  }
  for (Eigen::Index i = 0; i < W.rows(); ++i) f += m * mu[static_cast<std::size_t>(i)] * W.row(i).cwiseAbs().sum();
  return f;
}

FactorModel fit(const MultiBlockDataset& data, int P, const PenaltyConfig& penalties, const FitOptions& opts) {
  data.validate();
  opts.validate();
  const std::size_t K = data.block_count();
  const Eigen::Index n = data.samples();
  penalties.validate(K, n);
  if (P < 2) throw InputError("fit: P must be at least 2");
  if (P > n) throw InputError("fit: P = " + std::to_string(P) + " exceeds the number of samples (" +
                              std::to_string(n) + ")");
  for (std::size_t k = 0; k < K; ++k) {
    const auto& x = data.blocks[k];
    if (x.maxCoeff() == x.minCoeff()) throw InputError("zero-variance block: " + data.block_names[k]);
  }

  FactorModel model;
  model.P = P;
  model.seed = penalties.seed;
  model.penalties = penalties;
  auto& diag = model.diagnostics;

  auto start = init::initialize(data, P, opts.init, &diag.warnings);
  const lasso::SolverOptions solver{opts.inner_tol, opts.inner_max_iter, nullptr};
  const bool fixed = penalties.mode == PenaltyMode::fixed;

  std::vector<double> lambda(K, 0.0);
  std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
  if (fixed) {
    lambda = penalties.lambda;
    mu = penalties.mu;
  }

  const bool h_first = start.W.has_value();
  bool have_w = h_first;
  Eigen::MatrixXd W = h_first ? *start.W : Eigen::MatrixXd();
  std::vector<Eigen::MatrixXd> H = std::move(start.H);

  auto cv_options = [&](std::uint64_t seed) {
    lasso::CvOptions cv;
    cv.folds = penalties.cv_folds;
    cv.seed = seed;
    cv.n_lambda = opts.n_lambda;
    cv.ratio = opts.lambda_ratio;
    cv.solver = solver;
    return cv;
  };
  auto tuning = [&](int t) { return !fixed && (opts.retune_penalties || t == 1); };

  auto update_H = [&](int t) {
    std::vector<Eigen::MatrixXd> next(K);
    for (std::size_t k = 0; k < K; ++k) {
      PenaltyPolicy pol;
      if (tuning(t))
        pol.cv = cv_options(derive_seed(penalties.seed, {kTagHCv, static_cast<std::uint64_t>(t), k}));
      else
        pol.fixed = lambda[k];
      const Eigen::MatrixXd* warm = H.size() == K ? &H[k] : nullptr;
      auto step = solve_H(data.blocks[k], W, pol, opts.h_cv_columns, solver, warm);
      next[k] = std::move(step.H);
      lambda[k] = step.lambda;
    }
    H = std::move(next);
  };

  // Returns the number of rows kept from the previous W.
  auto update_W = [&](int t) {
    MuPolicy pol;
    if (tuning(t))
      pol.cv = cv_options(derive_seed(penalties.seed, {kTagWCv, static_cast<std::uint64_t>(t)}));
    else
      pol.fixed_mu = mu;
    auto step = solve_W(data, H, pol, solver, have_w ? &W : nullptr);
    mu = step.mu;
    auto norm = normalize_W(step.W);
    diag.zero_rows = norm.zero_rows;
    diag.zero_row_resets += static_cast<int>(norm.zero_rows.size());

    int rejected = 0;
    if (fixed && have_w) {
      // On the simplex the mu term is constant, so keeping the better-fitting row never
      // increases the objective.
      for (Eigen::Index i = 0; i < n; ++i) {
        double err_new = 0.0;
        double err_old = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          err_new += (data.blocks[k].row(i) - norm.W.row(i) * H[k]).squaredNorm();
          err_old += (data.blocks[k].row(i) - W.row(i) * H[k]).squaredNorm();
        }
        if (err_new > err_old) {
          norm.W.row(i) = W.row(i);
          ++rejected;
        }
      }
    }
    W = std::move(norm.W);
    have_w = true;
    return rejected;
  };

  StopState stop;
  for (int t = 1; t <= opts.max_iter; ++t) {
    const Eigen::MatrixXd W_prev = W;
    const bool had_prev = have_w;

    int rejected = 0;
    if (h_first) {
      update_H(t);
      rejected = update_W(t);
    } else {
      rejected = update_W(t);
      update_H(t);
    }

    IterationRecord rec;
    rec.iteration = t;
    rec.objective = penalized_objective(data, W, H, lambda, mu);
    for (std::size_t k = 0; k < K; ++k)
      rec.block_mse.push_back(block_sq_error(data.blocks[k], W, H[k]) /
                              (static_cast<double>(n) * static_cast<double>(data.blocks[k].cols())));
    rec.lambda = lambda;
    rec.mean_mu = std::accumulate(mu.begin(), mu.end(), 0.0) / static_cast<double>(n);
    rec.max_row_sum_error = (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
    rec.min_weight = W.minCoeff();
    rec.rejected_rows = rejected;

    StopDecision decision;
    if (had_prev) {
      decision = check_stop(W_prev, W, P, opts, stop);
      rec.ari_previous = decision.ari;
    } else {
      ++stop.iteration;
      decision.stop = stop.iteration >= opts.max_iter;
    }
    model.history.push_back(std::move(rec));
    model.iterations = t;
    if (decision.stop) {
      model.converged = decision.by_ari;
      break;
    }
  }

  for (Eigen::Index p = 0; p < P; ++p)
    if (W.col(p).isZero(0.0)) model.diagnostics.empty_components.push_back(static_cast<int>(p));

  model.W = std::move(W);
  model.H = std::move(H);
  model.penalties.lambda = lambda;
  model.penalties.mu = mu;
  return model;
}

}  // namespace pintmf
