#include "pintmf/initialization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "pintmf/clustering.hpp"
#include "pintmf/error.hpp"
#include "pintmf/random.hpp"

namespace pintmf::init {

namespace {

void warn(std::vector<std::string>* warnings, std::string msg) {
  if (warnings != nullptr) warnings->push_back(std::move(msg));
}

void check_p(const MultiBlockDataset& data, int P) {
  data.validate();
  if (P < 1) throw InputError("initialization: P must be at least 1");
  if (P > data.samples()) throw InputError("initialization: P exceeds the number of samples");
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (x.row(i) - x.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

// Off-diagonal row sums scaled to 1/2, diagonal fixed at 1/2.
Eigen::MatrixXd half_normalize(Eigen::MatrixXd w) {
  const Eigen::Index n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = w.row(i).sum() - w(i, i);
    if (s == 0.0) s = 1.0;
    w.row(i) /= 2.0 * s;
    w(i, i) = 0.5;
  }
  return w;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& w) { return 0.5 * (w + w.transpose()); }

// Keeps each row's `k` largest entries (the row's own entry included) and rescales rows to sum 1.
Eigen::MatrixXd dominant_set(const Eigen::MatrixXd& w, int k) {
  const Eigen::Index n = w.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(idx.begin(), idx.end(), 0);
    const auto keep = static_cast<std::ptrdiff_t>(std::min<Eigen::Index>(k, n));
    std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (w(i, a) != w(i, b)) return w(i, a) > w(i, b);
      return a < b;
    });
    double total = 0.0;
    for (std::ptrdiff_t t = 0; t < keep; ++t) total += w(i, idx[static_cast<std::size_t>(t)]);
    if (total <= 0.0) total = 1.0;
    for (std::ptrdiff_t t = 0; t < keep; ++t) {
      const auto j = idx[static_cast<std::size_t>(t)];
      s(i, j) = w(i, j) / total;
    }
  }
  return s;
}

int resolve_neighbors(int requested, Eigen::Index n, std::vector<std::string>* warnings) {
  int k = requested > 0 ? requested : std::max(2, static_cast<int>(n / 10));
  if (k >= n) {
    warn(warnings, "snf: neighbourhood size " + std::to_string(k) + " clamped to " + std::to_string(n - 1));
    k = static_cast<int>(n - 1);
  }
  return std::max(k, 1);
}

}  // namespace

std::string_view to_string(InitKind kind) {
  switch (kind) {
    case InitKind::snf: return "snf";
    case InitKind::svd: return "svd";
    case InitKind::hclust: return "hclust";
    case InitKind::random: return "random";
  }
  return "snf";
}

InitKind parse_init_kind(std::string_view name) {
  if (name == "snf") return InitKind::snf;
  if (name == "svd") return InitKind::svd;
  if (name == "hclust") return InitKind::hclust;
  if (name == "random") return InitKind::random;
  throw InputError("unknown initialization '" + std::string(name) + "' (expected snf, svd, hclust or random)");
}

void InitSpec::validate() const {
  if (snf.neighbors < 0) throw InputError("snf: neighbours must be positive");
  if (!(snf.alpha > 0.0)) throw InputError("snf: alpha must be positive");
  if (snf.fusion_iters < 1) throw InputError("snf: fusion iterations must be positive");
}

std::vector<Eigen::MatrixXd> init_svd(const MultiBlockDataset& data, int P, std::vector<std::string>* warnings) {
  check_p(data, P);
  std::vector<Eigen::MatrixXd> hs;
  for (std::size_t k = 0; k < data.block_count(); ++k) {
    const auto& x = data.blocks[k];
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();
    const double cutoff = s.size() > 0 ? s(0) * static_cast<double>(std::max(x.rows(), x.cols())) *
                                             std::numeric_limits<double>::epsilon()
                                       : 0.0;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(P, x.cols());
    int rank = 0;
    for (Eigen::Index p = 0; p < std::min<Eigen::Index>(P, s.size()); ++p) {
      if (!(s(p) > cutoff)) break;
      Eigen::VectorXd col = v.col(p);
      Eigen::Index arg = 0;
      col.cwiseAbs().maxCoeff(&arg);
      if (col(arg) < 0.0) col = -col;
      h.row(p) = col.transpose();
      ++rank;
    }
    if (rank < P)
      warn(warnings, "svd: block " + data.block_names[k] + " has rank " + std::to_string(rank) + " < P; " +
                         std::to_string(P - rank) + " zero rows used");
    hs.push_back(std::move(h));
  }
  return hs;
}

std::vector<Eigen::MatrixXd> init_hclust(const MultiBlockDataset& data, int P) {
  check_p(data, P);
  std::vector<Eigen::MatrixXd> hs;
  for (const auto& x : data.blocks) {
    const auto part = x.rows() >= 2 ? clustering::ward_partition(x, P)
                                    : clustering::Partition{std::vector<int>(static_cast<std::size_t>(x.rows()), 1)};
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(P, x.cols());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(P);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int p = part.labels[static_cast<std::size_t>(i)] - 1;
      h.row(p) += x.row(i);
      count(p) += 1.0;
    }
    for (Eigen::Index p = 0; p < P; ++p) h.row(p) /= count(p);
    hs.push_back(std::move(h));
  }
  return hs;
}

std::vector<Eigen::MatrixXd> init_random(const MultiBlockDataset& data, int P, std::uint64_t seed) {
  check_p(data, P);
  Rng rng(derive_seed(seed, {0x72616e64ULL}));
  const auto picks = sample_without_replacement(static_cast<int>(data.samples()), P, rng);
  std::vector<Eigen::MatrixXd> hs;
  for (const auto& x : data.blocks) {
    Eigen::MatrixXd h(P, x.cols());
    for (int p = 0; p < P; ++p) h.row(p) = x.row(picks[static_cast<std::size_t>(p)]);
    hs.push_back(std::move(h));
  }
  return hs;
}

Eigen::MatrixXd snf_affinity(const Eigen::MatrixXd& block, int neighbors, double alpha) {
  const Eigen::Index n = block.rows();
  const Eigen::MatrixXd d = pairwise_distances(block);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  // Mean distance to the k nearest neighbours (self included, as the 0 entry).
  Eigen::VectorXd local(n);
  std::vector<double> row(static_cast<std::size_t>(n));
  const auto keep = static_cast<std::size_t>(std::min<Eigen::Index>(neighbors + 1, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = d(i, j);
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), row.end());
    local(i) = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), 0.0) /
                   static_cast<double>(keep) +
               eps;
  }

  Eigen::MatrixXd w(n, n);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sigma = std::max((local(i) + local(j)) / 3.0 + d(i, j) / 3.0 + eps, eps);
      const double s = alpha * sigma;
      w(i, j) = std::exp(-0.5 * (d(i, j) / s) * (d(i, j) / s)) * inv_sqrt_2pi / s;
    }
  return symmetrize(w);
}

Eigen::MatrixXd snf_fuse(const std::vector<Eigen::MatrixXd>& affinities, int neighbors, int iterations) {
  if (affinities.empty()) throw InputError("snf: no affinities to fuse");
  const std::size_t views = affinities.size();
  std::vector<Eigen::MatrixXd> status(views);
  std::vector<Eigen::MatrixXd> local(views);
  for (std::size_t v = 0; v < views; ++v) {
    status[v] = symmetrize(half_normalize(affinities[v]));
    local[v] = dominant_set(status[v], neighbors);
  }

  const Eigen::Index n = affinities.front().rows();
  std::vector<Eigen::MatrixXd> next(views);
  for (int t = 0; t < iterations; ++t) {
    for (std::size_t v = 0; v < views; ++v) {
      // A single view diffuses against itself.
      Eigen::MatrixXd others = Eigen::MatrixXd::Zero(n, n);
      if (views == 1) {
        others = status[0];
      } else {
        for (std::size_t u = 0; u < views; ++u)
          if (u != v) others += status[u];
        others /= static_cast<double>(views - 1);
      }
      next[v] = local[v] * others * local[v].transpose();
    }
    for (std::size_t v = 0; v < views; ++v) status[v] = symmetrize(half_normalize(next[v]));
  }

  Eigen::MatrixXd fused = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : status) fused += s;
  fused /= static_cast<double>(views);
  return symmetrize(half_normalize(fused));
}

Eigen::MatrixXd init_snf(const MultiBlockDataset& data, int P, const SnfParams& params,
                         std::vector<std::string>* warnings) {
  check_p(data, P);
  const Eigen::Index n = data.samples();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, P);
  if (n == 1) {
    w(0, 0) = 1.0;
    return w;
  }
  const int k = resolve_neighbors(params.neighbors, n, warnings);
  std::vector<Eigen::MatrixXd> aff;
  aff.reserve(data.block_count());
  for (const auto& x : data.blocks) aff.push_back(snf_affinity(x, k, params.alpha));
  const Eigen::MatrixXd fused = snf_fuse(aff, k, params.fusion_iters);

  double top = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) top = std::max(top, fused(i, j));
  if (!(top > 0.0)) top = 1.0;
  Eigen::MatrixXd dist = (Eigen::MatrixXd::Ones(n, n) - fused / top).cwiseMax(0.0);
  dist.diagonal().setZero();

  const auto part = clustering::cut(clustering::ward_cluster_distances(dist), P);
  for (Eigen::Index i = 0; i < n; ++i) w(i, part.labels[static_cast<std::size_t>(i)] - 1) = 1.0;
  return w;
}

Initialization initialize(const MultiBlockDataset& data, int P, const InitSpec& spec,
                          std::vector<std::string>* warnings) {
  spec.validate();
  Initialization out;
  switch (spec.kind) {
    case InitKind::snf: out.W = init_snf(data, P, spec.snf, warnings); break;
    case InitKind::svd: out.H = init_svd(data, P, warnings); break;
    case InitKind::hclust: out.H = init_hclust(data, P); break;
    case InitKind::random: out.H = init_random(data, P, spec.seed); break;
  }
  return out;
}

}  // namespace pintmf::init
