#include "pintmf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pintmf/error.hpp"

namespace pintmf::clustering {

int Partition::cluster_count() const {
  std::vector<int> seen(labels);
  std::sort(seen.begin(), seen.end());
  return static_cast<int>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

namespace {

Dendrogram ward_from_squared(Eigen::MatrixXd d2) {
  const auto n = static_cast<int>(d2.rows());
  if (n < 2) throw InputError("ward: at least 2 observations are required");

  Dendrogram tree;
  tree.leaf_count = n;
  tree.merges.reserve(static_cast<std::size_t>(n - 1));

  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<int> node(static_cast<std::size_t>(n));
  std::iota(node.begin(), node.end(), 0);

  for (int step = 0; step < n - 1; ++step) {
    int bi = -1;
    int bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (d2(i, j) < best || bi < 0) {
          best = d2(i, j);
          bi = i;
          bj = j;
        }
      }
    }

    const double si = size[static_cast<std::size_t>(bi)];
    const double sj = size[static_cast<std::size_t>(bj)];
    for (int k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == bi || k == bj) continue;
      const double sk = size[static_cast<std::size_t>(k)];
      const double v = ((si + sk) * d2(bi, k) + (sj + sk) * d2(bj, k) - sk * best) / (si + sj + sk);
      d2(bi, k) = v;
      d2(k, bi) = v;
    }

    Merge m;
    m.left = node[static_cast<std::size_t>(bi)];
    m.right = node[static_cast<std::size_t>(bj)];
    m.height = std::sqrt(std::max(best, 0.0));
    m.size = size[static_cast<std::size_t>(bi)] + size[static_cast<std::size_t>(bj)];
    tree.merges.push_back(m);

    active[static_cast<std::size_t>(bj)] = 0;
    size[static_cast<std::size_t>(bi)] = m.size;
    node[static_cast<std::size_t>(bi)] = n + step;
  }
  return tree;
}

// Members of every node, leaves first.
std::vector<std::vector<int>> node_members(const Dendrogram& tree) {
  const auto n = static_cast<std::size_t>(tree.leaf_count);
  std::vector<std::vector<int>> members(n + tree.merges.size());
  for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};
  for (std::size_t t = 0; t < tree.merges.size(); ++t) {
    auto& out = members[n + t];
    const auto& a = members[static_cast<std::size_t>(tree.merges[t].left)];
    const auto& b = members[static_cast<std::size_t>(tree.merges[t].right)];
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
  }
  return members;
}

}  // namespace

Dendrogram ward_cluster(const Eigen::MatrixXd& points) {
  if (points.rows() < 2) throw InputError("ward: at least 2 observations are required");
  if (!points.allFinite()) throw InputError("ward: non-finite input");
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  return ward_from_squared(std::move(d2));
}

Dendrogram ward_cluster_distances(const Eigen::MatrixXd& distances) {
  if (distances.rows() != distances.cols()) throw InputError("ward: distance matrix must be square");
  if (distances.rows() < 2) throw InputError("ward: at least 2 observations are required");
  if (!distances.allFinite()) throw InputError("ward: non-finite input");
  return ward_from_squared(distances.cwiseProduct(distances));
}

Partition cut(const Dendrogram& tree, int clusters) {
  const int n = tree.leaf_count;
  if (clusters < 1 || clusters > n) throw InputError("cut: cluster count must lie in [1, n]");

  // union-find over the first n - clusters merges
  std::vector<int> parent(static_cast<std::size_t>(n) + tree.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int t = 0; t < n - clusters; ++t) {
    const auto& m = tree.merges[static_cast<std::size_t>(t)];
    const int node = n + t;
    parent[static_cast<std::size_t>(find(m.left))] = node;
    parent[static_cast<std::size_t>(find(m.right))] = node;
  }

  Partition p;
  p.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> label_of_root(parent.size(), 0);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    auto& l = label_of_root[static_cast<std::size_t>(r)];
    if (l == 0) l = ++next;
    p.labels[static_cast<std::size_t>(i)] = l;
  }
  return p;
}

Partition ward_partition(const Eigen::MatrixXd& points, int clusters) { return cut(ward_cluster(points), clusters); }

std::vector<double> condensed_distances(const Eigen::MatrixXd& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d.push_back((points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm());
  return d;
}

std::vector<double> cophenetic_distances(const Dendrogram& tree) {
  const auto n = static_cast<std::size_t>(tree.leaf_count);
  std::vector<double> coph(n * (n - 1) / 2, 0.0);
  const auto members = node_members(tree);
  for (const auto& m : tree.merges) {
    for (int a : members[static_cast<std::size_t>(m.left)]) {
      for (int b : members[static_cast<std::size_t>(m.right)]) {
        const auto i = static_cast<std::size_t>(std::min(a, b));
        const auto j = static_cast<std::size_t>(std::max(a, b));
        coph[condensed_index(n, i, j)] = m.height;
      }
    }
  }
  return coph;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw InputError("pearson: inputs must be non-empty and of equal length");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  // Variance below rounding level of the mean counts as zero.
  auto flat = [n](double ss, double mean) { return !(ss > n * std::pow(1e-12 * std::abs(mean), 2)); };
  if (flat(saa, ma) || flat(sbb, mb)) throw DegenerateCorrelationError();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double cophenetic_correlation(const Eigen::MatrixXd& points) {
  if (points.rows() < 3) throw InputError("cophenetic correlation: at least 3 observations are required");
  const auto d = condensed_distances(points);
  const auto c = cophenetic_distances(ward_cluster(points));
  return pearson(d, c);
}

}  // namespace pintmf::clustering
