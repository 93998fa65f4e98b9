#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pintmf/clustering.hpp"
#include "pintmf/error.hpp"
#include "pintmf/evaluation.hpp"

using namespace pintmf;
using namespace pintmf::clustering;

namespace {

Eigen::MatrixXd line(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

std::vector<int> members(const Dendrogram& t, int node) {
  if (node < t.leaf_count) return {node};
  const auto& m = t.merges[static_cast<std::size_t>(node - t.leaf_count)];
  auto l = members(t, m.left);
  auto r = members(t, m.right);
  l.insert(l.end(), r.begin(), r.end());
  std::sort(l.begin(), l.end());
  return l;
}

}  // namespace

TEST_CASE("one-dimensional pairs merge first") {
  const auto t = ward_cluster(line({0.0, 0.1, 10.0, 10.1}));
  REQUIRE(t.merges.size() == 3);
  std::vector<std::vector<int>> first{members(t, 4), members(t, 5)};
  std::sort(first.begin(), first.end());
  CHECK(first == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  CHECK(t.merges[0].height == doctest::Approx(0.1));
  CHECK(t.merges[1].height == doctest::Approx(0.1));
  // ward.D2 height of two pairs with centroids 10 apart: sqrt(2 * (2*2/4) * 100) = sqrt(200)
  CHECK(t.merges[2].height == doctest::Approx(std::sqrt(200.0)));

  const auto p = cut(t, 2);
  CHECK(p.labels == std::vector<int>{1, 1, 2, 2});
}

TEST_CASE("exact ties resolve to the smallest pair") {
  const auto t = ward_cluster(line({10.0, 10.5, 0.0, 0.5}));
  CHECK(members(t, 4) == std::vector<int>{0, 1});
  CHECK(members(t, 5) == std::vector<int>{2, 3});
}

TEST_CASE("cut extremes") {
  const auto t = ward_cluster(line({3.0, 1.0, 4.0, 1.5, 9.0}));
  CHECK(cut(t, 1).labels == std::vector<int>{1, 1, 1, 1, 1});
  CHECK(cut(t, 5).labels == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(cut(t, 3).cluster_count() == 3);
}

TEST_CASE("labels follow first appearance") {
  const auto p = cut(ward_cluster(line({10.0, 0.0, 10.1, 0.1})), 2);
  CHECK(p.labels == std::vector<int>{1, 2, 1, 2});
}

TEST_CASE("duplicates merge at height zero") {
  const auto t = ward_cluster(line({2.0, 5.0, 2.0}));
  CHECK(t.merges[0].height == 0.0);
  CHECK(members(t, 3) == std::vector<int>{0, 2});
}

TEST_CASE("invariance to translation") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(12, 3, [&] { return nd(rng); });
  const Eigen::MatrixXd Y = X.rowwise() + Eigen::RowVector3d(100.0, -50.0, 3.0);
  const auto a = ward_cluster(X);
  const auto b = ward_cluster(Y);
  for (std::size_t t = 0; t < a.merges.size(); ++t) {
    CHECK(a.merges[t].left == b.merges[t].left);
    CHECK(a.merges[t].right == b.merges[t].right);
    CHECK(a.merges[t].height == doctest::Approx(b.merges[t].height).epsilon(1e-9));
  }
}

TEST_CASE("matches the centroid Ward oracle on small random sets") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    const Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(n, 2, [&] { return nd(rng); });
    const auto t = ward_cluster(X);
    const auto ref = oracle::ward_centroid(X);
    REQUIRE(ref.size() == t.merges.size());
    for (std::size_t s = 0; s < ref.size(); ++s) {
      const auto& m = t.merges[s];
      auto l = members(t, m.left);
      auto r = members(t, m.right);
      auto lo = ref[s].left_members;
      auto ro = ref[s].right_members;
      if (l.front() > r.front()) std::swap(l, r);
      if (lo.front() > ro.front()) std::swap(lo, ro);
      CHECK(l == lo);
      CHECK(r == ro);
      CHECK(m.height == doctest::Approx(ref[s].height).epsilon(1e-9));
    }
    for (int P = 1; P <= n; ++P) {
      // Oracle partition: undo the last P-1 merges.
      std::vector<int> lab(static_cast<std::size_t>(n));
      std::vector<std::vector<int>> groups;
      for (int i = 0; i < n; ++i) groups.push_back({i});
      for (std::size_t s = 0; s + static_cast<std::size_t>(P) < static_cast<std::size_t>(n); ++s) {
        std::vector<int> merged = ref[s].left_members;
        merged.insert(merged.end(), ref[s].right_members.begin(), ref[s].right_members.end());
        std::erase_if(groups, [&](const std::vector<int>& g) {
          return std::find(merged.begin(), merged.end(), g.front()) != merged.end();
        });
        groups.push_back(merged);
      }
      for (std::size_t g = 0; g < groups.size(); ++g)
        for (int i : groups[g]) lab[static_cast<std::size_t>(i)] = static_cast<int>(g);
      CHECK(evaluation::adjusted_rand_index(cut(t, P).labels, lab) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("heights are non-decreasing") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(40, 4, [&] { return nd(rng); });
  const auto t = ward_cluster(X);
  for (std::size_t s = 1; s < t.merges.size(); ++s) CHECK(t.merges[s].height >= t.merges[s - 1].height - 1e-12);
  CHECK(t.merges.back().size == 40);
}

TEST_CASE("cophenetic distances form an ultrametric") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  const int n = 15;
  const Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(n, 3, [&] { return nd(rng); });
  const auto c = cophenetic_distances(ward_cluster(X));
  auto at = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    return c[condensed_index(n, static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d)
        if (a != b && b != d && a != d) CHECK(at(a, d) <= std::max(at(a, b), at(b, d)) + 1e-12);
}

TEST_CASE("cophenetic distances of the 1-D example") {
  const auto t = ward_cluster(line({0.0, 0.1, 10.0, 10.1}));
  const auto c = cophenetic_distances(t);
  const double top = t.merges.back().height;
  CHECK(c[condensed_index(4, 0, 2)] == top);
  CHECK(c[condensed_index(4, 0, 3)] == top);
  CHECK(c[condensed_index(4, 1, 2)] == top);
  CHECK(c[condensed_index(4, 0, 1)] == doctest::Approx(0.1));
  CHECK(*std::min_element(c.begin(), c.end()) == t.merges.front().height);
}

TEST_CASE("equidistant groups are reproduced exactly") {
  // Two groups of duplicated points: the only distances are 0 and d, an ultrametric that Ward
  // reproduces.
  Eigen::MatrixXd X(6, 2);
  X << 0, 0, 0, 0, 0, 0, 3, 4, 3, 4, 3, 4;
  const auto t = ward_cluster(X);
  const auto c = cophenetic_distances(t);
  const auto d = condensed_distances(X);
  const auto top = t.merges.back().height;
  for (std::size_t k = 0; k < d.size(); ++k) CHECK((d[k] == 0.0 ? c[k] == 0.0 : c[k] == top));
}

TEST_CASE("cophenetic correlation") {
  SUBCASE("two equal groups of duplicates give 1") {
    Eigen::MatrixXd X(4, 1);
    X << 0, 0, 5, 5;
    CHECK(cophenetic_correlation(X) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("well-separated pairs of pairs") {
    Eigen::MatrixXd X(8, 2);
    X << 0, 0, 0.1, 0, 10, 0, 10.1, 0, 0, 100, 0.1, 100, 10, 100, 10.1, 100;
    CHECK(cophenetic_correlation(X) >= 0.99);
  }
  SUBCASE("identical points are degenerate") {
    const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 2);
    CHECK_THROWS_AS(cophenetic_correlation(X), DegenerateCorrelationError);
    CHECK_THROWS_WITH(cophenetic_correlation(X), "degenerate correlation");
  }
  SUBCASE("needs three points") { CHECK_THROWS_AS(cophenetic_correlation(line({1.0, 2.0})), InputError); }
}

TEST_CASE("row order does not change the partition") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  const int n = 20;
  Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(n, 2, [&] { return nd(rng); });
  for (int i = 0; i < n / 2; ++i) X(i, 0) += 8.0;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd Y(n, 2);
  for (int i = 0; i < n; ++i) Y.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
  const auto a = ward_partition(X, 3);
  const auto b = ward_partition(Y, 3);
  std::vector<int> a_perm(n);
  for (int i = 0; i < n; ++i) a_perm[static_cast<std::size_t>(i)] = a.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  CHECK(evaluation::adjusted_rand_index(a_perm, b.labels) == doctest::Approx(1.0));
}

TEST_CASE("distance-matrix entry point agrees with points") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(9, 3, [&] { return nd(rng); });
  Eigen::MatrixXd D(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) D(i, j) = (X.row(i) - X.row(j)).norm();
  const auto a = ward_cluster(X);
  const auto b = ward_cluster_distances(D);
  for (std::size_t s = 0; s < a.merges.size(); ++s) {
    CHECK(a.merges[s].left == b.merges[s].left);
    CHECK(a.merges[s].right == b.merges[s].right);
    CHECK(a.merges[s].height == doctest::Approx(b.merges[s].height).epsilon(1e-10));
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(ward_cluster(line({1.0})), InputError);
  Eigen::MatrixXd bad = line({1.0, std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(ward_cluster(bad), InputError);
  const auto t = ward_cluster(line({1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(cut(t, 0), InputError);
  CHECK_THROWS_AS(cut(t, 4), InputError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), InputError);
}
