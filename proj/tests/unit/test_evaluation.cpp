#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pintmf/error.hpp"
#include "pintmf/evaluation.hpp"
#include "pintmf/simulate.hpp"

using namespace pintmf;
using namespace pintmf::evaluation;

TEST_CASE("ARI worked examples") {
  CHECK(adjusted_rand_index(std::vector<int>{1, 1, 2, 2}, std::vector<int>{1, 1, 2, 2}) == 1.0);
  CHECK(adjusted_rand_index(std::vector<int>{1, 1, 2, 2}, std::vector<int>{1, 2, 1, 2}) == doctest::Approx(-0.5));
  CHECK(adjusted_rand_index(std::vector<int>{1, 1, 2, 2, 3}, std::vector<int>{7, 7, 4, 4, 9}) == 1.0);
  CHECK_THROWS_AS(adjusted_rand_index(std::vector<int>{1, 2}, std::vector<int>{1, 2, 3}), InputError);
}

TEST_CASE("ARI degenerate denominator") {
  // All singletons vs all singletons, and one cluster vs one cluster: Max == Expected.
  CHECK(adjusted_rand_index(std::vector<int>{1, 2, 3}, std::vector<int>{3, 1, 2}) == 1.0);
  CHECK(adjusted_rand_index(std::vector<int>{1, 1, 1}, std::vector<int>{2, 2, 2}) == 1.0);
  CHECK(adjusted_rand_index(std::vector<int>{1, 1, 1}, std::vector<int>{1, 2, 3}) == 0.0);
  CHECK(adjusted_rand_index(std::vector<int>{5}, std::vector<int>{2}) == 1.0);
}

TEST_CASE("ARI equals pair counting on every pair of partitions up to n = 5") {
  for (int n = 1; n <= 5; ++n) {
    const auto parts = oracle::set_partitions(n);
    for (const auto& a : parts)
      for (const auto& b : parts) {
        const double got = adjusted_rand_index(a, b);
        CHECK(std::abs(got - oracle::ari_pairs(a, b)) <= 1e-12);
        CHECK(got == adjusted_rand_index(b, a));
      }
  }
}

TEST_CASE("AUROC examples") {
  const std::vector<double> s{0.9, 0.8, 0.1, 0.0};
  CHECK(auroc(s, std::vector<char>{1, 1, 0, 0}) == 1.0);
  CHECK(auroc(s, std::vector<char>{0, 0, 1, 1}) == 0.0);
  CHECK(auroc(std::vector<double>{2.0, 1.0}, std::vector<char>{0, 1}) == 0.0);
  CHECK(auroc(std::vector<double>{2.0, 1.0}, std::vector<char>{1, 0}) == 1.0);
  CHECK(auroc(std::vector<double>{1.0, 1.0}, std::vector<char>{1, 0}) == 0.5);
  CHECK_THROWS_WITH(auroc(s, std::vector<char>{0, 0, 0, 0}), "undefined ROC");
  CHECK_THROWS_WITH(auroc(s, std::vector<char>{1, 1, 1, 1}), "undefined ROC");
}

TEST_CASE("AUROC matches the pairwise statistic, with ties, and negation flips it") {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> level(0, 4);
  std::bernoulli_distribution coin(0.4);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + t % 15;
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<char> truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = level(rng);
      truth[static_cast<std::size_t>(i)] = coin(rng);
    }
    truth[0] = 1;
    truth[1] = 0;
    const double a = auroc(scores, truth);
    CHECK(a == doctest::Approx(oracle::auroc_pairs(scores, truth)).epsilon(1e-12));
    std::vector<double> neg(scores);
    for (auto& v : neg) v = -v;
    CHECK(auroc(neg, truth) == doctest::Approx(1.0 - a).epsilon(1e-12));
  }
}

TEST_CASE("ranking scores and selection") {
  Eigen::MatrixXd H(2, 4);
  H << 0, 1, 3, 0.5, 0, -1, 3, 0;
  const auto r = rank_block(H);
  CHECK(r.scores[0] == 0.0);
  CHECK(r.scores[1] == doctest::Approx(1.0));
  CHECK(r.scores[2] == 0.0);
  CHECK(r.scores[3] == doctest::Approx(0.25));
  CHECK(r.selected == std::vector<char>{0, 1, 1, 1});
  CHECK(r.order == std::vector<int>{1, 3, 0, 2});

  const auto thresholded = rank_block(H, 0.6);
  CHECK(thresholded.selected == std::vector<char>{0, 1, 1, 0});
}

TEST_CASE("ranking is invariant to permuting components") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd H = Eigen::MatrixXd::NullaryExpr(4, 30, [&] { return nd(rng); });
  Eigen::MatrixXd Hp(4, 30);
  Hp << H.row(2), H.row(0), H.row(3), H.row(1);
  CHECK(rank_block(H).order == rank_block(Hp).order);
}

TEST_CASE("ranking AUROC uses the truth indices") {
  Eigen::MatrixXd H(2, 3);
  H << 2, 0, 1, -2, 0, 0;
  const auto r = rank_block(H);
  CHECK(auroc(r, std::vector<int>{0}) == 1.0);
  CHECK(auroc(r, std::vector<int>{1}) == 0.0);
  CHECK_THROWS_AS(auroc(r, std::vector<int>{3}), InputError);
}

TEST_CASE("jackknife on a small benchmark") {
  auto spec = simulate::benchmark("B6", 3);
  spec.group_sizes = {6, 6};
  for (auto& b : spec.blocks) {
    b.variables /= 5;
    b.relevant_per_group = std::max(1, b.relevant_per_group / 5);
  }
  const auto sim = simulate::generate(spec);
  const auto rep = jackknife(sim.data, 2, PenaltyConfig::automatic(3, 1));
  CHECK(rep.run_count == 12);
  CHECK(rep.failed_runs == 0);
  REQUIRE(rep.frequency.size() == 3);
  for (const auto& block : rep.frequency)
    for (double f : block) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(std::abs(f * 12 - std::round(f * 12)) < 1e-12);
    }
  const auto again = jackknife(sim.data, 2, PenaltyConfig::automatic(3, 1));
  CHECK(again.frequency == rep.frequency);
}

TEST_CASE("jackknife preconditions") {
  const auto d = MultiBlockDataset::from_blocks({Eigen::MatrixXd::Random(2, 3)});
  CHECK_THROWS_AS(jackknife(d, 2, PenaltyConfig::automatic()), InputError);
}
