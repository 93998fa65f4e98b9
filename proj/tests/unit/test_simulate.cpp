#include <doctest.h>

#include <set>

#include "pintmf/clustering.hpp"
#include "pintmf/error.hpp"
#include "pintmf/evaluation.hpp"
#include "pintmf/simulate.hpp"

using namespace pintmf;
using namespace pintmf::simulate;

TEST_CASE("default spec shapes") {
  const auto sim = generate(default_spec(1));
  CHECK(sim.data.samples() == 60);
  REQUIRE(sim.data.block_count() == 3);
  CHECK(sim.data.blocks[0].cols() == 100);
  CHECK(sim.data.blocks[1].cols() == 50);
  CHECK(sim.data.blocks[2].cols() == 500);
  CHECK(sim.data.block_names == std::vector<std::string>{"gaussian", "binary", "beta_like"});
  CHECK_NOTHROW(sim.data.validate());
  CHECK(sim.truth.labels.size() == 60);
  CHECK(sim.truth.relevant[0].size() == 20);
  CHECK(sim.truth.relevant[1].size() == 12);
  CHECK(sim.truth.relevant[2].size() == 100);
}

TEST_CASE("supports of binary and beta_like blocks") {
  const auto sim = generate(default_spec(2));
  CHECK((sim.data.blocks[1].array() == 0.0 || sim.data.blocks[1].array() == 1.0).all());
  CHECK((sim.data.blocks[2].array() > 0.0).all());
  CHECK((sim.data.blocks[2].array() < 1.0).all());
}

TEST_CASE("benchmark registry") {
  const auto all = default_benchmarks();
  REQUIRE(all.size() == 8);
  CHECK(all[0].group_sizes == std::vector<int>{25, 20, 5, 10});
  CHECK(all[5].group_sizes == std::vector<int>{30, 30});
  CHECK(all[6].group_sizes == std::vector<int>{20, 20, 20});
  CHECK(all[7].group_sizes == std::vector<int>{15, 15, 15, 15});
  // B2 differs from B1 only in the gaussian noise.
  const auto& b1 = all[0];
  const auto& b2 = all[1];
  CHECK(b2.blocks[0].noise > b1.blocks[0].noise);
  CHECK(to_json(b1)["blocks"][1] == to_json(b2)["blocks"][1]);
  CHECK(to_json(b1)["blocks"][2] == to_json(b2)["blocks"][2]);
  CHECK(b1.group_sizes == b2.group_sizes);
  CHECK(all[4].blocks[0].relevant_per_group == 2 * b1.blocks[0].relevant_per_group);
  CHECK_THROWS_AS(benchmark("B9"), InputError);
}

TEST_CASE("determinism and seed dependence") {
  const auto a = generate(default_spec(5));
  const auto b = generate(default_spec(5));
  const auto c = generate(default_spec(6));
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.data.blocks[k] == b.data.blocks[k]);
    CHECK(a.data.blocks[k] != c.data.blocks[k]);
    CHECK(a.data.blocks[k].rows() == c.data.blocks[k].rows());
    CHECK(a.data.blocks[k].cols() == c.data.blocks[k].cols());
    CHECK(a.truth.relevant[k] == b.truth.relevant[k]);
    CHECK(a.truth.relevant[k].size() == c.truth.relevant[k].size());
  }
}

TEST_CASE("relevant sets are disjoint and in range") {
  const auto sim = generate(benchmark("B5", 3));
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& rel = sim.truth.relevant[k];
    std::set<int> uniq(rel.begin(), rel.end());
    CHECK(uniq.size() == rel.size());
    CHECK(*uniq.begin() >= 0);
    CHECK(*uniq.rbegin() < sim.data.blocks[k].cols());
    std::vector<int> per_group(4, 0);
    for (int g : sim.truth.driving_group[k]) ++per_group[static_cast<std::size_t>(g - 1)];
    for (int c : per_group) CHECK(c == 2 * default_spec().blocks[k].relevant_per_group);
  }
}

TEST_CASE("gaussian signal is injected on relevant variables") {
  int exceed = 0;
  int total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto sim = generate(default_spec(seed));
    const auto& x = sim.data.blocks[0];
    const auto& labels = sim.truth.labels.labels;
    for (std::size_t r = 0; r < sim.truth.relevant[0].size(); ++r) {
      const int j = sim.truth.relevant[0][r];
      const int g = sim.truth.driving_group[0][r];
      double in = 0, out = 0;
      int nin = 0, nout = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == g) {
          in += x(static_cast<Eigen::Index>(i), j);
          ++nin;
        } else {
          out += x(static_cast<Eigen::Index>(i), j);
          ++nout;
        }
      }
      exceed += (in / nin - out / nout) > 1.0;
      ++total;
    }
  }
  CHECK(static_cast<double>(exceed) / total >= 0.99);
}

TEST_CASE("noiseless large shift is separable block by block") {
  SimSpec s;
  s.group_sizes = {8, 12, 10};
  s.seed = 4;
  auto g = BlockSpec::gaussian("g", 40, 6, 0.0);
  g.mean_shift = 10.0;
  g.sd = 0.0;
  auto b = BlockSpec::binary("b", 30, 5, 0.0);
  b.background_rate = 1e-9;
  b.foreground_rate = 1.0 - 1e-9;
  s.blocks = {g, b};
  const auto sim = generate(s);
  for (const auto& x : sim.data.blocks)
    CHECK(evaluation::adjusted_rand_index(clustering::ward_partition(x, 3), sim.truth.labels) == 1.0);
}

TEST_CASE("spec validation") {
  auto s = default_spec();
  s.group_sizes = {0, 5};
  CHECK_THROWS_AS(generate(s), InputError);
  s = default_spec();
  s.blocks[1].foreground_rate = 1.0;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = default_spec();
  s.blocks[2].background_shape.a = 0.0;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = default_spec();
  s.blocks[0].relevant_per_group = 30;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = default_spec();
  s.blocks[1].name = "gaussian";
  CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("spec JSON round trip") {
  for (const auto& s : default_benchmarks(9)) {
    const auto back = spec_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
  }
  auto j = to_json(default_spec());
  j["blocks"][0]["colour"] = "red";
  CHECK_THROWS_AS(spec_from_json(j), InputError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"blocks": []})")), InputError);
  const auto minimal = spec_from_json(nlohmann::json::parse(
      R"({"group_sizes": [3, 3], "blocks": [{"name": "x", "distribution": "binary", "variables": 4, "relevant_per_group": 1}]})"));
  CHECK(minimal.blocks[0].background_rate == 0.05);
}

TEST_CASE("M-value transform") {
  Eigen::MatrixXd beta(1, 2);
  beta << 0.5, 0.0;
  const auto m = m_value_transform(beta, 0.001);
  CHECK(m(0, 0) == doctest::Approx(std::log2(0.501 / 0.499)).epsilon(1e-15));
  CHECK(m(0, 0) == doctest::Approx(0.005771).epsilon(1e-4));
  CHECK(m(0, 1) == doctest::Approx(-9.9643).epsilon(1e-5));

  Eigen::MatrixXd grid(1, 99);
  for (int i = 0; i < 99; ++i) grid(0, i) = i / 100.0;
  const auto mg = m_value_transform(grid);
  for (int i = 1; i < 99; ++i) CHECK(mg(0, i) > mg(0, i - 1));
  CHECK((m_value_inverse(mg) - grid).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd bad(1, 1);
  bad << 1.2;
  CHECK_THROWS_AS(m_value_transform(bad), InputError);
  bad << -0.1;
  CHECK_THROWS_AS(m_value_transform(bad), InputError);
  bad << 0.9995;
  CHECK_THROWS_AS(m_value_transform(bad, 0.001), InputError);
  CHECK_THROWS_AS(m_value_transform(grid, 0.0), InputError);
}
