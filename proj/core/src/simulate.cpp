#include "pintmf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "pintmf/error.hpp"
#include "pintmf/random.hpp"

namespace pintmf::simulate {

namespace {

constexpr double kBetaFloor = 1e-12;

double draw_beta(Rng& rng, const BetaShape& s) {
  std::gamma_distribution<double> ga(s.a, 1.0);
  std::gamma_distribution<double> gb(s.b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  const double v = (x + y) > 0.0 ? x / (x + y) : 0.5;
  return std::clamp(v, kBetaFloor, 1.0 - kBetaFloor);
}

bool in_unit_open(double p) { return p > 0.0 && p < 1.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError("simulation spec: " + what);
}

}  // namespace

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::gaussian:
      return "gaussian";
    case Distribution::binary:
      return "binary";
    case Distribution::beta_like:
      return "beta_like";
  }
  return "gaussian";
}

Distribution parse_distribution(std::string_view name) {
  if (name == "gaussian") return Distribution::gaussian;
  if (name == "binary") return Distribution::binary;
  if (name == "beta_like") return Distribution::beta_like;
  throw InputError("unknown distribution '" + std::string(name) + "'");
}

BlockSpec BlockSpec::gaussian(std::string name, int variables, int relevant, double noise) {
  BlockSpec b;
  b.name = std::move(name);
  b.distribution = Distribution::gaussian;
  b.variables = variables;
  b.relevant_per_group = relevant;
  b.noise = noise;
  return b;
}

BlockSpec BlockSpec::binary(std::string name, int variables, int relevant, double flip) {
  auto b = gaussian(std::move(name), variables, relevant, flip);
  b.distribution = Distribution::binary;
  return b;
}

BlockSpec BlockSpec::beta_like(std::string name, int variables, int relevant, double contamination) {
  auto b = gaussian(std::move(name), variables, relevant, contamination);
  b.distribution = Distribution::beta_like;
  return b;
}

int SimSpec::samples() const { return std::accumulate(group_sizes.begin(), group_sizes.end(), 0); }

void SimSpec::validate() const {
  require(!group_sizes.empty(), "at least one group is required");
  for (int g : group_sizes) require(g > 0, "group sizes must be positive");
  require(!blocks.empty(), "at least one block is required");
  const auto groups = static_cast<int>(group_sizes.size());
  std::set<std::string> names;
  for (const auto& b : blocks) {
    require(!b.name.empty(), "block names must be non-empty");
    require(names.insert(b.name).second, "duplicate block name '" + b.name + "'");
    require(b.variables > 0, "block '" + b.name + "' needs at least one variable");
    require(b.relevant_per_group >= 0, "relevant counts must be non-negative");
    require(static_cast<long long>(b.relevant_per_group) * groups <= b.variables,
            "block '" + b.name + "': relevant variables exceed the variable count");
    switch (b.distribution) {
      case Distribution::gaussian:
        require(std::isfinite(b.mean_shift), "gaussian mean shift must be finite");
        require(b.sd >= 0.0 && std::isfinite(b.sd), "gaussian sd must be finite and non-negative");
        require(b.noise >= 0.0 && std::isfinite(b.noise), "gaussian noise must be finite and non-negative");
        break;
      case Distribution::binary:
        require(in_unit_open(b.background_rate) && in_unit_open(b.foreground_rate), "binary rates must lie in (0, 1)");
        require(b.noise >= 0.0 && b.noise < 1.0, "binary flip probability must lie in [0, 1)");
        break;
      case Distribution::beta_like:
        require(b.background_shape.a > 0.0 && b.background_shape.b > 0.0 && b.foreground_shape.a > 0.0 &&
                    b.foreground_shape.b > 0.0,
                "Beta shapes must be positive");
        require(b.noise >= 0.0 && b.noise <= 1.0, "beta_like contamination must lie in [0, 1]");
        break;
    }
  }
}

Simulation generate(const SimSpec& spec) {
  spec.validate();
  const int n = spec.samples();
  const auto groups = static_cast<int>(spec.group_sizes.size());

  Simulation out;
  auto& labels = out.truth.labels.labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (int g = 0; g < groups; ++g) labels.insert(labels.end(), static_cast<std::size_t>(spec.group_sizes[g]), g + 1);

  for (int i = 0; i < n; ++i) out.data.sample_ids.push_back("S" + std::to_string(i + 1));

  for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
    const auto& b = spec.blocks[k];
    Rng rng(derive_seed(spec.seed, {k + 1}));

    const int total_relevant = b.relevant_per_group * groups;
    auto chosen = sample_without_replacement(b.variables, total_relevant, rng);
    std::vector<int> driver(static_cast<std::size_t>(b.variables), 0);
    for (int t = 0; t < total_relevant; ++t) driver[static_cast<std::size_t>(chosen[t])] = t / b.relevant_per_group + 1;

    std::vector<int> relevant;
    std::vector<int> driving;
    for (int j = 0; j < b.variables; ++j)
      if (driver[static_cast<std::size_t>(j)] != 0) {
        relevant.push_back(j);
        driving.push_back(driver[static_cast<std::size_t>(j)]);
      }

    Eigen::MatrixXd x(n, b.variables);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int j = 0; j < b.variables; ++j) {
      const int d = driver[static_cast<std::size_t>(j)];
      for (int i = 0; i < n; ++i) {
        const bool fg = d != 0 && labels[static_cast<std::size_t>(i)] == d;
        double v = 0.0;
        switch (b.distribution) {
          case Distribution::gaussian:
            v = (fg ? b.mean_shift : 0.0) + b.sd * normal(rng) + b.noise * normal(rng);
            break;
          case Distribution::binary: {
            v = unit(rng) < (fg ? b.foreground_rate : b.background_rate) ? 1.0 : 0.0;
            if (unit(rng) < b.noise) v = 1.0 - v;
            break;
          }
          case Distribution::beta_like: {
            const bool swap = unit(rng) < b.noise;
            v = draw_beta(rng, (fg != swap) ? b.foreground_shape : b.background_shape);
            break;
          }
        }
        x(i, j) = v;
      }
    }

    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(b.variables));
    for (int j = 0; j < b.variables; ++j) ids.push_back(b.name + "_" + std::to_string(j + 1));

    out.data.blocks.push_back(std::move(x));
    out.data.block_names.push_back(b.name);
    out.data.variable_ids.push_back(std::move(ids));
    out.truth.relevant.push_back(std::move(relevant));
    out.truth.driving_group.push_back(std::move(driving));
  }
  return out;
}

namespace {

SimSpec reference(std::string name, std::string description, std::vector<int> groups, std::uint64_t seed) {
  SimSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.group_sizes = std::move(groups);
  s.seed = seed;
  s.blocks = {BlockSpec::gaussian("gaussian", 100, 5, 0.5), BlockSpec::binary("binary", 50, 3, 0.02),
              BlockSpec::beta_like("beta_like", 500, 25, 0.05)};
  return s;
}

}  // namespace

SimSpec default_spec(std::uint64_t seed) { return benchmark("B1", seed); }

std::vector<SimSpec> default_benchmarks(std::uint64_t seed) {
  const std::vector<int> unbalanced{25, 20, 5, 10};
  std::vector<SimSpec> out;

  out.push_back(reference("B1", "reference", unbalanced, seed));

  auto b2 = reference("B2", "more gaussian noise", unbalanced, seed);
  b2.blocks[0].noise = 1.5;
  out.push_back(std::move(b2));

  auto b3 = reference("B3", "more gaussian and binary noise", unbalanced, seed);
  b3.blocks[0].noise = 1.5;
  b3.blocks[1].noise = 0.1;
  out.push_back(std::move(b3));

  auto b4 = reference("B4", "more beta_like and binary noise", unbalanced, seed);
  b4.blocks[1].noise = 0.1;
  b4.blocks[2].noise = 0.3;
  out.push_back(std::move(b4));

  auto b5 = reference("B5", "more relevant variables", unbalanced, seed);
  for (auto& b : b5.blocks) b.relevant_per_group *= 2;
  out.push_back(std::move(b5));

  out.push_back(reference("B6", "2 balanced groups", {30, 30}, seed));
  out.push_back(reference("B7", "3 balanced groups", {20, 20, 20}, seed));
  out.push_back(reference("B8", "4 balanced groups", {15, 15, 15, 15}, seed));
  return out;
}

SimSpec benchmark(std::string_view name, std::uint64_t seed) {
  for (auto& s : default_benchmarks(seed))
    if (s.name == name) return s;
  throw InputError("unknown benchmark '" + std::string(name) + "' (expected B1..B8)");
}

Eigen::MatrixXd m_value_transform(const Eigen::MatrixXd& beta, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("m-value: epsilon must be positive");
  Eigen::MatrixXd m(beta.rows(), beta.cols());
  for (Eigen::Index j = 0; j < beta.cols(); ++j)
    for (Eigen::Index i = 0; i < beta.rows(); ++i) {
      const double b = beta(i, j);
      if (!(b >= 0.0 && b <= 1.0))
        throw InputError("m-value: entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                         ") outside [0, 1]");
      const double s = b + epsilon;
      if (!(s < 1.0))
        throw InputError("m-value: entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                         ") plus epsilon reaches 1");
      m(i, j) = std::log2(s / (1.0 - s));
    }
  return m;
}

Eigen::MatrixXd m_value_inverse(const Eigen::MatrixXd& m, double epsilon) {
  return m.unaryExpr([epsilon](double v) {
    const double e = std::exp2(v);
    return e / (1.0 + e) - epsilon;
  });
}

nlohmann::json to_json(const SimSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["description"] = spec.description;
  j["seed"] = spec.seed;
  j["group_sizes"] = spec.group_sizes;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : spec.blocks) {
    nlohmann::json e;
    e["name"] = b.name;
    e["distribution"] = std::string(to_string(b.distribution));
    e["variables"] = b.variables;
    e["relevant_per_group"] = b.relevant_per_group;
    e["noise"] = b.noise;
    switch (b.distribution) {
      case Distribution::gaussian:
        e["mean_shift"] = b.mean_shift;
        e["sd"] = b.sd;
        break;
      case Distribution::binary:
        e["background_rate"] = b.background_rate;
        e["foreground_rate"] = b.foreground_rate;
        break;
      case Distribution::beta_like:
        e["background_shape"] = {b.background_shape.a, b.background_shape.b};
        e["foreground_shape"] = {b.foreground_shape.a, b.foreground_shape.b};
        break;
    }
    j["blocks"].push_back(std::move(e));
  }
  return j;
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InputError("simulation spec: unknown key '" + key + "' in " + where);
  }
}

BetaShape shape_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("simulation spec: Beta shapes are [a, b] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

SimSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("simulation spec: expected a JSON object");
  try {
    reject_unknown(j, {"name", "description", "seed", "group_sizes", "blocks"}, "spec");
    SimSpec s;
    s.name = j.value("name", std::string("custom"));
    s.description = j.value("description", std::string());
    s.seed = j.value("seed", std::uint64_t{0});
    s.group_sizes = j.at("group_sizes").get<std::vector<int>>();
    for (const auto& e : j.at("blocks")) {
      reject_unknown(e,
                     {"name", "distribution", "variables", "relevant_per_group", "noise", "mean_shift", "sd",
                      "background_rate", "foreground_rate", "background_shape", "foreground_shape"},
                     "block");
      BlockSpec b;
      b.name = e.at("name").get<std::string>();
      b.distribution = parse_distribution(e.at("distribution").get<std::string>());
      b.variables = e.at("variables").get<int>();
      b.relevant_per_group = e.at("relevant_per_group").get<int>();
      b.noise = e.value("noise", b.noise);
      b.mean_shift = e.value("mean_shift", b.mean_shift);
      b.sd = e.value("sd", b.sd);
      b.background_rate = e.value("background_rate", b.background_rate);
      b.foreground_rate = e.value("foreground_rate", b.foreground_rate);
      if (e.contains("background_shape")) b.background_shape = shape_from(e["background_shape"]);
      if (e.contains("foreground_shape")) b.foreground_shape = shape_from(e["foreground_shape"]);
      s.blocks.push_back(std::move(b));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("simulation spec: ") + e.what());
  }
}

}  // namespace pintmf::simulate
