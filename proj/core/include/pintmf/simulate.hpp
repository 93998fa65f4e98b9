#pragma once

// Synthetic multi-block data with a known sample partition and known driving variables.
// Blocks are independent given the groups: gaussian (mean shift), binary (Bernoulli rates) and
// beta_like (two Beta components). Parameters of the registered benchmarks are reconstructions.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pintmf/clustering.hpp"
#include "pintmf/dataset.hpp"

namespace pintmf::simulate {

enum class Distribution { gaussian, binary, beta_like };

std::string_view to_string(Distribution d);
Distribution parse_distribution(std::string_view name);

struct BetaShape {
  double a = 1.0;
  double b = 1.0;
};

struct BlockSpec {
  std::string name;
  Distribution distribution = Distribution::gaussian;
  int variables = 0;
  int relevant_per_group = 0;

  // gaussian: background N(0, sd^2), foreground N(mean_shift, sd^2)
  double mean_shift = 2.0;
  double sd = 1.0;
  // binary
  double background_rate = 0.05;
  double foreground_rate = 0.7;
  // beta_like
  BetaShape background_shape{2.0, 8.0};
  BetaShape foreground_shape{8.0, 2.0};

  /// gaussian: sd of additive noise; binary: bit-flip probability;
  /// beta_like: probability of drawing from the other component.
  double noise = 0.0;

  static BlockSpec gaussian(std::string name, int variables, int relevant, double noise);
  static BlockSpec binary(std::string name, int variables, int relevant, double flip);
  static BlockSpec beta_like(std::string name, int variables, int relevant, double contamination);
};

struct SimSpec {
  std::string name;
  std::string description;
  std::vector<int> group_sizes;
  std::vector<BlockSpec> blocks;
  std::uint64_t seed = 0;

  int samples() const;
  /// Throws InputError on any out-of-range field.
  void validate() const;
};

struct SimTruth {
  clustering::Partition labels;
  /// Per block: indices of relevant variables (ascending) and the group (1-based) each one drives.
  std::vector<std::vector<int>> relevant;
  std::vector<std::vector<int>> driving_group;
};

struct Simulation {
  MultiBlockDataset data;
  SimTruth truth;
};

/// Samples are ordered by group. Deterministic given spec.seed.
Simulation generate(const SimSpec& spec);

/// B1 reference spec: groups 25/20/5/10; gaussian(100), binary(50), beta_like(500).
SimSpec default_spec(std::uint64_t seed = 0);

/// B1..B8.
std::vector<SimSpec> default_benchmarks(std::uint64_t seed = 0);
SimSpec benchmark(std::string_view name, std::uint64_t seed = 0);

/// M = log2((beta + eps) / (1 - (beta + eps))). Entries must lie in [0, 1] with beta + eps < 1.
Eigen::MatrixXd m_value_transform(const Eigen::MatrixXd& beta, double epsilon = 0.001);
Eigen::MatrixXd m_value_inverse(const Eigen::MatrixXd& m, double epsilon = 0.001);

nlohmann::json to_json(const SimSpec& spec);
/// Missing block parameters take the defaults above; unknown keys are rejected.
SimSpec spec_from_json(const nlohmann::json& j);

}  // namespace pintmf::simulate
