#pragma once

// Starting points for the alternating fit: either a set of coefficient matrices H^k
// (SVD, hierarchical clustering, random profiles) or a cluster indicator W (similarity
// network fusion across all blocks).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pintmf/dataset.hpp"

namespace pintmf::init {

enum class InitKind { snf, svd, hclust, random };

std::string_view to_string(InitKind kind);
/// Throws InputError on unknown names.
InitKind parse_init_kind(std::string_view name);

struct SnfParams {
  /// Neighbourhood size; 0 selects max(2, floor(n/10)).
  int neighbors = 0;
  double alpha = 0.5;
  int fusion_iters = 20;
};

struct InitSpec {
  InitKind kind = InitKind::snf;
  std::uint64_t seed = 0;
  SnfParams snf;

  void validate() const;
};

/// Per block, the top-P right singular vectors as rows of H^k. Each vector's largest-magnitude
/// entry is made positive. Rows beyond the numerical rank are zero and produce a warning.
std::vector<Eigen::MatrixXd> init_svd(const MultiBlockDataset& data, int P,
                                      std::vector<std::string>* warnings = nullptr);

/// Per block, Ward clustering of samples cut at P; row p of H^k is the mean profile of cluster p.
std::vector<Eigen::MatrixXd> init_hclust(const MultiBlockDataset& data, int P);

/// P distinct samples drawn without replacement (same draws for every block); their profiles
/// become the rows of each H^k.
std::vector<Eigen::MatrixXd> init_random(const MultiBlockDataset& data, int P, std::uint64_t seed);

/// Scaled-exponential affinity of one block (symmetric, n x n).
Eigen::MatrixXd snf_affinity(const Eigen::MatrixXd& block, int neighbors, double alpha);

/// Cross-diffusion of per-block affinities into one fused affinity matrix.
Eigen::MatrixXd snf_fuse(const std::vector<Eigen::MatrixXd>& affinities, int neighbors, int iterations);

/// Fused-affinity clustering: Ward on 1 - (normalized fused affinity), cut at P, returned as a
/// one-hot n x P indicator matrix.
Eigen::MatrixXd init_snf(const MultiBlockDataset& data, int P, const SnfParams& params,
                         std::vector<std::string>* warnings = nullptr);

struct Initialization {
  /// Set for SNF.
  std::optional<Eigen::MatrixXd> W;
  /// Set for the H-providing kinds.
  std::vector<Eigen::MatrixXd> H;
};

Initialization initialize(const MultiBlockDataset& data, int P, const InitSpec& spec,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace pintmf::init
