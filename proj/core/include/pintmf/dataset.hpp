#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pintmf {

/// K blocks of measurements on the same n samples, in the same sample order.
struct MultiBlockDataset {
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<std::string> sample_ids;
  std::vector<std::vector<std::string>> variable_ids;
  std::vector<std::string> block_names;

  Eigen::Index samples() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  std::size_t block_count() const { return blocks.size(); }
  Eigen::Index total_variables() const;

  /// Throws InputError unless K >= 1, shapes agree, ids match shapes and entries are finite.
  void validate() const;

  /// Copy with sample `index` removed from every block.
  MultiBlockDataset without_sample(Eigen::Index index) const;

  /// Wraps bare matrices with generated ids (S1.., block1.., V1..).
  static MultiBlockDataset from_blocks(std::vector<Eigen::MatrixXd> blocks);
};

}  // namespace pintmf
