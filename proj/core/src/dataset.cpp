#include "pintmf/dataset.hpp"

#include "pintmf/error.hpp"

namespace pintmf {

Eigen::Index MultiBlockDataset::total_variables() const {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.cols();
  return total;
}

void MultiBlockDataset::validate() const {
  if (blocks.empty()) throw InputError("dataset: at least one block is required");
  const Eigen::Index n = blocks.front().rows();
  if (n < 1) throw InputError("dataset: blocks have no samples");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    if (b.rows() != n) throw InputError("dataset: block " + std::to_string(k + 1) + " has a different sample count");
    if (b.cols() < 1) throw InputError("dataset: block " + std::to_string(k + 1) + " has no variables");
    if (!b.allFinite()) throw InputError("dataset: block " + std::to_string(k + 1) + " contains non-finite values");
  }
  if (static_cast<Eigen::Index>(sample_ids.size()) != n) throw InputError("dataset: sample id count mismatch");
  if (block_names.size() != blocks.size()) throw InputError("dataset: block name count mismatch");
  if (variable_ids.size() != blocks.size()) throw InputError("dataset: variable id list count mismatch");
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (static_cast<Eigen::Index>(variable_ids[k].size()) != blocks[k].cols())
      throw InputError("dataset: variable id count mismatch in block " + block_names[k]);
}

MultiBlockDataset MultiBlockDataset::without_sample(Eigen::Index index) const {
  const Eigen::Index n = samples();
  if (index < 0 || index >= n) throw InputError("dataset: sample index out of range");
  MultiBlockDataset out;
  out.block_names = block_names;
  out.variable_ids = variable_ids;
  out.sample_ids.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != index) out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(i)]);
  for (const auto& b : blocks) {
    Eigen::MatrixXd m(n - 1, b.cols());
    m.topRows(index) = b.topRows(index);
    m.bottomRows(n - 1 - index) = b.bottomRows(n - 1 - index);
    out.blocks.push_back(std::move(m));
  }
  return out;
}

MultiBlockDataset MultiBlockDataset::from_blocks(std::vector<Eigen::MatrixXd> blocks) {
  MultiBlockDataset d;
  d.blocks = std::move(blocks);
  const Eigen::Index n = d.samples();
  for (Eigen::Index i = 0; i < n; ++i) d.sample_ids.push_back("S" + std::to_string(i + 1));
  for (std::size_t k = 0; k < d.blocks.size(); ++k) {
    d.block_names.push_back("block" + std::to_string(k + 1));
    std::vector<std::string> ids;
    for (Eigen::Index j = 0; j < d.blocks[k].cols(); ++j) ids.push_back("V" + std::to_string(j + 1));
    d.variable_ids.push_back(std::move(ids));
  }
  return d;
}

}  // namespace pintmf
