#include "pintmf/model_selection.hpp"

#include "pintmf/clustering.hpp"
#include "pintmf/error.hpp"

namespace pintmf::selection {

namespace {

void check_shapes(const FactorModel& model, const MultiBlockDataset& data) {
  if (model.H.size() != data.block_count()) throw InputError("model and data disagree on the block count");
  if (model.W.rows() != data.samples()) throw InputError("model and data disagree on the sample count");
  for (std::size_t k = 0; k < data.block_count(); ++k)
    if (model.H[k].cols() != data.blocks[k].cols()) throw InputError("model and data disagree on block widths");
}

std::optional<double> mean_present(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  int count = 0;
  for (const auto& x : v)
    if (x) {
      sum += *x;
      ++count;
    }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace

BlockScores mse(const FactorModel& model, const MultiBlockDataset& data) {
  check_shapes(model, data);
  BlockScores s;
  for (std::size_t k = 0; k < data.block_count(); ++k) {
    const auto& x = data.blocks[k];
    s.blocks.emplace_back((x - model.W * model.H[k]).squaredNorm() / static_cast<double>(x.rows() * x.cols()));
  }
  s.total = mean_present(s.blocks);
  return s;
}

BlockScores pve(const FactorModel& model, const MultiBlockDataset& data) {
  check_shapes(model, data);
  BlockScores s;
  for (std::size_t k = 0; k < data.block_count(); ++k) {
    const auto& x = data.blocks[k];
    const Eigen::VectorXd row_mean = x.rowwise().mean();
    const double baseline = (x.colwise() - row_mean).squaredNorm();
    if (!(baseline > 0.0)) {
      s.blocks.emplace_back(std::nullopt);
      continue;
    }
    s.blocks.emplace_back(1.0 - (x - model.W * model.H[k]).squaredNorm() / baseline);
  }
  s.total = mean_present(s.blocks);
  return s;
}

Suggestion suggest_p(const SelectionReport& report) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < report.cophenetic.size(); ++i)
    if (report.cophenetic[i]) present.push_back(i);
  if (present.size() < 2) throw NumericalError("suggest_p: fewer than two cophenetic values available");
  for (std::size_t t = 0; t + 1 < present.size(); ++t) {
    const auto a = present[t];
    const auto b = present[t + 1];
    if (*report.cophenetic[b] < *report.cophenetic[a]) return {report.p_values[a], false};
  }
  return {report.p_values[present.back()], true};
}

int pve_plateau(const SelectionReport& report, double min_gain) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < report.pve.size(); ++i)
    if (report.pve[i]) present.push_back(i);
  if (present.empty()) throw NumericalError("pve_plateau: no PVE values available");
  for (std::size_t t = 0; t + 1 < present.size(); ++t) {
    const auto a = present[t];
    const auto b = present[t + 1];
    if (*report.pve[b] - *report.pve[a] < min_gain) return report.p_values[a];
  }
  return report.p_values[present.back()];
}

SelectionReport scan_p(const MultiBlockDataset& data, const std::vector<int>& p_values, const PenaltyConfig& penalties,
                       const FitOptions& opts, std::vector<std::optional<FactorModel>>* models) {
  data.validate();
  if (p_values.empty()) throw InputError("scan_p: empty P range");
  for (int p : p_values)
    if (p < 2 || p > data.samples()) throw InputError("scan_p: P = " + std::to_string(p) + " outside [2, n]");

  SelectionReport r;
  r.p_values = p_values;
  if (models != nullptr) models->assign(p_values.size(), std::nullopt);
  int ok = 0;
  for (std::size_t idx = 0; idx < p_values.size(); ++idx) {
    try {
      auto model = fit(data, p_values[idx], penalties, opts);
      const auto m = mse(model, data);
      const auto v = pve(model, data);
      r.mse.push_back(m.total);
      r.mse_blocks.push_back(m.blocks);
      r.pve.push_back(v.total);
      r.pve_blocks.push_back(v.blocks);
      try {
        r.cophenetic.emplace_back(clustering::cophenetic_correlation(model.W));
      } catch (const NumericalError&) {
        r.cophenetic.emplace_back(std::nullopt);
      }
      r.failures.emplace_back();
      if (models != nullptr) (*models)[idx] = std::move(model);
      ++ok;
    } catch (const std::exception& e) {
      r.mse.emplace_back(std::nullopt);
      r.mse_blocks.emplace_back(data.block_count(), std::nullopt);
      r.pve.emplace_back(std::nullopt);
      r.pve_blocks.emplace_back(data.block_count(), std::nullopt);
      r.cophenetic.emplace_back(std::nullopt);
      r.failures.emplace_back(e.what());
    }
  }
  if (ok == 0) throw NumericalError("scan_p: every fit failed (first error: " + r.failures.front() + ")");

  try {
    const auto s = suggest_p(r);
    r.suggested_p = s.p;
    r.no_knee = s.no_knee;
    r.rule = s.no_knee ? "cophenetic-no-knee" : "cophenetic";
  } catch (const NumericalError&) {
    r.suggested_p = pve_plateau(r);
    r.rule = "pve-plateau";
  }
  return r;
}

}  // namespace pintmf::selection
