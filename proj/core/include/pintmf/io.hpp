#pragma once

// Delimited-text ingestion and run artifacts.
//
// Matrix CSV layout: a header row whose first cell names the id column and whose remaining cells
// are column ids; every following row is an id followed by numbers. Comma separated, '.' decimal
// separator, optional RFC 4180 quoting. Numbers are written with 17 significant digits.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pintmf/clustering.hpp"
#include "pintmf/dataset.hpp"
#include "pintmf/evaluation.hpp"
#include "pintmf/factorization.hpp"
#include "pintmf/model_selection.hpp"
#include "pintmf/simulate.hpp"

namespace pintmf::io {

inline constexpr int kReportSchemaVersion = 1;

/// "%.17g": round-trips every finite double.
std::string format_double(double v);

/// Splits CSV text into rows of cells. Throws InputError on unterminated quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& source = "<input>");

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

struct LabeledMatrix {
  std::string id_header;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Eigen::MatrixXd values;
};

/// Strict numeric parse; errors cite file, 1-based line and column.
LabeledMatrix parse_matrix_csv(const std::string& text, const std::string& source = "<input>");
LabeledMatrix read_matrix_csv(const std::filesystem::path& path);
std::string matrix_csv(const LabeledMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& m);

/// Block name from a path: the file stem.
std::string block_name_from_path(const std::filesystem::path& path);

/// Loads blocks and aligns them on the sample ids common to all files, in the first file's order.
/// `names` may be empty (file stems are used). Dropped samples produce a warning.
MultiBlockDataset load_blocks(const std::vector<std::filesystem::path>& paths, std::vector<std::string> names = {},
                              std::vector<std::string>* warnings = nullptr);

/// Writes <dir>/<block>.csv for each block.
void write_blocks(const std::filesystem::path& dir, const MultiBlockDataset& data);

// Truth: {"labels": {sample_id: int}, "relevant": {block: [variable_id]}}
struct Truth {
  std::map<std::string, int> labels;
  std::map<std::string, std::vector<std::string>> relevant;
};

Truth truth_from(const simulate::SimTruth& truth, const MultiBlockDataset& data);
/// Labels follow `sample_order` when given.
nlohmann::ordered_json to_json(const Truth& truth, const std::vector<std::string>& sample_order = {});
Truth truth_from_json(const nlohmann::json& j);
Truth read_truth(const std::filesystem::path& path);

struct SampleLabels {
  std::vector<std::string> sample_ids;
  std::vector<int> labels;
};

std::string clusters_csv(const std::vector<std::string>& sample_ids, const clustering::Partition& p);
SampleLabels read_clusters(const std::filesystem::path& path);

struct RankingRow {
  std::string variable_id;
  double score = 0.0;
  bool selected = false;
};

/// Columns: variable_id, rank, score, selected (rows in rank order).
std::string ranking_csv(const std::vector<std::string>& variable_ids, const evaluation::BlockRanking& r);
std::vector<RankingRow> read_ranking(const std::filesystem::path& path);

/// Columns: variable_id, frequency.
std::string stability_csv(const std::vector<std::string>& variable_ids, const std::vector<double>& frequency);

/// Writes W.csv, H_<block>.csv, clusters.csv and ranking_<block>.csv.
void write_model_artifacts(const std::filesystem::path& dir, const FactorModel& model, const MultiBlockDataset& data,
                           double selection_threshold = 0.0);

nlohmann::json fit_json(const FactorModel& model, const MultiBlockDataset& data, const FitOptions& opts);
nlohmann::json selection_json(const selection::SelectionReport& report);
nlohmann::json stability_json(const evaluation::StabilityReport& report);

/// Common envelope: schema version, command, seed, data summary and warnings.
nlohmann::json report_envelope(const std::string& command, std::uint64_t seed, const MultiBlockDataset& data,
                               const std::vector<std::string>& warnings);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace pintmf::io
