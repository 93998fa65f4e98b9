#include "pintmf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pintmf/error.hpp"
#include "pintmf/model_selection.hpp"

namespace pintmf::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool row_started = false;
  std::size_t line = 1;
  std::size_t quote_line = 0;

  std::size_t i = 0;
  if (text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        quote_line = line;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !cell.empty()) {
          row.push_back(std::move(cell));
          rows.push_back(std::move(row));
        }
        cell.clear();
        row.clear();
        row_started = false;
        ++line;
        break;
      default:
        cell += c;
        row_started = true;
    }
  }
  if (quoted) throw InputError(source + ": unterminated quote opened on line " + std::to_string(quote_line));
  if (row_started || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

namespace {

std::string location(const std::string& source, std::size_t row, std::size_t col) {
  return source + ":" + std::to_string(row) + ":" + std::to_string(col);
}

double parse_number(const std::string& cell, const std::string& where) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last)
    throw InputError(where + ": cannot parse '" + cell + "' as a number");
  if (!std::isfinite(v)) throw InputError(where + ": non-finite value '" + cell + "'");
  return v;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void check_unique(const std::vector<std::string>& ids, const std::string& what, const std::string& source) {
  std::set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw InputError(source + ": duplicate " + what + " '" + id + "'");
}

}  // namespace

LabeledMatrix parse_matrix_csv(const std::string& text, const std::string& source) {
  const auto rows = parse_csv(text, source);
  if (rows.empty()) throw InputError(source + ": empty file");
  LabeledMatrix m;
  const auto& header = rows.front();
  if (header.size() < 2) throw InputError(source + ": header needs an id column and at least one variable");
  m.id_header = header.front();
  m.col_ids.assign(header.begin() + 1, header.end());
  check_unique(m.col_ids, "column id", source);

  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  const auto cols = static_cast<Eigen::Index>(m.col_ids.size());
  if (n < 1) throw InputError(source + ": no data rows");
  m.values.resize(n, cols);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r + 1)];
    if (static_cast<Eigen::Index>(row.size()) != cols + 1)
      throw InputError(location(source, static_cast<std::size_t>(r + 2), 1) + ": expected " +
                       std::to_string(cols + 1) + " cells, found " + std::to_string(row.size()));
    m.row_ids.push_back(row.front());
    for (Eigen::Index c = 0; c < cols; ++c)
      m.values(r, c) = parse_number(row[static_cast<std::size_t>(c + 1)],
                                    location(source, static_cast<std::size_t>(r + 2), static_cast<std::size_t>(c + 2)));
  }
  check_unique(m.row_ids, "row id", source);
  return m;
}

LabeledMatrix read_matrix_csv(const fs::path& path) { return parse_matrix_csv(read_text(path), path.string()); }

std::string matrix_csv(const LabeledMatrix& m) {
  std::string out = csv_cell(m.id_header);
  for (const auto& c : m.col_ids) out += "," + csv_cell(c);
  out += '\n';
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
    out += csv_cell(m.row_ids[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) out += "," + format_double(m.values(r, c));
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const fs::path& path, const LabeledMatrix& m) { write_text(path, matrix_csv(m)); }

std::string block_name_from_path(const fs::path& path) { return path.stem().string(); }

MultiBlockDataset load_blocks(const std::vector<fs::path>& paths, std::vector<std::string> names,
                              std::vector<std::string>* warnings) {
  if (paths.empty()) throw InputError("at least one block file is required");
  if (names.empty())
    for (const auto& p : paths) names.push_back(block_name_from_path(p));
  if (names.size() != paths.size()) throw InputError("block names and block files differ in number");
  {
    std::set<std::string> seen;
    for (const auto& nm : names)
      if (!seen.insert(nm).second) throw InputError("duplicate block name '" + nm + "'");
  }

  std::vector<LabeledMatrix> tables;
  for (const auto& p : paths) tables.push_back(read_matrix_csv(p));

  std::vector<std::string> common;
  std::vector<std::unordered_map<std::string, Eigen::Index>> index(tables.size());
  for (std::size_t k = 0; k < tables.size(); ++k)
    for (std::size_t r = 0; r < tables[k].row_ids.size(); ++r)
      index[k].emplace(tables[k].row_ids[r], static_cast<Eigen::Index>(r));
  for (const auto& id : tables.front().row_ids) {
    bool everywhere = true;
    for (std::size_t k = 1; k < tables.size(); ++k) everywhere = everywhere && index[k].count(id) > 0;
    if (everywhere) common.push_back(id);
  }
  if (common.empty()) throw InputError("blocks share no sample ids");
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const auto dropped = tables[k].row_ids.size() - common.size();
    if (dropped > 0 && warnings != nullptr)
      warnings->push_back("block '" + names[k] + "': " + std::to_string(dropped) +
                          " sample(s) not present in every block were dropped");
  }

  MultiBlockDataset d;
  d.sample_ids = common;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(common.size()), tables[k].values.cols());
    for (std::size_t i = 0; i < common.size(); ++i)
      x.row(static_cast<Eigen::Index>(i)) = tables[k].values.row(index[k].at(common[i]));
    d.blocks.push_back(std::move(x));
    d.block_names.push_back(names[k]);
    d.variable_ids.push_back(tables[k].col_ids);
  }
  d.validate();
  return d;
}

void write_blocks(const fs::path& dir, const MultiBlockDataset& data) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < data.block_count(); ++k)
    write_matrix_csv(dir / (data.block_names[k] + ".csv"),
                     {"sample_id", data.sample_ids, data.variable_ids[k], data.blocks[k]});
}

Truth truth_from(const simulate::SimTruth& truth, const MultiBlockDataset& data) {
  Truth t;
  for (std::size_t i = 0; i < data.sample_ids.size(); ++i) t.labels[data.sample_ids[i]] = truth.labels.labels[i];
  for (std::size_t k = 0; k < data.block_count(); ++k) {
    auto& ids = t.relevant[data.block_names[k]];
    for (int j : truth.relevant[k]) ids.push_back(data.variable_ids[k][static_cast<std::size_t>(j)]);
  }
  return t;
}

nlohmann::ordered_json to_json(const Truth& truth, const std::vector<std::string>& sample_order) {
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  if (!sample_order.empty()) {
    for (const auto& id : sample_order) labels[id] = truth.labels.at(id);
  } else {
    for (const auto& [id, l] : truth.labels) labels[id] = l;
  }
  nlohmann::ordered_json j;
  j["labels"] = std::move(labels);
  j["relevant"] = nlohmann::ordered_json::object();
  for (const auto& [block, ids] : truth.relevant) j["relevant"][block] = ids;
  return j;
}

Truth truth_from_json(const nlohmann::json& j) {
  try {
    Truth t;
    for (const auto& [id, l] : j.at("labels").items()) t.labels[id] = l.get<int>();
    if (j.contains("relevant"))
      for (const auto& [block, ids] : j.at("relevant").items())
        t.relevant[block] = ids.get<std::vector<std::string>>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("truth file: ") + e.what());
  }
}

Truth read_truth(const fs::path& path) {
  try {
    return truth_from_json(nlohmann::json::parse(read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string clusters_csv(const std::vector<std::string>& sample_ids, const clustering::Partition& p) {
  if (sample_ids.size() != p.size()) throw InputError("clusters: id and label counts differ");
  std::string out = "sample_id,label\n";
  for (std::size_t i = 0; i < p.size(); ++i) out += csv_cell(sample_ids[i]) + "," + std::to_string(p.labels[i]) + "\n";
  return out;
}

namespace {

std::vector<std::vector<std::string>> read_table(const fs::path& path, const std::vector<std::string>& header) {
  auto rows = parse_csv(read_text(path), path.string());
  if (rows.empty() || rows.front() != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw InputError(path.string() + ": expected header '" + expected + "'");
  }
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != header.size())
      throw InputError(location(path.string(), r + 1, 1) + ": expected " + std::to_string(header.size()) + " cells");
  rows.erase(rows.begin());
  return rows;
}

int parse_int(const std::string& cell, const std::string& where) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw InputError(where + ": cannot parse '" + cell + "' as an integer");
  return v;
}

}  // namespace

SampleLabels read_clusters(const fs::path& path) {
  const auto rows = read_table(path, {"sample_id", "label"});
  SampleLabels s;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s.sample_ids.push_back(rows[r][0]);
    s.labels.push_back(parse_int(rows[r][1], location(path.string(), r + 2, 2)));
  }
  check_unique(s.sample_ids, "sample id", path.string());
  return s;
}

std::string ranking_csv(const std::vector<std::string>& variable_ids, const evaluation::BlockRanking& r) {
  if (variable_ids.size() != r.scores.size()) throw InputError("ranking: id and score counts differ");
  std::string out = "variable_id,rank,score,selected\n";
  for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
    const auto j = static_cast<std::size_t>(r.order[pos]);
    out += csv_cell(variable_ids[j]) + "," + std::to_string(pos + 1) + "," + format_double(r.scores[j]) + "," +
           (r.selected[j] ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<RankingRow> read_ranking(const fs::path& path) {
  const auto rows = read_table(path, {"variable_id", "rank", "score", "selected"});
  std::vector<RankingRow> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    RankingRow row;
    row.variable_id = rows[r][0];
    row.score = parse_number(rows[r][2], location(path.string(), r + 2, 3));
    const int sel = parse_int(rows[r][3], location(path.string(), r + 2, 4));
    if (sel != 0 && sel != 1) throw InputError(location(path.string(), r + 2, 4) + ": selected must be 0 or 1");
    row.selected = sel == 1;
    out.push_back(std::move(row));
  }
  return out;
}

std::string stability_csv(const std::vector<std::string>& variable_ids, const std::vector<double>& frequency) {
  if (variable_ids.size() != frequency.size()) throw InputError("stability: id and frequency counts differ");
  std::string out = "variable_id,frequency\n";
  for (std::size_t j = 0; j < frequency.size(); ++j) out += csv_cell(variable_ids[j]) + "," + format_double(frequency[j]) + "\n";
  return out;
}

void write_model_artifacts(const fs::path& dir, const FactorModel& model, const MultiBlockDataset& data,
                           double selection_threshold) {
  fs::create_directories(dir);
  std::vector<std::string> components;
  for (int p = 0; p < model.P; ++p) components.push_back("LV" + std::to_string(p + 1));
  write_matrix_csv(dir / "W.csv", {"sample_id", data.sample_ids, components, model.W});
  for (std::size_t k = 0; k < data.block_count(); ++k)
    write_matrix_csv(dir / ("H_" + data.block_names[k] + ".csv"),
                     {"component", components, data.variable_ids[k], model.H[k]});
  write_text(dir / "clusters.csv", clusters_csv(data.sample_ids, model.clusters()));
  const auto ranking = evaluation::rank_variables(model, selection_threshold);
  for (std::size_t k = 0; k < data.block_count(); ++k)
    write_text(dir / ("ranking_" + data.block_names[k] + ".csv"), ranking_csv(data.variable_ids[k], ranking[k]));
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

nlohmann::json optional_list(const std::vector<std::optional<double>>& v) {
  auto out = nlohmann::json::array();
  for (const auto& x : v) out.push_back(optional_json(x));
  return out;
}

}  // namespace

nlohmann::json fit_json(const FactorModel& model, const MultiBlockDataset& data, const FitOptions& opts) {
  nlohmann::json j;
  j["P"] = model.P;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["init"] = std::string(init::to_string(opts.init.kind));
  j["options"] = {{"max_iter", opts.max_iter},
                  {"ari_stop_threshold", opts.ari_stop_threshold},
                  {"stable_rounds", opts.stable_rounds},
                  {"inner_tol", opts.inner_tol},
                  {"n_lambda", opts.n_lambda},
                  {"lambda_ratio", opts.lambda_ratio}};
  j["penalties"] = {{"mode", std::string(to_string(model.penalties.mode))},
                    {"lambda", model.penalties.lambda},
                    {"mu", model.penalties.mu},
                    {"cv_folds", model.penalties.cv_folds}};

  auto history = nlohmann::json::array();
  for (const auto& h : model.history) {
    history.push_back({{"iteration", h.iteration},
                       {"objective", h.objective},
                       {"block_mse", h.block_mse},
                       {"ari_previous", optional_json(h.ari_previous)},
                       {"lambda", h.lambda},
                       {"mean_mu", h.mean_mu},
                       {"max_row_sum_error", h.max_row_sum_error},
                       {"min_weight", h.min_weight},
                       {"rejected_rows", h.rejected_rows}});
  }
  j["history"] = std::move(history);

  const auto& d = model.diagnostics;
  j["diagnostics"] = {{"zero_rows", d.zero_rows},
                      {"zero_row_resets", d.zero_row_resets},
                      {"empty_components", d.empty_components},
                      {"warnings", d.warnings}};

  const auto m = selection::mse(model, data);
  const auto v = selection::pve(model, data);
  j["metrics"] = {{"mse", {{"blocks", optional_list(m.blocks)}, {"total", optional_json(m.total)}}},
                  {"pve", {{"blocks", optional_list(v.blocks)}, {"total", optional_json(v.total)}}}};
  try {
    j["metrics"]["cophenetic"] = clustering::cophenetic_correlation(model.W);
  } catch (const NumericalError&) {
    j["metrics"]["cophenetic"] = nullptr;
  }
  return j;
}

nlohmann::json selection_json(const selection::SelectionReport& r) {
  nlohmann::json j;
  j["p_values"] = r.p_values;
  j["mse"] = optional_list(r.mse);
  j["pve"] = optional_list(r.pve);
  j["cophenetic"] = optional_list(r.cophenetic);
  auto mb = nlohmann::json::array();
  for (const auto& v : r.mse_blocks) mb.push_back(optional_list(v));
  j["mse_blocks"] = std::move(mb);
  auto pb = nlohmann::json::array();
  for (const auto& v : r.pve_blocks) pb.push_back(optional_list(v));
  j["pve_blocks"] = std::move(pb);
  auto failures = nlohmann::json::array();
  for (const auto& f : r.failures) failures.push_back(f.empty() ? nlohmann::json(nullptr) : nlohmann::json(f));
  j["failures"] = std::move(failures);
  j["suggested_p"] = r.suggested_p;
  j["rule"] = r.rule;
  j["no_knee"] = r.no_knee;
  return j;
}

nlohmann::json stability_json(const evaluation::StabilityReport& r) {
  return {{"run_count", r.run_count}, {"failed_runs", r.failed_runs}, {"warnings", r.warnings}};
}

nlohmann::json report_envelope(const std::string& command, std::uint64_t seed, const MultiBlockDataset& data,
                               const std::vector<std::string>& warnings) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = command;
  j["seed"] = seed;
  auto blocks = nlohmann::json::array();
  for (std::size_t k = 0; k < data.block_count(); ++k)
    blocks.push_back({{"name", data.block_names[k]}, {"variables", data.blocks[k].cols()}});
  j["data"] = {{"samples", data.samples()}, {"blocks", std::move(blocks)}};
  j["warnings"] = warnings;
  return j;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace pintmf::io
