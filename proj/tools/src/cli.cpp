#include "pintmf/cli.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "pintmf/error.hpp"
#include "pintmf/evaluation.hpp"
#include "pintmf/factorization.hpp"
#include "pintmf/io.hpp"
#include "pintmf/model_selection.hpp"
#include "pintmf/parallel.hpp"
#include "pintmf/simulate.hpp"

namespace pintmf::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataArgs {
  std::vector<std::string> blocks;
  std::vector<std::string> names;
  std::vector<std::string> m_value_blocks;
  double m_value_epsilon = 0.001;
};

struct ModelArgs {
  std::string penalty = "auto";
  std::vector<double> lambda;
  std::vector<double> mu;
  int cv_folds = 5;
  std::string init = "snf";
  int snf_neighbors = 0;
  int max_iter = 50;
  double ari_threshold = 1.0;
  int stable_rounds = 2;
  double tol = 1e-7;
  double selection_threshold = 0.0;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--block", d.blocks, "Block CSV (repeat per block)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--name", d.names, "Block names in --block order (default: file stems)");
  cmd->add_option("--m-value", d.m_value_blocks, "Apply the M-value transform to this block (proportions in [0,1])");
  cmd->add_option("--m-value-epsilon", d.m_value_epsilon, "Offset for the M-value transform")->capture_default_str();
}

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--penalty", m.penalty, "Penalty selection")
      ->check(CLI::IsMember({"auto", "fixed"}))
      ->capture_default_str();
  cmd->add_option("--lambda", m.lambda, "Fixed H penalty: one value, or one per block");
  cmd->add_option("--mu", m.mu, "Fixed W penalty: one value, or one per sample");
  cmd->add_option("--cv-folds", m.cv_folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
  cmd->add_option("--init", m.init, "Initialization")
      ->check(CLI::IsMember({"snf", "svd", "hclust", "random"}))
      ->capture_default_str();
  cmd->add_option("--snf-neighbors", m.snf_neighbors, "SNF neighbourhood size (0: automatic)")->capture_default_str();
  cmd->add_option("--max-iter", m.max_iter, "Maximum outer iterations")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--ari-threshold", m.ari_threshold, "Stop when consecutive partitions agree at this ARI")
      ->capture_default_str();
  cmd->add_option("--stable-rounds", m.stable_rounds, "Consecutive agreeing iterations required to stop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tol", m.tol, "Lasso coordinate-descent tolerance")->capture_default_str();
  cmd->add_option("--selection-threshold", m.selection_threshold, "|h| above which a variable counts as selected")
      ->capture_default_str();
}

void add_common_options(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (default: PINTMF_NUM_THREADS or all cores)");
  auto* out = cmd->add_option("--out", c.out, "Output directory");
  if (needs_out) out->required();
}

MultiBlockDataset load(const DataArgs& d, std::vector<std::string>& warnings) {
  std::vector<fs::path> paths(d.blocks.begin(), d.blocks.end());
  if (!d.names.empty() && d.names.size() != d.blocks.size())
    throw UsageError("--name must be given once per --block");
  auto data = io::load_blocks(paths, d.names, &warnings);
  for (const auto& name : d.m_value_blocks) {
    bool found = false;
    for (std::size_t k = 0; k < data.block_count(); ++k)
      if (data.block_names[k] == name) {
        data.blocks[k] = simulate::m_value_transform(data.blocks[k], d.m_value_epsilon);
        found = true;
      }
    if (!found) throw InputError("--m-value: no block named '" + name + "'");
  }
  return data;
}

PenaltyConfig penalties(const ModelArgs& m, const MultiBlockDataset& data, std::uint64_t seed) {
  if (m.penalty == "auto") {
    if (!m.lambda.empty() || !m.mu.empty()) throw UsageError("--lambda/--mu require --penalty fixed");
    return PenaltyConfig::automatic(m.cv_folds, seed);
  }
  if (m.lambda.empty() || m.mu.empty()) throw UsageError("--penalty fixed requires --lambda and --mu");
  auto lambda = m.lambda;
  auto mu = m.mu;
  if (lambda.size() == 1) lambda.assign(data.block_count(), lambda.front());
  if (mu.size() == 1) mu.assign(static_cast<std::size_t>(data.samples()), mu.front());
  auto c = PenaltyConfig::fixed_values(std::move(lambda), std::move(mu));
  c.seed = seed;
  return c;
}

FitOptions fit_options(const ModelArgs& m, std::uint64_t seed) {
  FitOptions o;
  o.max_iter = m.max_iter;
  o.ari_stop_threshold = m.ari_threshold;
  o.stable_rounds = m.stable_rounds;
  o.inner_tol = m.tol;
  o.init.kind = init::parse_init_kind(m.init);
  o.init.seed = seed;
  o.init.snf.neighbors = m.snf_neighbors;
  return o;
}

void apply_threads(const Common& c) {
  configure_threads_from_env();
  if (c.threads > 0) set_num_threads(c.threads);
}

std::vector<int> parse_p_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--p-range expects MIN:MAX");
  int lo = 0;
  int hi = 0;
  try {
    std::size_t used = 0;
    lo = std::stoi(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("");
    const auto rest = text.substr(colon + 1);
    hi = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("");
  } catch (const std::logic_error&) {
    throw UsageError("--p-range expects MIN:MAX");
  }
  if (lo > hi) throw UsageError("--p-range: MIN exceeds MAX");
  std::vector<int> out;
  for (int p = lo; p <= hi; ++p) out.push_back(p);
  return out;
}

int cmd_fit(const DataArgs& d, const ModelArgs& m, const Common& c, std::optional<int> p,
            const std::string& p_range) {
  if (!p && p_range.empty()) throw UsageError("fit requires --p or --p-range");
  apply_threads(c);
  std::vector<std::string> warnings;
  const auto data = load(d, warnings);
  const auto pen = penalties(m, data, c.seed);
  const auto opts = fit_options(m, c.seed);

  auto report = io::report_envelope("fit", c.seed, data, warnings);
  std::optional<FactorModel> model;
  if (p) {
    model = fit(data, *p, pen, opts);
  } else {
    std::vector<std::optional<FactorModel>> models;
    const auto scan = selection::scan_p(data, parse_p_range(p_range), pen, opts, &models);
    report["selection"] = io::selection_json(scan);
    for (std::size_t i = 0; i < scan.p_values.size(); ++i)
      if (scan.p_values[i] == scan.suggested_p) model = std::move(models[i]);
  }
  const fs::path dir(c.out);
  io::write_model_artifacts(dir, *model, data, m.selection_threshold);
  report["fit"] = io::fit_json(*model, data, opts);
  io::write_json(dir / "report.json", report);
  return kOk;
}

int cmd_select(const DataArgs& d, const ModelArgs& m, const Common& c, int p_min, int p_max) {
  if (p_min > p_max) throw UsageError("--p-min exceeds --p-max");
  apply_threads(c);
  std::vector<std::string> warnings;
  const auto data = load(d, warnings);
  std::vector<int> ps;
  for (int p = p_min; p <= p_max; ++p) ps.push_back(p);
  const auto scan = selection::scan_p(data, ps, penalties(m, data, c.seed), fit_options(m, c.seed));
  auto report = io::report_envelope("select-p", c.seed, data, warnings);
  report["selection"] = io::selection_json(scan);
  fs::create_directories(c.out);
  io::write_json(fs::path(c.out) / "report.json", report);
  return kOk;
}

int cmd_jackknife(const DataArgs& d, const ModelArgs& m, const Common& c, int p) {
  apply_threads(c);
  std::vector<std::string> warnings;
  const auto data = load(d, warnings);
  const auto opts = fit_options(m, c.seed);
  const auto stab = evaluation::jackknife(data, p, penalties(m, data, c.seed), opts, m.selection_threshold);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  for (std::size_t k = 0; k < data.block_count(); ++k)
    io::write_text(dir / ("stability_" + data.block_names[k] + ".csv"),
                   io::stability_csv(data.variable_ids[k], stab.frequency[k]));
  auto report = io::report_envelope("jackknife", c.seed, data, warnings);
  report["P"] = p;
  report["stability"] = io::stability_json(stab);
  io::write_json(dir / "report.json", report);
  return kOk;
}

int cmd_simulate(const std::string& bench, const std::string& spec_path, std::optional<std::uint64_t> seed,
                 const std::string& out) {
  if (bench.empty() == spec_path.empty()) throw UsageError("simulate requires exactly one of --benchmark or --spec");
  simulate::SimSpec spec;
  if (!bench.empty()) {
    spec = simulate::benchmark(bench, seed.value_or(0));
  } else {
    try {
      spec = simulate::spec_from_json(nlohmann::json::parse(io::read_text(spec_path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(spec_path + ": " + e.what());
    }
    if (seed) spec.seed = *seed;
  }
  const auto sim = simulate::generate(spec);
  const fs::path dir(out);
  io::write_blocks(dir, sim.data);
  io::write_text(dir / "truth.json", io::to_json(io::truth_from(sim.truth, sim.data), sim.data.sample_ids).dump(2) + "\n");
  io::write_text(dir / "spec.json", simulate::to_json(spec).dump(2) + "\n");
  return kOk;
}

int cmd_evaluate(const std::string& run_dir, std::string clusters_path, std::vector<std::string> rankings,
                 const std::string& truth_path, std::ostream& out) {
  if (run_dir.empty() && clusters_path.empty() && rankings.empty())
    throw UsageError("evaluate requires --run-dir, --clusters or --ranking");
  const auto truth = io::read_truth(truth_path);

  std::map<std::string, fs::path> ranking_files;
  if (!run_dir.empty()) {
    if (clusters_path.empty()) clusters_path = (fs::path(run_dir) / "clusters.csv").string();
    for (const auto& [block, _] : truth.relevant) {
      const auto f = fs::path(run_dir) / ("ranking_" + block + ".csv");
      if (fs::exists(f)) ranking_files[block] = f;
    }
  }
  for (const auto& r : rankings) {
    const auto eq = r.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--ranking expects BLOCK=PATH");
    ranking_files[r.substr(0, eq)] = r.substr(eq + 1);
  }

  nlohmann::ordered_json result;
  if (!clusters_path.empty()) {
    const auto found = io::read_clusters(clusters_path);
    std::vector<int> truth_labels;
    for (const auto& id : found.sample_ids) {
      const auto it = truth.labels.find(id);
      if (it == truth.labels.end()) throw InputError("evaluate: sample '" + id + "' has no true label");
      truth_labels.push_back(it->second);
    }
    result["ari"] = evaluation::adjusted_rand_index(found.labels, truth_labels);
    result["samples"] = found.sample_ids.size();
  }
  if (!ranking_files.empty()) {
    result["auroc"] = nlohmann::ordered_json::object();
    for (const auto& [block, path] : ranking_files) {
      const auto it = truth.relevant.find(block);
      if (it == truth.relevant.end()) throw InputError("evaluate: truth has no relevant set for block '" + block + "'");
      const std::set<std::string> positives(it->second.begin(), it->second.end());
      const auto rows = io::read_ranking(path);
      std::vector<double> scores;
      std::vector<char> is_true;
      std::set<std::string> seen;
      for (const auto& row : rows) {
        scores.push_back(row.score);
        is_true.push_back(positives.count(row.variable_id) > 0 ? 1 : 0);
        seen.insert(row.variable_id);
      }
      for (const auto& id : positives)
        if (seen.count(id) == 0) throw InputError("evaluate: relevant variable '" + id + "' missing from " + path.string());
      result["auroc"][block] = evaluation::auroc(scores, is_true);
    }
  }
  out << result.dump(2) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized integrative matrix factorization for multi-block data"};
  app.name(args.empty() ? "pintmf" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  DataArgs data_args;
  ModelArgs model_args;
  Common common;

  auto* fit_cmd = app.add_subcommand("fit", "Fit the factorization and write W, H, clusters and rankings");
  add_data_options(fit_cmd, data_args);
  add_model_options(fit_cmd, model_args);
  add_common_options(fit_cmd, common, true);
  std::optional<int> fit_p;
  std::string p_range;
  auto* p_opt = fit_cmd->add_option("--p", fit_p, "Number of latent variables")->check(CLI::Range(2, 1 << 20));
  auto* range_opt = fit_cmd->add_option("--p-range", p_range, "Scan MIN:MAX and keep the suggested P");
  p_opt->excludes(range_opt);

  auto* select_cmd = app.add_subcommand("select-p", "Scan P and report MSE, PVE, cophenetic and the suggested P");
  DataArgs select_data;
  ModelArgs select_model;
  Common select_common;
  add_data_options(select_cmd, select_data);
  add_model_options(select_cmd, select_model);
  add_common_options(select_cmd, select_common, true);
  int p_min = 2;
  int p_max = 2;
  select_cmd->add_option("--p-min", p_min, "Smallest P")->required()->check(CLI::Range(2, 1 << 20));
  select_cmd->add_option("--p-max", p_max, "Largest P")->required()->check(CLI::Range(2, 1 << 20));

  auto* jk_cmd = app.add_subcommand("jackknife", "Leave-one-sample-out selection frequencies");
  DataArgs jk_data;
  ModelArgs jk_model;
  Common jk_common;
  add_data_options(jk_cmd, jk_data);
  add_model_options(jk_cmd, jk_model);
  add_common_options(jk_cmd, jk_common, true);
  int jk_p = 2;
  jk_cmd->add_option("--p", jk_p, "Number of latent variables")->required()->check(CLI::Range(2, 1 << 20));

  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic benchmark dataset and its truth");
  std::string bench;
  std::string spec_path;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out;
  sim_cmd->add_option("--benchmark", bench, "B1..B8");
  sim_cmd->add_option("--spec", spec_path, "Simulation spec (JSON)")->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim_seed, "Seed (overrides the spec file)");
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "Print ARI and AUROC against a truth file as JSON");
  std::string run_dir;
  std::string clusters_path;
  std::vector<std::string> ranking_args;
  std::string truth_path;
  eval_cmd->add_option("--run-dir", run_dir, "Directory written by fit")->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--clusters", clusters_path, "clusters.csv")->check(CLI::ExistingFile);
  eval_cmd->add_option("--ranking", ranking_args, "BLOCK=ranking.csv (repeatable)");
  eval_cmd->add_option("--truth", truth_path, "Truth JSON")->required()->check(CLI::ExistingFile);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kInputError;
  }

  auto* active = app.get_subcommands().front();
  try {
    if (active == fit_cmd) return cmd_fit(data_args, model_args, common, fit_p, p_range);
    if (active == select_cmd) return cmd_select(select_data, select_model, select_common, p_min, p_max);
    if (active == jk_cmd) return cmd_jackknife(jk_data, jk_model, jk_common, jk_p);
    if (active == sim_cmd) return cmd_simulate(bench, spec_path, sim_seed, sim_out);
    return cmd_evaluate(run_dir, clusters_path, ranking_args, truth_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace pintmf::cli
