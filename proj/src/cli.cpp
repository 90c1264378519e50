#include "jsrda/cli.hpp"

#include "jsrda/error.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace jsrda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kModule = "cli";

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(kModule, "cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(kModule, "cannot write " + path.string());
  out << text;
}

MultiViewCorpus corpus_for(const ExperimentConfig& cfg) {
  if (cfg.manifest) return load_corpus(*cfg.manifest);
  return synth_corpus(*cfg.synth);
}

// Applies the sweep value to the matching hyperparameter.
void set_parameter(ExperimentConfig& cfg, const std::string& name, const std::string& value) {
  try {
    std::size_t used = 0;
    if (name == "N_p") {
      cfg.msda.noise_prob = std::stod(value, &used);
    } else if (name == "L") {
      cfg.msda.layers = std::stoi(value, &used);
    } else if (name == "K") {
      cfg.dict.atoms = std::stoi(value, &used);
    } else if (name == "beta") {
      cfg.adapt.beta = std::stod(value, &used);
    } else if (name == "k") {
      cfg.adapt.subspace_dim = std::stoi(value, &used);
    } else if (name == "T") {
      cfg.adapt.iterations = std::stoi(value, &used);
    }
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw Error(kModule, "invalid value '" + value + "' for parameter " + name);
  }
}

RunOutput run_into(const ExperimentConfig& cfg, const fs::path& out_dir, int jobs) {
  cfg.validate();
  const std::string started = utc_timestamp();
  const MultiViewCorpus corpus = corpus_for(cfg);
  RunOutput res;
  res.table = run_protocol(corpus, cfg, jobs);
  ensure_dir(out_dir);
  res.results_csv = out_dir / "results.csv";
  res.table.write_csv(res.results_csv);

  ExperimentConfig resolved = cfg;
  resolved.output = out_dir;
  json manifest = {{"artifact", "jsrda"},
                   {"version", kVersion},
                   {"seed", cfg.seed},
                   {"started_at", started},
                   {"finished_at", utc_timestamp()},
                   {"results_csv", "results.csv"},
                   {"resolved_config", to_json(resolved)}};
  res.manifest = out_dir / "run_manifest.json";
  write_text(res.manifest, manifest.dump(2) + "\n");
  return res;
}

ExperimentConfig resolve_options(const RunOptions& opts, fs::path& out_dir) {
  ExperimentConfig cfg = load_experiment(opts.config);
  if (opts.seed) cfg.apply_seed(*opts.seed);
  out_dir = opts.out ? *opts.out : cfg.output;
  if (opts.jobs < 1) throw Error(kModule, "--jobs must be >= 1");
  return cfg;
}

}  // namespace

ExperimentConfig load_experiment(const fs::path& path) {
  if (!fs::exists(path)) throw Error(kModule, "config file not found: " + path.string());
  const json doc = read_json_file(path);
  const fs::path base = fs::absolute(path).parent_path();
  if (doc.contains("resolved_config")) return experiment_from_json(doc.at("resolved_config"), base);
  return experiment_from_json(doc, base);
}

fs::path cmd_synth(const fs::path& config, const fs::path& out_dir,
                   std::optional<std::uint64_t> seed) {
  if (!fs::exists(config)) throw Error(kModule, "config file not found: " + config.string());
  json doc = read_json_file(config);
  if (doc.contains("synth")) doc = doc.at("synth");
  SynthConfig cfg = synth_from_json(doc);
  if (seed) cfg.seed = *seed;
  const MultiViewCorpus corpus = synth_corpus(cfg);
  ensure_dir(out_dir);
  const fs::path manifest = save_corpus(corpus, out_dir);
  write_text(out_dir / "synth_config.json", to_json(cfg).dump(2) + "\n");
  return manifest;
}

RunOutput cmd_run(const RunOptions& opts) {
  fs::path out_dir;
  const ExperimentConfig cfg = resolve_options(opts, out_dir);
  return run_into(cfg, out_dir, opts.jobs);
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {"N_p", "L", "K", "beta", "k", "T"};
  return names;
}

std::vector<SweepPoint> cmd_sweep(const RunOptions& opts, const std::string& parameter,
                                  const std::vector<std::string>& values) {
  const auto& names = sweep_parameters();
  if (std::find(names.begin(), names.end(), parameter) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw Error(kModule, "unknown sweep parameter '" + parameter + "'; valid names: " + list);
  }
  if (values.empty()) throw Error(kModule, "sweep needs at least one value");
  fs::path out_dir;
  const ExperimentConfig base = resolve_options(opts, out_dir);
  ensure_dir(out_dir);

  std::vector<SweepPoint> points;
  for (const auto& value : values) {
    ExperimentConfig cfg = base;
    set_parameter(cfg, parameter, value);
    const RunOutput run = run_into(cfg, out_dir / (parameter + "=" + value), opts.jobs);
    points.push_back(SweepPoint{value, run.table.mean_accuracy, run.table.mean_baseline});
  }
  std::ostringstream csv;
  csv << "parameter,value,mean_accuracy,mean_baseline_accuracy\n";
  for (const auto& p : points) {
    csv << parameter << ',' << p.value << ',' << format_exact(p.mean_accuracy) << ','
        << format_exact(p.mean_baseline) << '\n';
  }
  write_text(out_dir / "sweep.csv", csv.str());
  return points;
}

void cmd_report(const fs::path& results_csv, std::ostream& out, const std::string& layout) {
  const ResultsTable table = ResultsTable::read_csv(results_csv);
  if (layout == "rows" || layout == "both") out << format_rows(table);
  if (layout == "both") out << '\n';
  if (layout == "pairwise" || layout == "both") out << format_pairwise(table);
  if (layout != "rows" && layout != "pairwise" && layout != "both")
    throw Error(kModule, "unknown layout '" + layout + "' (expected rows, pairwise or both)");
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-view recognition with shared features, transferable dictionaries and "
               "distribution adaptation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view corpus");
  synth->add_option("--config", config, "Synthetic corpus config (JSON)")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();
  auto* synth_seed = synth->add_option("--seed", seed, "Override the config seed");

  auto* run = app.add_subcommand("run", "Run the leave-one-class-out protocol");
  run->add_option("--config", config, "Experiment config or run manifest (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides config)");
  auto* run_seed = run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string parameter;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run the protocol over a list of parameter values");
  sweep->add_option("--config", config, "Experiment config (JSON)")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides config)");
  auto* sweep_seed = sweep->add_option("--seed", seed, "Override the config seed");
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--param", parameter, "One of N_p, L, K, beta, k, T")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  std::string results;
  std::string layout = "both";
  auto* report = app.add_subcommand("report", "Pretty-print a results CSV");
  report->add_option("results", results, "results.csv")->required();
  report->add_option("--layout", layout, "rows, pairwise or both")
      ->check(CLI::IsMember({"rows", "pairwise", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    auto options = [&](CLI::Option* seed_opt) {
      RunOptions o;
      o.config = config;
      if (!out_dir.empty()) o.out = fs::path(out_dir);
      if (seed_opt->count() > 0) o.seed = seed;
      o.jobs = jobs;
      return o;
    };
    if (synth->parsed()) {
      const auto manifest =
          cmd_synth(config, out_dir,
                    synth_seed->count() ? std::optional<std::uint64_t>(seed) : std::nullopt);
      out << "wrote " << manifest.string() << '\n';
    } else if (run->parsed()) {
      const auto res = cmd_run(options(run_seed));
      out << format_rows(res.table) << "wrote " << res.results_csv.string() << " and "
          << res.manifest.string() << '\n';
    } else if (sweep->parsed()) {
      const auto points = cmd_sweep(options(sweep_seed), parameter, values);
      for (const auto& p : points) {
        out << parameter << '=' << p.value << "  mean accuracy "
            << std::fixed << std::setprecision(4) << p.mean_accuracy << '\n';
      }
    } else if (report->parsed()) {
      cmd_report(results, out, layout);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace jsrda
