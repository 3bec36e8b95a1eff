// swiftlearn command-line benchmark harness.
//
//   swiftlearn run   --dataset mixture --model mlp:16 --drop-ratio 0.7 ...
//   swiftlearn sweep --dataset blobs --keep-ratios 0.1,0.3,1.0 ...
//
// `run` executes one paired baseline/swiftlearn experiment and writes
// report.json (plus importance.csv and subsets.csv with --emit-importance).
// `sweep` runs a parameter grid and writes one report per point plus
// summary.csv. Flags can come from a key=value config file via --config;
// command-line flags override it. SWIFTLEARN_SEED is used when --seed is
// absent. Exit code 0 on success; failures print one
// "swiftlearn: error: ..." line and exit non-zero.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "swiftlearn/swiftlearn.hpp"

namespace {

namespace fs = std::filesystem;
using namespace swiftlearn;

struct CommonFlags {
  double keep_ratio = 1.0;
  double drop_ratio = 0.0;
  double temperature = 1.0;
  std::uint32_t warmup_epochs = 2;
  std::string reeval_interval = "never";
  std::string update_policy = "frozen";
  std::string selection = "topk";
  std::uint32_t epochs = 10;
  std::uint64_t seed = 42;
  std::string dataset = "blobs";
  std::string model = "linear";
  double lr = 0.1;
  std::size_t batch_size = 32;
  std::string out_dir = "out";
  bool emit_importance = false;

  std::size_t n_samples = 2000;
  double val_fraction = 0.2;
  std::size_t classes = 2;
  std::size_t dim = 2;
  double separation = 6.0;
  double noise = 1.0;
  long long label_column = -1;  // -1 = last column
  bool has_header = false;

  CLI::Option* keep_opt = nullptr;
  CLI::Option* drop_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  f.keep_opt = cmd->add_option("--keep-ratio", f.keep_ratio,
                               "Fraction of samples trained per sampled epoch");
  f.drop_opt = cmd->add_option("--drop-ratio", f.drop_ratio,
                               "Fraction of samples dropped (1 - keep ratio)");
  f.keep_opt->excludes(f.drop_opt);
  f.drop_opt->excludes(f.keep_opt);

  cmd->add_option("--temperature", f.temperature, "Softmax temperature");
  cmd->add_option("--warmup-epochs", f.warmup_epochs,
                  "Initial full-dataset epochs (>= 2)");
  cmd->add_option("--reeval-interval", f.reeval_interval,
                  "Epochs between full metric refreshes, or 'never'");
  cmd->add_option("--update-policy", f.update_policy,
                  "Score update policy after warm-up")
      ->check(CLI::IsMember({"frozen", "partial", "full"}));
  cmd->add_option("--selection", f.selection, "Subset selection mode")
      ->check(CLI::IsMember({"topk", "stochastic"}));
  cmd->add_option("--epochs", f.epochs, "Total training epochs");
  cmd->add_option("--seed", f.seed, "Master seed for all randomness")
      ->envname("SWIFTLEARN_SEED");
  cmd->add_option("--dataset", f.dataset, "blobs | mixture | csv:<path>");
  cmd->add_option("--model", f.model, "linear | mlp:<hidden>");
  cmd->add_option("--lr", f.lr, "SGD learning rate");
  cmd->add_option("--batch-size", f.batch_size, "SGD mini-batch size");
  cmd->add_option("--out", f.out_dir, "Output directory for reports");
  cmd->add_flag("--emit-importance", f.emit_importance,
                "Write importance table and subset CSVs next to the report");

  cmd->add_option("--n-samples", f.n_samples,
                  "Total samples generated before the train/validation split");
  cmd->add_option("--val-fraction", f.val_fraction, "Validation fraction");
  cmd->add_option("--classes", f.classes, "Blob dataset class count");
  cmd->add_option("--dim", f.dim, "Blob dataset feature dimension");
  cmd->add_option("--separation", f.separation, "Blob class-center separation");
  cmd->add_option("--noise", f.noise, "Blob noise sigma");
  cmd->add_option("--label-column", f.label_column,
                  "CSV label column index (-1 = last)");
  cmd->add_flag("--has-header", f.has_header, "CSV file has a header row");

  cmd->set_config("--config", "", "Read flags from a key=value file");
}

std::optional<std::uint32_t> parse_interval(const std::string& text) {
  if (text == "never") return std::nullopt;
  try {
    const long long v = std::stoll(text);
    if (v < 1) throw std::out_of_range(text);
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(
        "reeval-interval: expected a positive integer or 'never', got '" +
        text + "'");
  }
}

UpdatePolicy parse_policy(const std::string& text) {
  if (text == "frozen") return UpdatePolicy::Frozen;
  if (text == "partial") return UpdatePolicy::PartialChosen;
  if (text == "full") return UpdatePolicy::FullEveryK;
  throw std::invalid_argument("update-policy: expected frozen, partial, or full, got '" +
                              text + "'");
}

SamplerConfig sampler_from_flags(const CommonFlags& f) {
  SamplerConfig cfg;
  cfg.keep_ratio =
      f.drop_opt->count() ? keep_from_drop(f.drop_ratio) : f.keep_ratio;
  cfg.temperature = f.temperature;
  cfg.warmup_epochs = f.warmup_epochs;
  cfg.reeval_interval = parse_interval(f.reeval_interval);
  cfg.update_policy = parse_policy(f.update_policy);
  cfg.selection_mode = f.selection == "topk"
                           ? SelectionMode::TopK
                           : SelectionMode::StochasticWithoutReplacement;
  cfg.total_epochs = f.epochs;
  cfg.seed = f.seed;
  return cfg;
}

DatasetSpec dataset_from_flags(const CommonFlags& f) {
  DatasetSpec spec = parse_dataset_spec(f.dataset);
  spec.n_samples = f.n_samples;
  spec.validation_fraction = f.val_fraction;
  spec.n_classes = f.classes;
  spec.dim = f.dim;
  spec.separation = f.separation;
  spec.noise_sigma = f.noise;
  spec.label_column = f.label_column < 0
                          ? std::string::npos
                          : static_cast<std::size_t>(f.label_column);
  spec.has_header = f.has_header;
  return spec;
}

SgdConfig sgd_from_flags(const CommonFlags& f) {
  SgdConfig sgd;
  sgd.learning_rate = f.lr;
  sgd.batch_size = f.batch_size;
  if (auto err = sgd_config_error(sgd)) throw std::invalid_argument(*err);
  return sgd;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, T (*parse_one)(const std::string&)) {
  std::vector<T> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ','))
    if (!item.empty()) out.push_back(parse_one(item));
  return out;
}

double parse_double(const std::string& s) { return std::stod(s); }

int cmd_run(const CommonFlags& flags) {
  const ValidatedConfig cfg = validate_config(sampler_from_flags(flags));
  const DatasetSpec dataset = dataset_from_flags(flags);
  const ModelSpec model = parse_model_spec(flags.model);
  const SgdConfig sgd = sgd_from_flags(flags);

  ExperimentArtifacts artifacts;
  const TrainingReport report =
      run_experiment(cfg, dataset, model, sgd,
                     flags.emit_importance ? &artifacts : nullptr);

  const fs::path out_dir(flags.out_dir);
  const fs::path report_path = out_dir / "report.json";
  write_report(report, report_path);
  if (flags.emit_importance) {
    std::ofstream imp(out_dir / "importance.csv");
    if (!imp)
      throw std::runtime_error("cannot open '" +
                               (out_dir / "importance.csv").string() + "'");
    write_importance_csv(artifacts.final_table, imp);
    std::ofstream subs(out_dir / "subsets.csv");
    if (!subs)
      throw std::runtime_error("cannot open '" +
                               (out_dir / "subsets.csv").string() + "'");
    write_subsets_csv(artifacts.subsets, subs);
  }

  print_report(report, std::cout);
  std::cout << "\nreport written to " << report_path.string() << "\n";
  return 0;
}

struct SweepFlags {
  std::string keep_ratios;
  std::string drop_ratios;
  std::string temperatures;
  std::string reeval_intervals;
  std::string update_policies;
  CLI::Option* keeps_opt = nullptr;
  CLI::Option* drops_opt = nullptr;
};

int cmd_sweep(const CommonFlags& flags, const SweepFlags& sf) {
  const SamplerConfig base = sampler_from_flags(flags);
  const DatasetSpec dataset = dataset_from_flags(flags);
  const ModelSpec model = parse_model_spec(flags.model);
  const SgdConfig sgd = sgd_from_flags(flags);

  SweepGrid grid;
  if (sf.keeps_opt->count())
    grid.keep_ratios = parse_list<double>(sf.keep_ratios, parse_double);
  if (sf.drops_opt->count())
    for (double d : parse_list<double>(sf.drop_ratios, parse_double))
      grid.keep_ratios.push_back(keep_from_drop(d));
  if (!sf.temperatures.empty())
    grid.temperatures = parse_list<double>(sf.temperatures, parse_double);
  if (!sf.reeval_intervals.empty()) {
    std::stringstream stream(sf.reeval_intervals);
    std::string item;
    while (std::getline(stream, item, ','))
      if (!item.empty()) grid.reeval_intervals.push_back(parse_interval(item));
  }
  if (!sf.update_policies.empty()) {
    std::stringstream stream(sf.update_policies);
    std::string item;
    while (std::getline(stream, item, ','))
      if (!item.empty()) grid.policies.push_back(parse_policy(item));
  }

  const SweepResult result = sweep(base, dataset, model, sgd, grid);

  const fs::path out_dir(flags.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::size_t report_idx = 0;
  for (const TrainingReport& report : result.reports) {
    char name[32];
    std::snprintf(name, sizeof(name), "sweep_report_%03zu.json", report_idx++);
    write_report(report, out_dir / name);
  }
  const fs::path summary_path = out_dir / "summary.csv";
  std::ofstream summary(summary_path);
  if (!summary)
    throw std::runtime_error("cannot open '" + summary_path.string() + "'");
  write_sweep_csv(result.rows, summary);

  std::cout << "r        sigma    K        policy   final_acc  delta_pp  steps_x\n";
  for (const SweepRow& row : result.rows) {
    char line[160];
    std::string interval =
        row.reeval_interval ? std::to_string(*row.reeval_interval) : "never";
    if (row.ok) {
      std::snprintf(line, sizeof(line), "%-8.3g %-8.3g %-8s %-8s %-10.4f %-9.3f %-8.3f",
                    row.keep_ratio, row.temperature, interval.c_str(),
                    to_string(row.policy), row.final_acc, row.delta_acc,
                    row.step_speedup);
      std::cout << line << "\n";
    } else {
      std::snprintf(line, sizeof(line), "%-8.3g %-8.3g %-8s %-8s FAILED: %s",
                    row.keep_ratio, row.temperature, interval.c_str(),
                    to_string(row.policy), row.error.c_str());
      std::cout << line << "\n";
      std::cerr << "swiftlearn: warning: grid point failed: " << row.error << "\n";
    }
  }
  std::cout << "\nsummary written to " << summary_path.string() << " ("
            << result.reports.size() << "/" << result.rows.size()
            << " points succeeded)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swiftlearn: data-efficient training benchmark harness"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run_cmd =
      app.add_subcommand("run", "One paired baseline/swiftlearn experiment");
  add_common_flags(run_cmd, run_flags);

  CommonFlags sweep_common;
  SweepFlags sweep_flags;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Grid of experiments plus summary CSV");
  add_common_flags(sweep_cmd, sweep_common);
  sweep_flags.keeps_opt = sweep_cmd->add_option(
      "--keep-ratios", sweep_flags.keep_ratios, "Comma list of keep ratios");
  sweep_flags.drops_opt = sweep_cmd->add_option(
      "--drop-ratios", sweep_flags.drop_ratios, "Comma list of drop ratios");
  sweep_flags.keeps_opt->excludes(sweep_flags.drops_opt);
  sweep_flags.drops_opt->excludes(sweep_flags.keeps_opt);
  sweep_cmd->add_option("--temperatures", sweep_flags.temperatures,
                        "Comma list of softmax temperatures");
  sweep_cmd->add_option("--reeval-intervals", sweep_flags.reeval_intervals,
                        "Comma list of refresh intervals ('never' allowed)");
  sweep_cmd->add_option("--update-policies", sweep_flags.update_policies,
                        "Comma list of update policies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "swiftlearn: error: " << e.what() << "\n";
    return e.get_exit_code();
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_flags);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_common, sweep_flags);
  } catch (const std::exception& e) {
    std::cerr << "swiftlearn: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
