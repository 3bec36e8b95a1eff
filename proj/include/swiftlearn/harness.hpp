#pragma once

// Experiment runner: executes a vanilla baseline and a swiftlearn run under
// identical seeds, measures accuracy / step counts / wall-clock, and writes
// machine-readable reports. The baseline and treatment share the data,
// split, and weight-init streams; only the selection stream differs, so any
// difference between the two runs is attributable to sample selection.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "swiftlearn/core.hpp"
#include "swiftlearn/data.hpp"
#include "swiftlearn/metric.hpp"
#include "swiftlearn/model.hpp"
#include "swiftlearn/scheduler.hpp"
#include "swiftlearn/selector.hpp"

namespace swiftlearn {

inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Experiment specs

struct DatasetSpec {
  enum class Kind { Blobs, Mixture, Csv };
  Kind kind = Kind::Blobs;

  std::size_t n_samples = 2000;  // total before the train/validation split
  double validation_fraction = 0.2;

  // blobs parameters
  std::size_t n_classes = 2;
  std::size_t dim = 2;
  double separation = 6.0;
  double noise_sigma = 1.0;

  // csv parameters
  std::string csv_path;
  std::size_t label_column = std::string::npos;  // npos = last column
  bool has_header = false;

  std::string describe() const {
    switch (kind) {
      case Kind::Blobs: {
        std::ostringstream s;
        s << "blobs(n=" << n_samples << ",classes=" << n_classes
          << ",dim=" << dim << ",sep=" << separation << ",sigma=" << noise_sigma
          << ")";
        return s.str();
      }
      case Kind::Mixture:
        return "mixture(n=" + std::to_string(n_samples) + ")";
      case Kind::Csv:
        return "csv:" + csv_path;
    }
    return "?";
  }
};

struct ModelSpec {
  enum class Kind { Linear, Mlp };
  Kind kind = Kind::Linear;
  std::size_t hidden = 16;

  std::string describe() const {
    return kind == Kind::Linear ? "linear" : "mlp:" + std::to_string(hidden);
  }
};

/// "blobs" | "mixture" | "csv:<path>". Sizes and split come from flags.
inline DatasetSpec parse_dataset_spec(const std::string& text) {
  DatasetSpec spec;
  if (text == "blobs") {
    spec.kind = DatasetSpec::Kind::Blobs;
  } else if (text == "mixture") {
    spec.kind = DatasetSpec::Kind::Mixture;
  } else if (text.rfind("csv:", 0) == 0) {
    spec.kind = DatasetSpec::Kind::Csv;
    spec.csv_path = text.substr(4);
    if (spec.csv_path.empty())
      throw std::invalid_argument("dataset: csv spec needs a path, got '" + text + "'");
  } else {
    throw std::invalid_argument(
        "dataset: expected blobs, mixture, or csv:<path>, got '" + text + "'");
  }
  return spec;
}

/// "linear" | "mlp:<hidden>".
inline ModelSpec parse_model_spec(const std::string& text) {
  ModelSpec spec;
  if (text == "linear") {
    spec.kind = ModelSpec::Kind::Linear;
    return spec;
  }
  if (text.rfind("mlp:", 0) == 0) {
    spec.kind = ModelSpec::Kind::Mlp;
    const std::string arg = text.substr(4);
    try {
      const long v = std::stol(arg);
      if (v < 1) throw std::out_of_range(arg);
      spec.hidden = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("model: bad hidden width '" + arg + "'");
    }
    return spec;
  }
  throw std::invalid_argument(
      "model: expected linear or mlp:<hidden>, got '" + text + "'");
}

/// Keep-ratio from a drop-ratio flag. The reported drop ratio is always
/// recomputed as 1 - keep_ratio, which makes keep + drop == 1 exact.
inline double keep_from_drop(double drop_ratio) { return 1.0 - drop_ratio; }

// ---------------------------------------------------------------------------
// Dataset / model construction from specs (seeded sub-streams)

inline std::pair<Dataset, Dataset> build_dataset(const DatasetSpec& spec,
                                                 std::uint64_t seed) {
  Rng data_rng = derive_rng(seed, "data");
  Dataset full;
  switch (spec.kind) {
    case DatasetSpec::Kind::Blobs: {
      if (spec.n_classes == 0)
        throw std::invalid_argument("dataset: blobs needs >= 1 class");
      const std::size_t per_class = spec.n_samples / spec.n_classes;
      if (per_class == 0)
        throw std::invalid_argument("dataset: n_samples smaller than class count");
      full = gen_gaussian_blobs(per_class, spec.n_classes, spec.dim,
                                spec.separation, spec.noise_sigma, data_rng);
      break;
    }
    case DatasetSpec::Kind::Mixture:
      full = gen_hard_mixture(spec.n_samples, data_rng);
      break;
    case DatasetSpec::Kind::Csv:
      full = load_csv(spec.csv_path, spec.label_column, spec.has_header);
      break;
  }
  Rng split_rng = derive_rng(seed, "split");
  return split_dataset(full, spec.validation_fraction, split_rng);
}

inline DenseModel build_model(const ModelSpec& spec, std::size_t input_dim,
                              std::size_t n_classes, std::uint64_t seed) {
  DenseModel m = spec.kind == ModelSpec::Kind::Linear
                     ? make_linear(input_dim, n_classes)
                     : make_mlp(input_dim, spec.hidden, n_classes);
  Rng init_rng = derive_rng(seed, "init");
  init_weights(m, init_rng);
  return m;
}

// ---------------------------------------------------------------------------
// Run records and the paired report

struct EpochRecord {
  std::int64_t epoch = 0;
  std::string phase;  // warmup | sampled | reevaluation | full (baseline)
  std::size_t subset_size = 0;
  bool refresh = false;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  std::uint64_t cum_train_forwards = 0;
  std::uint64_t cum_train_backwards = 0;
  std::uint64_t cum_refresh_forwards = 0;
  std::uint64_t cum_eval_forwards = 0;
  double selected_hard_fraction = -1.0;  // diagnostic; -1 when not applicable
  double wall_ms = 0.0;
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  double final_val_accuracy = 0.0;
  StepLedger ledger;
  std::uint64_t init_param_hash = 0;
  std::uint64_t final_param_hash = 0;
  double wall_ms_total = 0.0;
};

struct TrainingReport {
  int schema_version = kReportSchemaVersion;
  SamplerConfig sampler;
  DatasetSpec dataset;
  ModelSpec model;
  SgdConfig sgd;
  RunRecord baseline;
  RunRecord swiftlearn;
  double predicted_speedup = 1.0;
  double measured_step_speedup = 1.0;  // baseline train fwd / (swift train + refresh fwd)
  double wall_clock_speedup = 1.0;
  double delta_accuracy_pp = 0.0;      // (swiftlearn - baseline) * 100
};

/// Side outputs kept for --emit-importance: the final importance table and
/// every post-warm-up subset.
struct ExperimentArtifacts {
  ImportanceTable final_table;
  std::vector<Subset> subsets;
};

namespace detail {

inline double fraction_hard(const Dataset& data,
                            std::span<const SampleId> ids) {
  if (data.hard_flags.empty() || ids.empty()) return -1.0;
  std::size_t hard = 0;
  for (SampleId id : ids) hard += data.hard_flags[id];
  return static_cast<double>(hard) / static_cast<double>(ids.size());
}

}  // namespace detail

/// One training run over the full epoch schedule. `enable_sampler` false
/// gives the vanilla baseline: every epoch trains on all samples and no
/// logits are recorded (no sampler overhead). Both paths share the same
/// train_epoch code and the same per-epoch shuffle streams keyed on
/// (seed, epoch, id set).
inline RunRecord run_training(const ValidatedConfig& cfg, const Dataset& train,
                              const Dataset& val, DenseModel model,
                              const SgdConfig& sgd, bool enable_sampler,
                              ExperimentArtifacts* artifacts = nullptr) {
  const SamplerConfig& c = cfg.get();
  const std::size_t n = train.n;
  const std::int64_t warmup = static_cast<std::int64_t>(c.warmup_epochs);

  RunRecord rec;
  rec.init_param_hash = param_hash(model);

  LogitStore store(n, model.output_dim());
  ImportanceTable table(n);
  Rng select_rng = derive_rng(c.seed, "select");

  const std::vector<SampleId> full_ids = all_sample_ids(n);
  const std::vector<SampleId> val_ids = all_sample_ids(val.n);

  std::uint64_t planned_train_passes = 0;
  const auto run_start = std::chrono::steady_clock::now();

  for (std::int64_t epoch = 0;
       epoch < static_cast<std::int64_t>(c.total_epochs); ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();

    EpochPlan plan;
    if (enable_sampler) {
      if (is_refresh_epoch(cfg, epoch)) {
        record_snapshot(model, train, full_ids, store, epoch);
        rec.ledger.refresh_forwards += n;
        table = apply_update_policy(cfg, epoch, Subset{}, store, std::move(table));
      }
      plan = plan_epoch(cfg, epoch, table, select_rng);
    } else {
      plan = EpochPlan{Phase{PhaseKind::Warmup, epoch}, full_ids, false};
    }

    std::vector<SampleId> ids = plan.train_ids;
    std::sort(ids.begin(), ids.end());
    Rng shuffle_rng = shuffle_stream(c.seed, epoch, ids);
    const double loss =
        train_epoch(model, train, ids, sgd, shuffle_rng,
                    enable_sampler ? &store : nullptr, rec.ledger, epoch);
    planned_train_passes += ids.size();

    if (enable_sampler) {
      if (epoch == warmup - 1) {
        // Initial table from the last two warm-up snapshots.
        table = refresh_scores(store, std::move(table), full_ids,
                               c.temperature, epoch);
      } else if (epoch >= warmup &&
                 c.update_policy == UpdatePolicy::PartialChosen) {
        table = apply_update_policy(
            cfg, epoch,
            Subset{plan.train_ids, epoch, c.selection_mode}, store,
            std::move(table));
      }
      if (artifacts && plan.phase.kind != PhaseKind::Warmup)
        artifacts->subsets.push_back(
            Subset{plan.train_ids, epoch, c.selection_mode});
    }

    const double val_acc = evaluate(model, val, val_ids);
    rec.ledger.eval_forwards += val.n;
    rec.ledger.close_epoch(epoch);

    EpochRecord er;
    er.epoch = epoch;
    er.phase = enable_sampler ? to_string(plan.phase.kind) : "full";
    er.subset_size = plan.train_ids.size();
    er.refresh = plan.requires_full_forward;
    er.train_loss = loss;
    er.val_accuracy = val_acc;
    er.cum_train_forwards = rec.ledger.train_forwards;
    er.cum_train_backwards = rec.ledger.train_backwards;
    er.cum_refresh_forwards = rec.ledger.refresh_forwards;
    er.cum_eval_forwards = rec.ledger.eval_forwards;
    if (enable_sampler && plan.phase.kind != PhaseKind::Warmup)
      er.selected_hard_fraction = detail::fraction_hard(train, plan.train_ids);
    er.wall_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - epoch_start)
                     .count();
    rec.epochs.push_back(std::move(er));
  }

  if (planned_train_passes != rec.ledger.train_forwards)
    throw std::logic_error(
        "run_training: ledger accounting mismatch (planned " +
        std::to_string(planned_train_passes) + " training forwards, ledger " +
        std::to_string(rec.ledger.train_forwards) + ")");

  rec.final_val_accuracy = rec.epochs.back().val_accuracy;
  rec.final_param_hash = param_hash(model);
  rec.wall_ms_total = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - run_start)
                          .count();
  if (artifacts && enable_sampler) artifacts->final_table = table;
  return rec;
}

/// Paired baseline + swiftlearn experiment under identical data/model seeds.
/// Re-running with the same seeds reproduces everything except wall-clock.
inline TrainingReport run_experiment(const ValidatedConfig& cfg,
                                     const DatasetSpec& dataset_spec,
                                     const ModelSpec& model_spec,
                                     const SgdConfig& sgd,
                                     ExperimentArtifacts* artifacts = nullptr) {
  if (auto err = sgd_config_error(sgd))
    throw std::invalid_argument("sgd: " + *err);
  const SamplerConfig& c = cfg.get();

  auto [train, val] = build_dataset(dataset_spec, c.seed);
  const DenseModel init_model =
      build_model(model_spec, train.dim, train.num_classes, c.seed);

  TrainingReport report;
  report.sampler = c;
  report.dataset = dataset_spec;
  report.model = model_spec;
  report.sgd = sgd;
  report.baseline = run_training(cfg, train, val, init_model, sgd, false);
  report.swiftlearn =
      run_training(cfg, train, val, init_model, sgd, true, artifacts);

  report.predicted_speedup = predicted_speedup(cfg, train.n);
  report.measured_step_speedup =
      static_cast<double>(report.baseline.ledger.train_forwards) /
      static_cast<double>(report.swiftlearn.ledger.train_forwards +
                          report.swiftlearn.ledger.refresh_forwards);
  report.wall_clock_speedup =
      report.baseline.wall_ms_total / report.swiftlearn.wall_ms_total;
  report.delta_accuracy_pp = (report.swiftlearn.final_val_accuracy -
                              report.baseline.final_val_accuracy) *
                             100.0;
  return report;
}

// ---------------------------------------------------------------------------
// JSON report

inline nlohmann::json to_json(const EpochRecord& e) {
  nlohmann::json j{{"epoch", e.epoch},
                   {"phase", e.phase},
                   {"subset_size", e.subset_size},
                   {"refresh", e.refresh},
                   {"train_loss", e.train_loss},
                   {"val_accuracy", e.val_accuracy},
                   {"cum_train_forwards", e.cum_train_forwards},
                   {"cum_train_backwards", e.cum_train_backwards},
                   {"cum_refresh_forwards", e.cum_refresh_forwards},
                   {"cum_eval_forwards", e.cum_eval_forwards},
                   {"wall_ms", e.wall_ms}};
  if (e.selected_hard_fraction >= 0.0)
    j["selected_hard_fraction"] = e.selected_hard_fraction;
  return j;
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochRecord& e : r.epochs) epochs.push_back(to_json(e));
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(r.init_param_hash));
  std::string init_hash = hash_hex;
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(r.final_param_hash));
  return nlohmann::json{{"epochs", std::move(epochs)},
                        {"final_val_accuracy", r.final_val_accuracy},
                        {"train_forwards", r.ledger.train_forwards},
                        {"train_backwards", r.ledger.train_backwards},
                        {"refresh_forwards", r.ledger.refresh_forwards},
                        {"eval_forwards", r.ledger.eval_forwards},
                        {"init_param_hash", init_hash},
                        {"final_param_hash", std::string(hash_hex)},
                        {"wall_ms_total", r.wall_ms_total}};
}

inline nlohmann::json to_json(const TrainingReport& r) {
  nlohmann::json sampler{
      {"keep_ratio", r.sampler.keep_ratio},
      {"drop_ratio", r.sampler.drop_ratio()},
      {"temperature", r.sampler.temperature},
      {"warmup_epochs", r.sampler.warmup_epochs},
      {"update_policy", to_string(r.sampler.update_policy)},
      {"selection_mode", to_string(r.sampler.selection_mode)},
      {"total_epochs", r.sampler.total_epochs},
      {"seed", r.sampler.seed}};
  if (r.sampler.reeval_interval)
    sampler["reeval_interval"] = *r.sampler.reeval_interval;
  else
    sampler["reeval_interval"] = nullptr;

  nlohmann::json dataset{{"spec", r.dataset.describe()},
                         {"n_samples", r.dataset.n_samples},
                         {"validation_fraction", r.dataset.validation_fraction}};
  nlohmann::json sgd{{"learning_rate", r.sgd.learning_rate},
                     {"batch_size", r.sgd.batch_size},
                     {"shuffle", r.sgd.shuffle}};

  return nlohmann::json{{"schema_version", r.schema_version},
                        {"sampler", std::move(sampler)},
                        {"dataset", std::move(dataset)},
                        {"model", r.model.describe()},
                        {"sgd", std::move(sgd)},
                        {"baseline", to_json(r.baseline)},
                        {"swiftlearn", to_json(r.swiftlearn)},
                        {"predicted_speedup", r.predicted_speedup},
                        {"measured_step_speedup", r.measured_step_speedup},
                        {"wall_clock_speedup", r.wall_clock_speedup},
                        {"delta_accuracy_pp", r.delta_accuracy_pp}};
}

/// Strips every wall-clock field (keys starting with "wall_"), in place.
/// Reports are byte-identical across reruns once these are removed.
inline void strip_wall_clock_fields(nlohmann::json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (it.key().rfind("wall_", 0) == 0) {
        it = j.erase(it);
      } else {
        strip_wall_clock_fields(it.value());
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& item : j) strip_wall_clock_fields(item);
  }
}

/// Writes the JSON report. The file appears only after the document is fully
/// serialized, so a failing run leaves no report behind.
inline void write_report(const TrainingReport& report,
                         const std::filesystem::path& path) {
  const std::string body = to_json(report).dump(2) + "\n";
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_report: cannot open '" + path.string() +
                             "' for writing");
  out << body;
  out.flush();
  if (!out)
    throw std::runtime_error("write_report: write failed for '" +
                             path.string() + "'");
}

/// Parses a report file and checks the schema marker.
inline nlohmann::json read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("read_report: cannot open '" + path.string() + "'");
  nlohmann::json j = nlohmann::json::parse(in);
  if (!j.contains("schema_version"))
    throw std::runtime_error("read_report: '" + path.string() +
                             "' has no schema_version field");
  return j;
}

/// Human-readable summary printed alongside the JSON report.
inline void print_report(const TrainingReport& r, std::ostream& out) {
  out << "dataset " << r.dataset.describe() << "  model " << r.model.describe()
      << "  seed " << r.sampler.seed << "\n";
  out << "keep_ratio " << r.sampler.keep_ratio << " (drop "
      << r.sampler.drop_ratio() << ")  temperature " << r.sampler.temperature
      << "  warmup " << r.sampler.warmup_epochs << "  reeval ";
  if (r.sampler.reeval_interval)
    out << *r.sampler.reeval_interval;
  else
    out << "never";
  out << "  policy " << to_string(r.sampler.update_policy) << "  selection "
      << to_string(r.sampler.selection_mode) << "\n\n";

  out << "  epoch  phase          subset    loss      val_acc\n";
  for (const EpochRecord& e : r.swiftlearn.epochs) {
    out << "  " << std::setw(5) << e.epoch << "  " << std::left << std::setw(13)
        << e.phase << std::right << "  " << std::setw(6) << e.subset_size
        << "  " << std::setw(8) << std::fixed << std::setprecision(4)
        << e.train_loss << "  " << std::setw(7) << e.val_accuracy
        << std::defaultfloat << "\n";
  }
  out << "\n";
  out << "final accuracy   baseline " << std::fixed << std::setprecision(4)
      << r.baseline.final_val_accuracy << "   swiftlearn "
      << r.swiftlearn.final_val_accuracy << std::defaultfloat << "\n";
  out << "delta accuracy   " << r.delta_accuracy_pp << " pp\n";
  out << "speedup          predicted " << r.predicted_speedup
      << "x   measured steps " << r.measured_step_speedup << "x   wall-clock "
      << r.wall_clock_speedup << "x\n";
}

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepGrid {
  std::vector<double> keep_ratios;
  std::vector<double> temperatures;
  std::vector<std::optional<std::uint32_t>> reeval_intervals;
  std::vector<UpdatePolicy> policies;

  bool empty() const {
    return keep_ratios.empty() && temperatures.empty() &&
           reeval_intervals.empty() && policies.empty();
  }
};

struct SweepRow {
  double keep_ratio = 1.0;
  double temperature = 1.0;
  std::optional<std::uint32_t> reeval_interval;
  UpdatePolicy policy = UpdatePolicy::Frozen;
  bool ok = false;
  std::string error;
  double final_acc = 0.0;
  double delta_acc = 0.0;
  double step_speedup = 0.0;
  double wall_speedup = 0.0;
};

struct SweepResult {
  std::vector<TrainingReport> reports;  // successful points only
  std::vector<SweepRow> rows;           // every grid point, in grid order
};

/// Cartesian product over the given dimensions; unset dimensions stay at the
/// base config's value. Every point shares the base seed. A failing point is
/// recorded as a failed row and the sweep continues.
inline SweepResult sweep(const SamplerConfig& base,
                         const DatasetSpec& dataset_spec,
                         const ModelSpec& model_spec, const SgdConfig& sgd,
                         const SweepGrid& grid) {
  if (grid.empty())
    throw std::invalid_argument("sweep: empty grid (no swept parameter)");

  const auto ratios =
      grid.keep_ratios.empty() ? std::vector<double>{base.keep_ratio} : grid.keep_ratios;
  const auto temps = grid.temperatures.empty()
                         ? std::vector<double>{base.temperature}
                         : grid.temperatures;
  const auto intervals =
      grid.reeval_intervals.empty()
          ? std::vector<std::optional<std::uint32_t>>{base.reeval_interval}
          : grid.reeval_intervals;
  const auto policies = grid.policies.empty()
                            ? std::vector<UpdatePolicy>{base.update_policy}
                            : grid.policies;

  SweepResult result;
  for (const double r : ratios)
    for (const double sigma : temps)
      for (const auto& interval : intervals)
        for (const UpdatePolicy policy : policies) {
          SweepRow row;
          row.keep_ratio = r;
          row.temperature = sigma;
          row.reeval_interval = interval;
          row.policy = policy;
          try {
            SamplerConfig cfg = base;
            cfg.keep_ratio = r;
            cfg.temperature = sigma;
            cfg.reeval_interval = interval;
            cfg.update_policy = policy;
            TrainingReport report = run_experiment(
                validate_config(cfg), dataset_spec, model_spec, sgd);
            row.ok = true;
            row.final_acc = report.swiftlearn.final_val_accuracy;
            row.delta_acc = report.delta_accuracy_pp;
            row.step_speedup = report.measured_step_speedup;
            row.wall_speedup = report.wall_clock_speedup;
            result.reports.push_back(std::move(report));
          } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
          }
          result.rows.push_back(std::move(row));
        }
  return result;
}

/// Summary CSV, one row per grid point. Failed points keep their parameter
/// cells and leave the metric cells empty.
inline void write_sweep_csv(std::span<const SweepRow> rows,
                            std::ostream& out) {
  out << "r,sigma,K,policy,final_acc,delta_acc,step_speedup,wall_speedup\n";
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const SweepRow& row : rows) {
    out << num(row.keep_ratio) << ',' << num(row.temperature) << ',';
    if (row.reeval_interval)
      out << *row.reeval_interval;
    else
      out << "never";
    out << ',' << to_string(row.policy) << ',';
    if (row.ok) {
      out << num(row.final_acc) << ',' << num(row.delta_acc) << ','
          << num(row.step_speedup) << ',' << num(row.wall_speedup);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

}  // namespace swiftlearn
