#pragma once

// Epoch lifecycle: warm-up over the full dataset, subset selection from the
// importance table, periodic full-dataset metric refreshes, and the policy
// controlling how scores evolve after warm-up.
//
// Per-epoch driver contract (see harness.hpp for the reference loop):
//   1. if is_refresh_epoch(cfg, epoch): run a forward-only pass over all N
//      samples to re-record logits, then apply_update_policy to rebuild the
//      table, charging the pass to StepLedger::refresh_forwards;
//   2. plan_epoch selects the training ids from the (possibly refreshed)
//      table;
//   3. train on plan.train_ids;
//   4. under PartialChosen, apply_update_policy with the trained subset.
// The table itself is first built from the last two warm-up snapshots at the
// end of epoch warmup_epochs - 1.

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swiftlearn/core.hpp"
#include "swiftlearn/metric.hpp"
#include "swiftlearn/selector.hpp"

namespace swiftlearn {

/// What one epoch will do: its phase, the ids to train on, and whether a
/// metric re-evaluation pass over all N samples runs this epoch in addition
/// to training.
struct EpochPlan {
  Phase phase;
  std::vector<SampleId> train_ids;
  bool requires_full_forward = false;
};

/// Integer accounting of forward/backward passes. Training, refresh, and
/// evaluation passes are charged to separate counters; speedup figures use
/// training + refresh and exclude evaluation.
struct StepLedger {
  std::uint64_t train_forwards = 0;
  std::uint64_t train_backwards = 0;
  std::uint64_t refresh_forwards = 0;
  std::uint64_t eval_forwards = 0;

  struct EpochCounts {
    std::int64_t epoch = 0;
    std::uint64_t train_forwards = 0;   // cumulative
    std::uint64_t train_backwards = 0;  // cumulative
    std::uint64_t refresh_forwards = 0; // cumulative
    std::uint64_t eval_forwards = 0;    // cumulative
  };
  std::vector<EpochCounts> per_epoch;

  /// Snapshot the cumulative counters at the end of an epoch.
  void close_epoch(std::int64_t epoch) {
    per_epoch.push_back(
        {epoch, train_forwards, train_backwards, refresh_forwards, eval_forwards});
  }
};

/// True when this epoch performs a full-dataset metric refresh: only under
/// FullEveryK, anchored at the first sampled epoch ((epoch - W) mod K == 0).
inline bool is_refresh_epoch(const ValidatedConfig& cfg, std::int64_t epoch) {
  const SamplerConfig& c = cfg.get();
  if (c.update_policy != UpdatePolicy::FullEveryK || !c.reeval_interval)
    return false;
  if (epoch < static_cast<std::int64_t>(c.warmup_epochs)) return false;
  return (epoch - c.warmup_epochs) % *c.reeval_interval == 0;
}

/// Number of refresh epochs the policy implies over the whole run.
inline std::uint64_t count_refresh_epochs(const ValidatedConfig& cfg) {
  const SamplerConfig& c = cfg.get();
  if (c.update_policy != UpdatePolicy::FullEveryK || !c.reeval_interval)
    return 0;
  if (c.total_epochs <= c.warmup_epochs) return 0;
  const std::uint64_t sampled = c.total_epochs - c.warmup_epochs;
  return (sampled + *c.reeval_interval - 1) / *c.reeval_interval;
}

inline std::vector<SampleId> all_sample_ids(std::size_t n) {
  std::vector<SampleId> ids(n);
  std::iota(ids.begin(), ids.end(), SampleId{0});
  return ids;
}

/// Resolve what to train on this epoch.
///
/// Warm-up epochs cover the full dataset. Sampled epochs select
/// target_count(N, keep_ratio) ids from the table via the configured
/// selection mode; on refresh epochs the caller must pass the already
/// refreshed table (requires_full_forward reports the extra full pass this
/// epoch carries). The rng is consumed only by stochastic selection.
inline EpochPlan plan_epoch(const ValidatedConfig& cfg, std::int64_t epoch,
                            const ImportanceTable& table, Rng& rng) {
  const SamplerConfig& c = cfg.get();
  if (epoch < 0 || epoch >= static_cast<std::int64_t>(c.total_epochs))
    throw std::invalid_argument("plan_epoch: epoch " + std::to_string(epoch) +
                                " outside [0, " +
                                std::to_string(c.total_epochs) + ")");
  const std::size_t n = table.num_samples();

  if (epoch < static_cast<std::int64_t>(c.warmup_epochs)) {
    return EpochPlan{Phase{PhaseKind::Warmup, epoch}, all_sample_ids(n), false};
  }

  const std::size_t count = target_count(n, c.keep_ratio);
  if (table.valid_count() < count)
    throw std::invalid_argument(
        "plan_epoch: sampled epoch " + std::to_string(epoch) + " needs " +
        std::to_string(count) + " scored samples but the table has " +
        std::to_string(table.valid_count()));

  const bool refresh = is_refresh_epoch(cfg, epoch);
  Subset subset = c.selection_mode == SelectionMode::TopK
                      ? select_top(table, count, epoch)
                      : select_stochastic(table, count, rng, epoch);
  return EpochPlan{
      Phase{refresh ? PhaseKind::Reevaluation : PhaseKind::Sampled, epoch},
      std::move(subset.ids), refresh};
}

/// Post-warm-up evolution of the importance table.
///   Frozen        -> unchanged.
///   PartialChosen -> scores refreshed for the just-trained ids only.
///   FullEveryK    -> all scores refreshed on refresh epochs, unchanged
///                    otherwise.
inline ImportanceTable apply_update_policy(const ValidatedConfig& cfg,
                                           std::int64_t epoch,
                                           const Subset& trained_ids,
                                           const LogitStore& store,
                                           ImportanceTable table) {
  const SamplerConfig& c = cfg.get();
  if (epoch < static_cast<std::int64_t>(c.warmup_epochs))
    throw std::invalid_argument(
        "apply_update_policy: epoch " + std::to_string(epoch) +
        " is still in warm-up (W = " + std::to_string(c.warmup_epochs) + ")");
  switch (c.update_policy) {
    case UpdatePolicy::Frozen:
      return table;
    case UpdatePolicy::PartialChosen:
      return refresh_scores(store, std::move(table), trained_ids.ids,
                            c.temperature, epoch);
    case UpdatePolicy::FullEveryK: {
      if (!is_refresh_epoch(cfg, epoch)) return table;
      const auto ids = all_sample_ids(store.num_samples());
      return refresh_scores(store, std::move(table), ids, c.temperature, epoch);
    }
  }
  return table;
}

/// Step-count speedup implied by the config: the baseline-to-swiftlearn
/// ratio of total forward passes,
///
///   E*N / (W*N + (E-W)*ceil(r*N) + F*N)
///
/// with F the number of full-forward refresh epochs. Refresh passes are
/// charged at equal weight; backward passes mirror forwards on both sides.
/// This is a step-count figure, distinct from wall-clock.
inline double predicted_speedup(const ValidatedConfig& cfg,
                                std::size_t num_samples) {
  const SamplerConfig& c = cfg.get();
  const double n = static_cast<double>(num_samples);
  const double warm = static_cast<double>(c.warmup_epochs) * n;
  const double sampled =
      static_cast<double>(c.total_epochs - c.warmup_epochs) *
      static_cast<double>(target_count(num_samples, c.keep_ratio));
  const double refresh = static_cast<double>(count_refresh_epochs(cfg)) * n;
  return static_cast<double>(c.total_epochs) * n / (warm + sampled + refresh);
}

}  // namespace swiftlearn
