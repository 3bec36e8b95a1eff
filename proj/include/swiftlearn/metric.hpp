#pragma once

// Per-sample logit history and the importance metric built from it.
//
// The store keeps the two most recent logit snapshots per sample (constant
// memory in epochs). The change score is the Euclidean norm of the difference
// between those snapshots; a temperature softmax turns the scores into a
// selection probability per sample.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swiftlearn/core.hpp"

namespace swiftlearn {

/// L2 norm of (a - b). Building block of the per-sample change score.
inline double logit_change(std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("logit_change: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Rolling two-snapshot logit history for every sample.
///
/// `current` holds the logits from the most recent epoch in which a sample
/// was evaluated, `previous` those from the evaluation before that. Recording
/// twice in the same epoch overwrites `current` without rotating `previous`.
class LogitStore {
 public:
  LogitStore(std::size_t num_samples, std::size_t num_classes)
      : n_(num_samples),
        c_(num_classes),
        current_(n_ * c_, 0.0),
        previous_(n_ * c_, 0.0),
        has_current_(n_, 0),
        has_previous_(n_, 0),
        last_epoch_(n_, -1) {
    if (n_ == 0) throw std::invalid_argument("LogitStore: num_samples must be >= 1");
    if (c_ == 0) throw std::invalid_argument("LogitStore: num_classes must be >= 1");
  }

  std::size_t num_samples() const { return n_; }
  std::size_t num_classes() const { return c_; }

  void record(SampleId id, std::span<const double> logits, std::int64_t epoch) {
    check_id(id);
    if (logits.size() != c_)
      throw std::invalid_argument(
          "LogitStore::record: logit vector has length " +
          std::to_string(logits.size()) + ", expected " + std::to_string(c_));
    if (has_current_[id] && epoch < last_epoch_[id])
      throw std::invalid_argument(
          "LogitStore::record: epoch " + std::to_string(epoch) +
          " precedes last recorded epoch " + std::to_string(last_epoch_[id]) +
          " for sample " + std::to_string(id));

    double* cur = current_.data() + id * c_;
    if (has_current_[id] && epoch > last_epoch_[id]) {
      std::copy(cur, cur + c_, previous_.data() + id * c_);
      has_previous_[id] = 1;
    }
    std::copy(logits.begin(), logits.end(), cur);
    has_current_[id] = 1;
    last_epoch_[id] = epoch;
  }

  bool has_current(SampleId id) const { check_id(id); return has_current_[id] != 0; }
  bool has_previous(SampleId id) const { check_id(id); return has_previous_[id] != 0; }

  std::span<const double> current(SampleId id) const {
    check_id(id);
    return {current_.data() + id * c_, c_};
  }
  std::span<const double> previous(SampleId id) const {
    check_id(id);
    return {previous_.data() + id * c_, c_};
  }
  std::int64_t last_epoch_seen(SampleId id) const { check_id(id); return last_epoch_[id]; }

  /// Change score for one sample, or nullopt while fewer than two snapshots
  /// exist. Absence is a value, not an error.
  std::optional<double> change_score(SampleId id) const {
    check_id(id);
    if (!has_current_[id] || !has_previous_[id]) return std::nullopt;
    return logit_change(current(id), previous(id));
  }

 private:
  void check_id(SampleId id) const {
    if (id >= n_)
      throw std::out_of_range("LogitStore: sample id " + std::to_string(id) +
                              " out of range [0, " + std::to_string(n_) + ")");
  }

  std::size_t n_, c_;
  std::vector<double> current_, previous_;
  std::vector<std::uint8_t> has_current_, has_previous_;
  std::vector<std::int64_t> last_epoch_;
};

/// Temperature softmax over change scores.
///
/// Computed with max-subtraction so arbitrarily large scores stay finite.
/// Every output is strictly positive (underflowed weights are clamped to the
/// smallest positive double) and the vector sums to 1 within 1e-9.
inline std::vector<double> importance_distribution(
    std::span<const double> scores, double temperature) {
  if (scores.empty())
    throw std::invalid_argument("importance_distribution: empty score set");
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument(
        "importance_distribution: temperature must be finite and >= 0, got " +
        std::to_string(temperature));

  double max_arg = -std::numeric_limits<double>::infinity();
  for (double s : scores) max_arg = std::max(max_arg, temperature * s);

  std::vector<double> probs(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double w = std::max(std::exp(temperature * scores[i] - max_arg),
                              std::numeric_limits<double>::denorm_min());
    probs[i] = w;
    sum += w;
  }
  for (double& p : probs) p /= sum;
  return probs;
}

/// Per-sample change scores and the probability distribution over the
/// samples that have a valid score. `probabilities[i]` is 0 while sample i
/// has no score yet.
struct ImportanceTable {
  std::vector<double> scores;          // meaningful iff valid[i]
  std::vector<std::uint8_t> valid;
  std::vector<double> probabilities;
  std::int64_t computed_at_epoch = -1;

  ImportanceTable() = default;
  explicit ImportanceTable(std::size_t num_samples)
      : scores(num_samples, 0.0),
        valid(num_samples, 0),
        probabilities(num_samples, 0.0) {}

  std::size_t num_samples() const { return scores.size(); }

  std::size_t valid_count() const {
    std::size_t k = 0;
    for (auto v : valid) k += v;
    return k;
  }
};

/// Replaces the scores of `ids` with their current change scores, leaves all
/// other scores untouched, and recomputes the probabilities over every sample
/// with a valid score. Throws if any requested id lacks two snapshots.
inline ImportanceTable refresh_scores(const LogitStore& store,
                                      ImportanceTable table,
                                      std::span<const SampleId> ids,
                                      double temperature, std::int64_t epoch) {
  if (table.num_samples() != store.num_samples())
    throw std::invalid_argument("refresh_scores: table covers " +
                                std::to_string(table.num_samples()) +
                                " samples, store has " +
                                std::to_string(store.num_samples()));
  for (SampleId id : ids) {
    const auto score = store.change_score(id);
    if (!score)
      throw std::invalid_argument("refresh_scores: sample " +
                                  std::to_string(id) +
                                  " has fewer than two logit snapshots");
    table.scores[id] = *score;
    table.valid[id] = 1;
  }

  std::vector<double> live;
  live.reserve(table.num_samples());
  for (std::size_t i = 0; i < table.num_samples(); ++i)
    if (table.valid[i]) live.push_back(table.scores[i]);

  if (!live.empty()) {
    const std::vector<double> probs = importance_distribution(live, temperature);
    std::size_t k = 0;
    for (std::size_t i = 0; i < table.num_samples(); ++i)
      table.probabilities[i] = table.valid[i] ? probs[k++] : 0.0;
  }
  table.computed_at_epoch = epoch;
  return table;
}

/// CSV dump for post-hoc analysis. Samples without a valid score get empty
/// score/probability cells.
inline void write_importance_csv(const ImportanceTable& table,
                                 std::ostream& out) {
  out << "sample_id,score,probability,computed_at_epoch\n";
  char buf[64];
  for (std::size_t i = 0; i < table.num_samples(); ++i) {
    out << i << ',';
    if (table.valid[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", table.scores[i]);
      out << buf << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", table.probabilities[i]);
      out << buf;
    } else {
      out << ',';
    }
    out << ',' << table.computed_at_epoch << '\n';
  }
}

}  // namespace swiftlearn
