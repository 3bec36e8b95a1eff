#pragma once

// Subset selection from the importance distribution: deterministic top-count
// and sequential weighted sampling without replacement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swiftlearn/core.hpp"
#include "swiftlearn/metric.hpp"

namespace swiftlearn {

/// The resolved training subset for one epoch. No duplicates; every id valid.
struct Subset {
  std::vector<SampleId> ids;
  std::int64_t epoch = 0;
  SelectionMode mode = SelectionMode::TopK;

  std::size_t size() const { return ids.size(); }
};

/// Number of samples trained per sampled epoch: ceil(n * keep_ratio), clamped
/// to [0, n]. Ceiling so any positive ratio trains on at least one sample.
/// The 1e-9 nudge keeps products like 100 * 0.3 from picking up a spurious
/// extra sample through floating-point representation error.
inline std::size_t target_count(std::size_t n, double keep_ratio) {
  if (n == 0) return 0;
  const double raw = std::ceil(static_cast<double>(n) * keep_ratio - 1e-9);
  if (raw <= 0.0) return 0;
  if (raw >= static_cast<double>(n)) return n;
  return static_cast<std::size_t>(raw);
}

/// The `count` samples with the largest probability. Ties broken by smaller
/// id; output sorted by id ascending for deterministic iteration. Pure
/// function of (table, count).
inline Subset select_top(const ImportanceTable& table, std::size_t count,
                         std::int64_t epoch = 0) {
  std::vector<SampleId> pool;
  pool.reserve(table.num_samples());
  for (std::size_t i = 0; i < table.num_samples(); ++i)
    if (table.valid[i]) pool.push_back(i);
  if (count > pool.size())
    throw std::invalid_argument(
        "select_top: count " + std::to_string(count) + " exceeds the " +
        std::to_string(pool.size()) + " samples with a valid score");

  const auto mid = pool.begin() + static_cast<std::ptrdiff_t>(count);
  std::partial_sort(pool.begin(), mid, pool.end(),
                    [&](SampleId a, SampleId b) {
                      if (table.probabilities[a] != table.probabilities[b])
                        return table.probabilities[a] > table.probabilities[b];
                      return a < b;
                    });
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return Subset{std::move(pool), epoch, SelectionMode::TopK};
}

/// Draws `count` distinct samples, each draw weighted by the current
/// probabilities, removing the winner and renormalizing before the next
/// draw. Deterministic given the generator state. Output in draw order.
inline Subset select_stochastic(const ImportanceTable& table,
                                std::size_t count, Rng& rng,
                                std::int64_t epoch = 0) {
  std::vector<SampleId> pool;
  std::vector<double> weight;
  pool.reserve(table.num_samples());
  weight.reserve(table.num_samples());
  for (std::size_t i = 0; i < table.num_samples(); ++i) {
    if (table.valid[i]) {
      pool.push_back(i);
      weight.push_back(table.probabilities[i]);
    }
  }
  if (count > pool.size())
    throw std::invalid_argument(
        "select_stochastic: count " + std::to_string(count) + " exceeds the " +
        std::to_string(pool.size()) + " samples with a valid score");

  std::vector<SampleId> chosen;
  chosen.reserve(count);
  std::size_t live = pool.size();
  for (std::size_t draw = 0; draw < count; ++draw) {
    double total = 0.0;
    for (std::size_t i = 0; i < live; ++i) total += weight[i];
    const double u = uniform_unit(rng) * total;

    double cum = 0.0;
    std::size_t winner = live - 1;  // fallback against rounding at the edge
    for (std::size_t i = 0; i < live; ++i) {
      cum += weight[i];
      if (u < cum) {
        winner = i;
        break;
      }
    }
    chosen.push_back(pool[winner]);
    --live;
    pool[winner] = pool[live];
    weight[winner] = weight[live];
  }
  return Subset{std::move(chosen), epoch,
                SelectionMode::StochasticWithoutReplacement};
}

/// Audit dump: one (epoch, sample_id) row per trained sample.
inline void write_subsets_csv(std::span<const Subset> subsets,
                              std::ostream& out) {
  out << "epoch,sample_id\n";
  for (const Subset& s : subsets)
    for (SampleId id : s.ids) out << s.epoch << ',' << id << '\n';
}

}  // namespace swiftlearn
