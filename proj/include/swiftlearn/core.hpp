#pragma once

// Shared domain types, configuration validation, and deterministic
// randomness for the swiftlearn library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swiftlearn {

/// Stable identifier of a sample within a dataset: dense range [0, N).
using SampleId = std::size_t;

enum class UpdatePolicy { Frozen, PartialChosen, FullEveryK };
enum class SelectionMode { TopK, StochasticWithoutReplacement };

inline const char* to_string(UpdatePolicy p) {
  switch (p) {
    case UpdatePolicy::Frozen: return "frozen";
    case UpdatePolicy::PartialChosen: return "partial";
    case UpdatePolicy::FullEveryK: return "full";
  }
  return "?";
}

inline const char* to_string(SelectionMode m) {
  return m == SelectionMode::TopK ? "topk" : "stochastic";
}

/// All algorithm knobs. `reeval_interval == nullopt` means "never":
/// the importance metric is computed once after warm-up and kept.
struct SamplerConfig {
  double keep_ratio = 1.0;     // fraction of samples trained per sampled epoch
  double temperature = 1.0;    // softmax temperature for the importance scores
  std::uint32_t warmup_epochs = 2;
  std::optional<std::uint32_t> reeval_interval;  // epochs between full refreshes
  UpdatePolicy update_policy = UpdatePolicy::Frozen;
  SelectionMode selection_mode = SelectionMode::TopK;
  std::uint32_t total_epochs = 10;
  std::uint64_t seed = 42;

  double drop_ratio() const { return 1.0 - keep_ratio; }
};

/// Returns the first violated invariant as "field: detail", or nullopt when
/// the config is valid. Total: never throws, never aborts.
inline std::optional<std::string> config_error(const SamplerConfig& cfg) {
  std::ostringstream msg;
  if (!(cfg.keep_ratio >= 0.0 && cfg.keep_ratio <= 1.0)) {
    msg << "keep_ratio must be in [0, 1], got " << cfg.keep_ratio;
    return msg.str();
  }
  if (!(cfg.temperature >= 0.0) || !std::isfinite(cfg.temperature)) {
    msg << "temperature must be finite and >= 0, got " << cfg.temperature;
    return msg.str();
  }
  if (cfg.warmup_epochs < 2) {
    msg << "warmup_epochs must be >= 2 (the change metric compares two "
           "consecutive epochs), got " << cfg.warmup_epochs;
    return msg.str();
  }
  if (cfg.total_epochs == 0) {
    msg << "total_epochs must be >= 1, got " << cfg.total_epochs;
    return msg.str();
  }
  if (cfg.warmup_epochs > cfg.total_epochs) {
    msg << "warmup_epochs (" << cfg.warmup_epochs
        << ") must not exceed total_epochs (" << cfg.total_epochs << ")";
    return msg.str();
  }
  if (cfg.reeval_interval && *cfg.reeval_interval == 0) {
    msg << "reeval_interval must be >= 1 or unset (never), got 0";
    return msg.str();
  }
  if (cfg.update_policy == UpdatePolicy::FullEveryK && !cfg.reeval_interval) {
    msg << "reeval_interval: update_policy 'full' requires a finite "
           "re-evaluation interval, got never";
    return msg.str();
  }
  return std::nullopt;
}

/// A SamplerConfig whose invariants have been checked. Immutable; safe to
/// share read-only across threads.
class ValidatedConfig {
 public:
  const SamplerConfig& get() const { return cfg_; }
  const SamplerConfig* operator->() const { return &cfg_; }

  friend ValidatedConfig validate_config(const SamplerConfig& cfg);

 private:
  explicit ValidatedConfig(SamplerConfig cfg) : cfg_(cfg) {}
  SamplerConfig cfg_;
};

/// Throws std::invalid_argument naming the first offending field.
inline ValidatedConfig validate_config(const SamplerConfig& cfg) {
  if (auto err = config_error(cfg)) throw std::invalid_argument(*err);
  return ValidatedConfig(cfg);
}

enum class PhaseKind { Warmup, Sampled, Reevaluation };

inline const char* to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::Warmup: return "warmup";
    case PhaseKind::Sampled: return "sampled";
    case PhaseKind::Reevaluation: return "reevaluation";
  }
  return "?";
}

struct Phase {
  PhaseKind kind = PhaseKind::Warmup;
  std::int64_t epoch = 0;
};

// ---------------------------------------------------------------------------
// Deterministic randomness. All randomness flows from one master seed through
// labeled sub-streams so identical runs are bit-reproducible.

using Rng = std::mt19937_64;

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::span<const SampleId> ids,
                             std::uint64_t h = 1469598103934665603ull) {
  for (SampleId id : ids) {
    auto v = static_cast<std::uint64_t>(id);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= static_cast<unsigned char>(v >> (8 * byte));
      h *= 1099511628211ull;
    }
  }
  return h;
}

/// Pseudorandom stream derived from (seed, label). Identical pairs yield
/// identical streams; distinct labels or seeds yield independent streams.
inline Rng derive_rng(std::uint64_t seed, std::string_view stream_label) {
  const std::uint64_t lh = fnv1a64(stream_label);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(lh),
                    static_cast<std::uint32_t>(lh >> 32)};
  return Rng(seq);
}

// Portable draw helpers. std::shuffle and the std distributions are
// implementation-defined, so anything feeding the reproducibility contract
// goes through these instead.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_index(Rng& g, std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = g();
  while (v >= limit) v = g();
  return v % n;
}

/// Standard normal draw via Box-Muller (portable, unlike
/// std::normal_distribution).
inline double gaussian(Rng& g) {
  double u1 = uniform_unit(g);
  while (u1 <= 0.0) u1 = uniform_unit(g);
  const double u2 = uniform_unit(g);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// In-place Fisher-Yates shuffle driven by uniform_index.
template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& g) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_index(g, i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Per-epoch shuffle stream keyed on (seed, epoch, sorted id set). Runs that
/// train on the same id set in the same epoch shuffle identically, so a
/// keep-everything run reproduces the vanilla baseline bit for bit.
inline Rng shuffle_stream(std::uint64_t seed, std::int64_t epoch,
                          std::span<const SampleId> sorted_ids) {
  std::string label = "shuffle/" + std::to_string(epoch) + "/";
  const std::uint64_t ids_hash = fnv1a64(sorted_ids);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(ids_hash));
  label += hex;
  return derive_rng(seed, label);
}

}  // namespace swiftlearn
