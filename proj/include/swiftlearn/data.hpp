#pragma once

// Deterministic synthetic dataset generators and CSV ingestion. Every
// generator is a pure function of its parameters and the generator state, so
// experiments are reproducible and portable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swiftlearn/core.hpp"

namespace swiftlearn {

enum class Split { Train, Validation };

struct Dataset {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // n x dim, row-major
  std::vector<int> labels;       // in [0, num_classes)
  Split split = Split::Train;
  std::string provenance;

  /// Mapping back to pre-split row indices; empty means identity.
  std::vector<std::size_t> original_index;
  /// Per-sample difficulty tag from gen_hard_mixture (1 = near-boundary);
  /// empty for other sources. Diagnostic only.
  std::vector<std::uint8_t> hard_flags;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
};

namespace detail {

inline void check_finite(const Dataset& d) {
  for (double v : d.features)
    if (!std::isfinite(v))
      throw std::runtime_error("dataset contains a non-finite feature value");
}

// Deterministic class centers: class 0 at the origin, class c >= 1 on
// coordinate axis (c-1) % dim at growing magnitude, alternating sign per
// ring. Adjacent centers are at least `separation` apart.
inline std::vector<double> class_center(std::size_t cls, std::size_t dim,
                                        double separation) {
  std::vector<double> center(dim, 0.0);
  if (cls == 0) return center;
  const std::size_t axis = (cls - 1) % dim;
  const std::size_t ring = (cls - 1) / dim + 1;
  const double sign = (ring % 2 == 1) ? 1.0 : -1.0;
  center[axis] = sign * separation * static_cast<double>(ring);
  return center;
}

}  // namespace detail

/// Isotropic Gaussian blobs, one per class, centered `class_separation`
/// apart. With noise_sigma = 0 every sample sits exactly on its center.
inline Dataset gen_gaussian_blobs(std::size_t n_per_class,
                                  std::size_t n_classes, std::size_t dim,
                                  double class_separation, double noise_sigma,
                                  Rng& rng) {
  if (n_per_class == 0 || n_classes == 0 || dim == 0)
    throw std::invalid_argument("gen_gaussian_blobs: all counts must be >= 1");
  if (!(noise_sigma >= 0.0))
    throw std::invalid_argument("gen_gaussian_blobs: noise_sigma must be >= 0");

  Dataset d;
  d.n = n_per_class * n_classes;
  d.dim = dim;
  d.num_classes = n_classes;
  d.features.reserve(d.n * dim);
  d.labels.reserve(d.n);
  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    const auto center = detail::class_center(cls, dim, class_separation);
    for (std::size_t i = 0; i < n_per_class; ++i) {
      for (std::size_t j = 0; j < dim; ++j)
        d.features.push_back(center[j] + noise_sigma * gaussian(rng));
      d.labels.push_back(static_cast<int>(cls));
    }
  }
  std::ostringstream prov;
  prov << "blobs(n_per_class=" << n_per_class << ",classes=" << n_classes
       << ",dim=" << dim << ",sep=" << class_separation
       << ",sigma=" << noise_sigma << ")";
  d.provenance = prov.str();
  return d;
}

/// Binary 2-D task with heterogeneous difficulty: 70% easy samples in two
/// wide-margin blobs around x0 = -4 / +4, 30% hard samples hugging the
/// x0 = 0 boundary with margin in [0.1, 0.8]. Labels follow sign(x0)
/// throughout, so the easy-only subset (and the whole set) stays linearly
/// separable while the hard samples keep the change metric non-trivial.
inline Dataset gen_hard_mixture(std::size_t n, Rng& rng) {
  if (n < 10) throw std::invalid_argument("gen_hard_mixture: n must be >= 10");
  const std::size_t n_easy = n * 7 / 10;
  const std::size_t n_hard = n - n_easy;

  Dataset d;
  d.n = n;
  d.dim = 2;
  d.num_classes = 2;
  d.features.reserve(n * 2);
  d.labels.reserve(n);
  d.hard_flags.reserve(n);

  for (std::size_t i = 0; i < n_easy; ++i) {
    const int label = static_cast<int>(i % 2);
    const double center = label == 0 ? -4.0 : 4.0;
    // Redraw until the sample keeps at least margin 1 from the boundary.
    double x0 = center + gaussian(rng);
    while (std::abs(x0) < 1.0 || (x0 < 0.0) != (label == 0))
      x0 = center + gaussian(rng);
    d.features.push_back(x0);
    d.features.push_back(gaussian(rng));
    d.labels.push_back(label);
    d.hard_flags.push_back(0);
  }
  for (std::size_t i = 0; i < n_hard; ++i) {
    const int label = static_cast<int>(i % 2);
    const double sign = label == 0 ? -1.0 : 1.0;
    const double x0 = sign * (0.1 + 0.7 * uniform_unit(rng));
    d.features.push_back(x0);
    d.features.push_back(gaussian(rng));
    d.labels.push_back(label);
    d.hard_flags.push_back(1);
  }
  d.provenance = "mixture(n=" + std::to_string(n) + ")";
  return d;
}

/// Rectangular numeric CSV with one integer label column. Distinct label
/// values are remapped to the dense range [0, C) in sorted order; row order
/// is preserved, so sample i is file row i.
/// label_column == npos selects the last column.
inline Dataset load_csv(const std::string& path, std::size_t label_column,
                        bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

  Dataset d;
  std::vector<double> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (line.empty()) continue;

    std::vector<double> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        cells.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: non-numeric cell '" + cell +
                                 "' at " + path + ":" + std::to_string(line_no));
      }
    }
    if (width == 0) {
      width = cells.size();
      if (width < 2)
        throw std::runtime_error("load_csv: need at least one feature column "
                                 "plus the label column at " + path + ":" +
                                 std::to_string(line_no));
    } else if (cells.size() != width) {
      throw std::runtime_error(
          "load_csv: ragged row at " + path + ":" + std::to_string(line_no) +
          " (got " + std::to_string(cells.size()) + " columns, expected " +
          std::to_string(width) + ")");
    }

    const std::size_t label_idx =
        label_column == std::string::npos ? width - 1 : label_column;
    if (label_idx >= width)
      throw std::runtime_error("load_csv: label column " +
                               std::to_string(label_idx) +
                               " out of range for " + std::to_string(width) +
                               "-column file " + path);
    raw_labels.push_back(cells[label_idx]);
    for (std::size_t j = 0; j < width; ++j)
      if (j != label_idx) d.features.push_back(cells[j]);
  }
  if (raw_labels.empty())
    throw std::runtime_error("load_csv: no data rows in '" + path + "'");

  d.n = raw_labels.size();
  d.dim = width - 1;

  // Remap distinct label values onto [0, C).
  std::map<long long, int> remap;
  for (double v : raw_labels) {
    const double rounded = std::nearbyint(v);
    if (!std::isfinite(v) || rounded != v)
      throw std::runtime_error("load_csv: label value " + std::to_string(v) +
                               " in '" + path + "' is not an integer");
    remap.emplace(static_cast<long long>(rounded), 0);
  }
  int next = 0;
  for (auto& [value, id] : remap) id = next++;
  d.num_classes = remap.size();
  d.labels.reserve(d.n);
  for (double v : raw_labels)
    d.labels.push_back(remap.at(static_cast<long long>(std::nearbyint(v))));

  d.provenance = "csv:" + path;
  detail::check_finite(d);
  return d;
}

/// Export in the same shape load_csv reads: features then the label column.
inline void write_csv(const Dataset& d, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < d.n; ++i) {
    for (std::size_t j = 0; j < d.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.features[i * d.dim + j]);
      out << buf << ',';
    }
    out << d.labels[i] << '\n';
  }
}

/// Seeded shuffle then partition. Sample ids are re-densified within each
/// split; original_index records the mapping back to the parent dataset.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& d,
                                                 double validation_fraction,
                                                 Rng& rng) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("split_dataset: validation_fraction must be in (0, 1)");
  const std::size_t n_val = static_cast<std::size_t>(
      std::llround(static_cast<double>(d.n) * validation_fraction));
  if (n_val == 0 || n_val >= d.n)
    throw std::invalid_argument(
        "split_dataset: fraction " + std::to_string(validation_fraction) +
        " yields an empty split for n = " + std::to_string(d.n));

  std::vector<std::size_t> perm(d.n);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle_in_place(perm, rng);

  auto take = [&](std::size_t begin, std::size_t end, Split which) {
    std::vector<std::size_t> rows(perm.begin() + begin, perm.begin() + end);
    std::sort(rows.begin(), rows.end());
    Dataset out;
    out.n = rows.size();
    out.dim = d.dim;
    out.num_classes = d.num_classes;
    out.split = which;
    out.provenance = d.provenance + (which == Split::Train ? "/train" : "/validation");
    out.features.reserve(out.n * d.dim);
    out.labels.reserve(out.n);
    out.original_index = rows;
    if (!d.hard_flags.empty()) out.hard_flags.reserve(out.n);
    for (std::size_t r : rows) {
      const auto row = d.row(r);
      out.features.insert(out.features.end(), row.begin(), row.end());
      out.labels.push_back(d.labels[r]);
      if (!d.hard_flags.empty()) out.hard_flags.push_back(d.hard_flags[r]);
    }
    return out;
  };

  Dataset train = take(n_val, d.n, Split::Train);
  Dataset val = take(0, n_val, Split::Validation);
  return {std::move(train), std::move(val)};
}

}  // namespace swiftlearn
