#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stsum/error.hpp"
#include "stsum/field.hpp"

namespace stsum {

/// Equal-width bins over [lo, hi]. When lo == hi every sample lands in bin 0.
struct BinningSpec {
  std::size_t bin_count = 1;
  double lo = 0.0;
  double hi = 0.0;

  std::size_t bin_of(double s) const noexcept {
    if (!(hi > lo)) return 0;
    const double t = std::floor((s - lo) / (hi - lo) * static_cast<double>(bin_count));
    if (t <= 0.0) return 0;
    const auto b = static_cast<std::size_t>(t);
    return b >= bin_count ? bin_count - 1 : b;
  }

  double bin_center(std::size_t b) const noexcept {
    if (!(hi > lo)) return lo;
    return lo + (static_cast<double>(b) + 0.5) * (hi - lo) / static_cast<double>(bin_count);
  }

  friend bool operator==(const BinningSpec&, const BinningSpec&) = default;
};

/// Bins a field over its own observed range. A constant field collapses to
/// a single bin.
inline BinningSpec build_binning(const Field& field, std::size_t bin_count) {
  require(bin_count >= 1, ErrorCode::invalid_argument, "bin_count must be >= 1");
  const auto [lo, hi] = minmax(field);
  return BinningSpec{lo == hi ? std::size_t{1} : bin_count, lo, hi};
}

inline std::vector<std::size_t> bin_indices(const Field& field, const BinningSpec& binning) {
  std::vector<std::size_t> out(field.size());
  auto s = field.samples();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = binning.bin_of(s[i]);
  return out;
}

/// Expands a per-bin table into a field: out[i] = table[bin_of(field[i])].
inline Field map_samples(const Field& field, std::span<const double> table, const BinningSpec& binning) {
  require(table.size() == binning.bin_count, ErrorCode::invalid_argument,
          "lookup table has " + std::to_string(table.size()) + " entries for " +
              std::to_string(binning.bin_count) + " bins");
  std::vector<double> out(field.size());
  auto s = field.samples();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t b = binning.bin_of(s[i]);
    require(b < table.size(), ErrorCode::internal_error, "bin index out of range");
    out[i] = table[b];
  }
  return Field(field.shape(), std::move(out), field.channel_tag());
}

}  // namespace stsum
