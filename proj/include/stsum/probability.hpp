#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stsum/binning.hpp"
#include "stsum/error.hpp"
#include "stsum/field.hpp"

namespace stsum {

/// Binned joint probability table p(x, y) for a field pair, with marginals.
/// Row index is the x bin, column index the y bin.
class JointDistribution {
 public:
  JointDistribution() = default;

  /// Normalizes a bins_x * bins_y table of co-occurrence counts (row-major).
  static JointDistribution from_counts(std::size_t bins_x, std::size_t bins_y,
                                       std::span<const std::uint64_t> counts, BinningSpec binning_x,
                                       BinningSpec binning_y) {
    require(bins_x >= 1 && bins_y >= 1, ErrorCode::invalid_argument, "joint needs >= 1 bin per axis");
    require(counts.size() == bins_x * bins_y, ErrorCode::invalid_argument, "count table size mismatch");
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    require(total > 0, ErrorCode::invalid_argument, "joint count table is empty");

    JointDistribution j;
    j.bins_x_ = bins_x;
    j.bins_y_ = bins_y;
    j.binning_x_ = binning_x;
    j.binning_y_ = binning_y;
    j.p_.resize(counts.size());
    const double n = static_cast<double>(total);
    for (std::size_t k = 0; k < counts.size(); ++k) j.p_[k] = static_cast<double>(counts[k]) / n;
    j.compute_marginals();
    return j;
  }

  static JointDistribution from_counts(std::size_t bins_x, std::size_t bins_y,
                                       std::span<const std::uint64_t> counts) {
    return from_counts(bins_x, bins_y, counts, unit_binning(bins_x), unit_binning(bins_y));
  }

  std::size_t bins_x() const noexcept { return bins_x_; }
  std::size_t bins_y() const noexcept { return bins_y_; }
  const BinningSpec& binning_x() const noexcept { return binning_x_; }
  const BinningSpec& binning_y() const noexcept { return binning_y_; }

  double p(std::size_t x, std::size_t y) const { return p_[x * bins_y_ + y]; }
  double px(std::size_t x) const { return px_[x]; }
  double py(std::size_t y) const { return py_[y]; }
  std::span<const double> table() const noexcept { return p_; }
  std::span<const double> px() const noexcept { return px_; }
  std::span<const double> py() const noexcept { return py_; }

  /// The same distribution with the roles of X and Y swapped.
  JointDistribution transposed() const {
    JointDistribution t;
    t.bins_x_ = bins_y_;
    t.bins_y_ = bins_x_;
    t.binning_x_ = binning_y_;
    t.binning_y_ = binning_x_;
    t.p_.resize(p_.size());
    for (std::size_t x = 0; x < bins_x_; ++x)
      for (std::size_t y = 0; y < bins_y_; ++y) t.p_[y * bins_x_ + x] = p_[x * bins_y_ + y];
    t.compute_marginals();
    return t;
  }

 private:
  static BinningSpec unit_binning(std::size_t bins) {
    return BinningSpec{bins, 0.0, static_cast<double>(bins)};
  }

  // Marginals are plain row/column sums in index order.
  void compute_marginals() {
    px_.assign(bins_x_, 0.0);
    py_.assign(bins_y_, 0.0);
    for (std::size_t x = 0; x < bins_x_; ++x)
      for (std::size_t y = 0; y < bins_y_; ++y) px_[x] += p_[x * bins_y_ + y];
    for (std::size_t y = 0; y < bins_y_; ++y)
      for (std::size_t x = 0; x < bins_x_; ++x) py_[y] += p_[x * bins_y_ + y];
  }

  std::size_t bins_x_ = 0;
  std::size_t bins_y_ = 0;
  BinningSpec binning_x_;
  BinningSpec binning_y_;
  std::vector<double> p_;
  std::vector<double> px_;
  std::vector<double> py_;
};

/// Histogram estimate of p(x, y); each field is binned over its own range.
inline JointDistribution build_joint(const Field& field_x, const Field& field_y, std::size_t bin_count) {
  require(field_x.shape() == field_y.shape(), ErrorCode::invalid_argument,
          "joint needs equal shapes, got " + field_x.shape().to_string() + " and " +
              field_y.shape().to_string());
  const BinningSpec bx = build_binning(field_x, bin_count);
  const BinningSpec by = build_binning(field_y, bin_count);

  std::vector<std::uint64_t> counts(bx.bin_count * by.bin_count, 0);
  auto xs = field_x.samples();
  auto ys = field_y.samples();
  for (std::size_t i = 0; i < xs.size(); ++i) ++counts[bx.bin_of(xs[i]) * by.bin_count + by.bin_of(ys[i])];
  return JointDistribution::from_counts(bx.bin_count, by.bin_count, counts, bx, by);
}

/// p(x | y) over all x bins.
inline std::vector<double> conditional(const JointDistribution& joint, std::size_t y_bin) {
  require(y_bin < joint.bins_y(), ErrorCode::invalid_argument, "y bin out of range");
  const double py = joint.py(y_bin);
  require(py > 0.0, ErrorCode::undefined_conditional,
          "p(y) is zero for bin " + std::to_string(y_bin));
  std::vector<double> out(joint.bins_x());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = joint.p(x, y_bin) / py;
  return out;
}

}  // namespace stsum
