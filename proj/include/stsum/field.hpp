#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stsum/error.hpp"

namespace stsum {

/// Grid extents, slowest-varying first: (height, width) for images and
/// (depth, height, width) for volumes. Samples are stored row-major, width
/// fastest.
class Shape {
 public:
  Shape() = default;

  explicit Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    require(!dims_.empty(), ErrorCode::invalid_argument, "shape needs at least one extent");
    for (auto d : dims_) require(d >= 1, ErrorCode::invalid_argument, "shape extents must be >= 1");
  }

  static Shape image(std::size_t width, std::size_t height) { return Shape({height, width}); }
  static Shape volume(std::size_t width, std::size_t height, std::size_t depth) {
    return Shape({depth, height, width});
  }

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }

  std::size_t size() const noexcept {
    if (dims_.empty()) return 0;
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t width() const noexcept { return dims_.empty() ? 0 : dims_.back(); }
  std::size_t height() const noexcept { return dims_.size() < 2 ? 1 : dims_[dims_.size() - 2]; }
  std::size_t depth() const noexcept { return dims_.size() < 3 ? 1 : dims_[dims_.size() - 3]; }

  std::string to_string() const {
    std::string s;
    for (auto it = dims_.rbegin(); it != dims_.rend(); ++it) {
      if (!s.empty()) s += 'x';
      s += std::to_string(*it);
    }
    return s;
  }

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
};

/// Immutable grid of finite real samples.
class Field {
 public:
  Field() = default;

  Field(Shape shape, std::vector<double> samples, std::string channel_tag = {})
      : shape_(std::move(shape)), samples_(std::move(samples)), tag_(std::move(channel_tag)) {
    require(shape_.size() >= 1, ErrorCode::invalid_argument, "field shape is empty");
    require(samples_.size() == shape_.size(), ErrorCode::invalid_argument,
            "field has " + std::to_string(samples_.size()) + " samples, shape " + shape_.to_string() +
                " needs " + std::to_string(shape_.size()));
    for (double s : samples_)
      require(std::isfinite(s), ErrorCode::invalid_argument, "field samples must be finite");
  }

  static Field filled(const Shape& shape, double value, std::string channel_tag = {}) {
    return Field(shape, std::vector<double>(shape.size(), value), std::move(channel_tag));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  const std::string& channel_tag() const noexcept { return tag_; }

  Field with_tag(std::string tag) const { return Field(shape_, samples_, std::move(tag)); }

  friend bool operator==(const Field& a, const Field& b) {
    return a.shape_ == b.shape_ && a.samples_ == b.samples_;
  }

 private:
  Shape shape_;
  std::vector<double> samples_;
  std::string tag_;
};

/// Per-sample timestep labels. 0 is background; k >= 1 is the k-th frame of a run.
class LabelField {
 public:
  LabelField() = default;

  explicit LabelField(const Shape& shape) : shape_(shape), labels_(shape.size(), 0) {}

  LabelField(Shape shape, std::vector<std::uint32_t> labels)
      : shape_(std::move(shape)), labels_(std::move(labels)) {
    require(labels_.size() == shape_.size(), ErrorCode::invalid_argument,
            "label count does not match shape " + shape_.to_string());
  }

  const Shape& shape() const noexcept { return shape_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::span<std::uint32_t> labels() noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::uint32_t operator[](std::size_t i) const { return labels_[i]; }
  std::uint32_t& operator[](std::size_t i) { return labels_[i]; }

  std::uint32_t max_label() const noexcept {
    return labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
  }

  friend bool operator==(const LabelField&, const LabelField&) = default;

 private:
  Shape shape_;
  std::vector<std::uint32_t> labels_;
};

/// One timestep: one or more equally shaped channels keyed by tag.
class TimestepRecord {
 public:
  TimestepRecord() = default;

  TimestepRecord(std::size_t index, std::map<std::string, Field> channels)
      : index_(index), channels_(std::move(channels)) {
    require(!channels_.empty(), ErrorCode::invalid_argument, "timestep record needs a channel");
    const Shape& s = channels_.begin()->second.shape();
    for (const auto& [tag, f] : channels_)
      require(f.shape() == s, ErrorCode::invalid_argument, "channel '" + tag + "' shape differs");
  }

  TimestepRecord(std::size_t index, Field single)
      : TimestepRecord(index, make_single(std::move(single))) {}

  std::size_t index() const noexcept { return index_; }
  const Shape& shape() const { return channels_.begin()->second.shape(); }
  const std::map<std::string, Field>& channels() const noexcept { return channels_; }

  bool has(const std::string& tag) const { return channels_.count(tag) != 0; }

  /// Looks up a channel. An empty tag selects the first channel.
  const Field& channel(const std::string& tag) const {
    if (tag.empty()) return channels_.begin()->second;
    auto it = channels_.find(tag);
    require(it != channels_.end(), ErrorCode::invalid_argument,
            "timestep " + std::to_string(index_) + " has no channel '" + tag + "'");
    return it->second;
  }

 private:
  static std::map<std::string, Field> make_single(Field f) {
    std::string tag = f.channel_tag().empty() ? std::string("value") : f.channel_tag();
    std::map<std::string, Field> m;
    m.emplace(tag, std::move(f));
    return m;
  }

  std::size_t index_ = 0;
  std::map<std::string, Field> channels_;
};

/// Fused outputs of one run of timesteps [run_start, run_end].
struct SummaryBundle {
  Field fused_data;
  Field fused_info;
  LabelField labels;
  std::size_t run_start = 0;
  std::size_t run_end = 0;

  std::size_t run_length() const noexcept { return run_end - run_start + 1; }

  /// Absolute timestep index of a nonzero local label.
  std::size_t absolute_index(std::uint32_t local_label) const { return run_start + local_label - 1; }
};

struct MinMax {
  double min;
  double max;
};

inline MinMax minmax(const Field& field) {
  auto s = field.samples();
  auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return {*lo, *hi};
}

}  // namespace stsum
