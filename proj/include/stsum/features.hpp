#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stsum/error.hpp"
#include "stsum/field.hpp"
#include "stsum/infotheory.hpp"
#include "stsum/probability.hpp"

namespace stsum {

class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(const Shape& shape) : shape_(shape), bits_(shape.size(), 0) {}
  BinaryMask(Shape shape, std::vector<std::uint8_t> bits) : shape_(std::move(shape)), bits_(std::move(bits)) {
    require(bits_.size() == shape_.size(), ErrorCode::invalid_argument, "mask length does not match shape");
    for (auto b : bits_) require(b <= 1, ErrorCode::invalid_argument, "mask values must be 0 or 1");
  }

  const Shape& shape() const noexcept { return shape_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

 private:
  Shape shape_;
  std::vector<std::uint8_t> bits_;
};

enum class Polarity { above, below };

/// Foreground where the sample is strictly above (or below) the threshold.
inline BinaryMask segment_threshold(const Field& field, double threshold, Polarity polarity) {
  BinaryMask mask(field.shape());
  auto s = field.samples();
  for (std::size_t i = 0; i < s.size(); ++i)
    mask.set(i, polarity == Polarity::above ? s[i] > threshold : s[i] < threshold);
  return mask;
}

/// Static background estimated as the per-position median of a few frames.
/// Stands in for a learned background model.
class StaticBackground {
 public:
  static StaticBackground from_frames(std::span<const Field> frames) {
    require(!frames.empty(), ErrorCode::empty_input, "static background needs at least one frame");
    const Shape& shape = frames.front().shape();
    for (const auto& f : frames)
      require(f.shape() == shape, ErrorCode::invalid_sequence, "background frames differ in shape");
    std::vector<double> median(shape.size());
    std::vector<double> column(frames.size());
    for (std::size_t i = 0; i < median.size(); ++i) {
      for (std::size_t k = 0; k < frames.size(); ++k) column[k] = frames[k][i];
      std::sort(column.begin(), column.end());
      const std::size_t n = column.size();
      median[i] = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
    return StaticBackground(Field(shape, std::move(median), "background"));
  }

  explicit StaticBackground(Field background) : background_(std::move(background)) {}

  const Field& field() const noexcept { return background_; }

  /// Foreground where |sample - background| > threshold.
  BinaryMask segment(const Field& frame, double threshold) const {
    require(frame.shape() == background_.shape(), ErrorCode::invalid_sequence,
            "frame shape differs from background model");
    BinaryMask mask(frame.shape());
    for (std::size_t i = 0; i < frame.size(); ++i) mask.set(i, std::abs(frame[i] - background_[i]) > threshold);
    return mask;
  }

 private:
  Field background_;
};

enum class Connectivity { four = 4, eight = 8 };

struct BoundingBox {
  std::size_t min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

struct Component {
  std::size_t size = 0;
  BoundingBox bbox;
  std::uint32_t label = 0;
};

struct ComponentSet {
  std::size_t count = 0;
  std::vector<Component> components;
  LabelField labeled;
};

namespace detail {

class UnionFind {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }
  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace detail

/// Two-pass connected-component labeling of a 2D mask. Components smaller
/// than `min_size` are dropped (labeled 0 and not counted). Surviving
/// components are numbered 1..count in raster order of their first pixel.
inline ComponentSet connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::eight,
                                         std::size_t min_size = 1) {
  require(mask.shape().rank() == 2, ErrorCode::unsupported_shape,
          "connected components support 2D masks only, got " + mask.shape().to_string());
  const std::size_t w = mask.shape().width();
  const std::size_t h = mask.shape().height();

  // provisional labels; 0 = background, otherwise union-find id + 1
  std::vector<std::uint32_t> prov(w * h, 0);
  detail::UnionFind uf;
  auto bits = mask.bits();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (!bits[i]) continue;
      std::uint32_t best = 0;
      auto visit = [&](std::size_t j) {
        const std::uint32_t l = prov[j];
        if (l == 0) return;
        if (best == 0) best = l;
        else uf.unite(best - 1, l - 1);
      };
      if (x > 0) visit(i - 1);
      if (y > 0) {
        visit(i - w);
        if (connectivity == Connectivity::eight) {
          if (x > 0) visit(i - w - 1);
          if (x + 1 < w) visit(i - w + 1);
        }
      }
      prov[i] = best != 0 ? best : uf.make() + 1;
    }
  }

  // resolve roots and measure sizes
  std::vector<std::size_t> root_size(uf.size(), 0);
  for (auto& l : prov) {
    if (l == 0) continue;
    l = uf.find(l - 1) + 1;
    ++root_size[l - 1];
  }

  ComponentSet out;
  out.labeled = LabelField(mask.shape());
  std::vector<std::uint32_t> final_label(uf.size(), 0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (prov[i] == 0) continue;
      const std::uint32_t root = prov[i] - 1;
      if (root_size[root] < min_size) continue;
      if (final_label[root] == 0) {
        final_label[root] = static_cast<std::uint32_t>(out.components.size() + 1);
        out.components.push_back({0, {x, y, x, y}, final_label[root]});
      }
      Component& c = out.components[final_label[root] - 1];
      ++c.size;
      c.bbox.min_x = std::min(c.bbox.min_x, x);
      c.bbox.max_x = std::max(c.bbox.max_x, x);
      c.bbox.min_y = std::min(c.bbox.min_y, y);
      c.bbox.max_y = std::max(c.bbox.max_y, y);
      out.labeled[i] = final_label[root];
    }
  }
  out.count = out.components.size();
  return out;
}

enum class TriggerKind { count_change, presence_change, mi_threshold };
enum class Segmentation { threshold, static_background };

/// Which timestep provides the first comparison baseline for the
/// segmentation triggers. The first timestep is always saved either way;
/// with `second_timestep` it is saved without being analyzed and the next
/// timestep only establishes the baseline.
enum class Baseline { first_timestep, second_timestep };

inline std::string_view to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::count_change: return "count-change";
    case TriggerKind::presence_change: return "presence-change";
    case TriggerKind::mi_threshold: return "mi-threshold";
  }
  return "unknown";
}

inline std::optional<TriggerKind> parse_trigger(std::string_view s) {
  if (s == "count-change") return TriggerKind::count_change;
  if (s == "presence-change") return TriggerKind::presence_change;
  if (s == "mi-threshold") return TriggerKind::mi_threshold;
  return std::nullopt;
}

struct TriggerConfig {
  TriggerKind kind = TriggerKind::count_change;

  // count-change / presence-change
  std::string channel;  // empty: first channel of the record
  Segmentation segmentation = Segmentation::threshold;
  double seg_threshold = 128.0;
  Polarity seg_polarity = Polarity::above;
  std::size_t min_component_size = 1;
  Connectivity connectivity = Connectivity::eight;
  std::optional<StaticBackground> background;
  std::optional<Baseline> baseline;  // default: second for presence-change, else first

  // mi-threshold
  double mi_threshold = 0.0;
  std::string channel_a;
  std::string channel_b;
  std::size_t mi_bin_count = 256;

  Baseline effective_baseline() const noexcept {
    if (baseline) return *baseline;
    return kind == TriggerKind::presence_change ? Baseline::second_timestep : Baseline::first_timestep;
  }

  void validate() const {
    if (kind == TriggerKind::mi_threshold) {
      require(!channel_a.empty() && !channel_b.empty(), ErrorCode::invalid_argument,
              "mi-threshold trigger needs two channel tags");
      require(mi_bin_count >= 1, ErrorCode::invalid_argument, "mi bin count must be >= 1");
    } else if (segmentation == Segmentation::static_background) {
      require(background.has_value(), ErrorCode::invalid_argument,
              "static-background segmentation needs a background model");
    }
  }
};

/// Trigger memory carried between timesteps.
class TriggerState {
 public:
  bool seeded() const noexcept { return seeded_; }
  std::optional<std::size_t> previous_count() const noexcept { return count_; }
  std::optional<double> previous_mi() const noexcept { return mi_; }

 private:
  friend TriggerState advance_state(TriggerState, std::optional<std::size_t>, std::optional<double>);

  bool seeded_ = false;
  std::optional<std::size_t> count_;
  std::optional<double> mi_;
};

inline TriggerState advance_state(TriggerState s, std::optional<std::size_t> count, std::optional<double> mi) {
  s.seeded_ = true;
  s.count_ = count;
  s.mi_ = mi;
  return s;
}

struct TriggerResult {
  bool fired = false;
  TriggerState state;
  std::optional<std::size_t> count;
  std::optional<double> mi;
};

inline BinaryMask segment_record(const TimestepRecord& record, const TriggerConfig& config) {
  const Field& f = record.channel(config.channel);
  if (config.segmentation == Segmentation::static_background) {
    require(config.background.has_value(), ErrorCode::invalid_argument,
            "static-background segmentation needs a background model");
    return config.background->segment(f, config.seg_threshold);
  }
  return segment_threshold(f, config.seg_threshold, config.seg_polarity);
}

/// Evaluates the trigger on one record. The first record of a sequence
/// (unseeded state) always fires. Segmentation triggers then compare the
/// filtered component count against the previous record; a record that
/// only establishes the baseline never fires.
inline TriggerResult evaluate_trigger(const TriggerState& prev, const TimestepRecord& record,
                                      const TriggerConfig& config) {
  config.validate();
  TriggerResult r;
  if (config.kind == TriggerKind::mi_threshold) {
    const double mi = mutual_information(
        build_joint(record.channel(config.channel_a), record.channel(config.channel_b), config.mi_bin_count));
    r.mi = mi;
    r.fired = !prev.seeded() || mi >= config.mi_threshold;
    r.state = advance_state(prev, std::nullopt, mi);
    return r;
  }

  if (!prev.seeded() && config.effective_baseline() == Baseline::second_timestep) {
    r.fired = true;
    r.state = advance_state(prev, std::nullopt, std::nullopt);
    return r;
  }

  const std::size_t count =
      connected_components(segment_record(record, config), config.connectivity, config.min_component_size).count;
  r.count = count;
  if (!prev.seeded()) {
    r.fired = true;
  } else if (!prev.previous_count()) {
    r.fired = false;
  } else if (config.kind == TriggerKind::count_change) {
    r.fired = count != *prev.previous_count();
  } else {
    r.fired = (count > 0) != (*prev.previous_count() > 0);
  }
  r.state = advance_state(prev, count, std::nullopt);
  return r;
}

}  // namespace stsum
