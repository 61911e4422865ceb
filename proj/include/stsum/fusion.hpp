#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stsum/error.hpp"
#include "stsum/field.hpp"
#include "stsum/infotheory.hpp"

namespace stsum {

/// Decides which fused values count as background (label 0).
struct ConfidenceRule {
  enum class Comparator { below_is_background, above_is_background };

  double threshold = 0.0;
  Comparator comparator = Comparator::below_is_background;

  bool rejects(double value) const noexcept {
    return comparator == Comparator::below_is_background ? value < threshold : value > threshold;
  }
};

struct FusionConfig {
  MeasureKind measure = MeasureKind::surprise;
  std::size_t bin_count = 256;
  ConfidenceRule confidence;
  SsiSign ssi_sign = SsiSign::positive;
};

struct FusedFields {
  Field data;
  Field info;
  LabelField labels;
};

/// One samplewise selection sweep between the accumulator (data1) and the
/// next frame (data2). Strict `>` keeps data1; ties go to data2. A data1 win
/// writes label `time` only on the first sweep and otherwise keeps the label
/// already recorded; a data2 win writes `time + 1`.
inline FusedFields fusion_sweep(const Field& data1, const Field& data2, const InformationField& ifield1,
                                const InformationField& ifield2, LabelField labels, std::uint32_t time) {
  const Shape& shape = data1.shape();
  require(data2.shape() == shape && ifield1.values.shape() == shape && ifield2.values.shape() == shape &&
              labels.shape() == shape,
          ErrorCode::invalid_argument, "fusion operands must share one shape");
  require(time >= 1, ErrorCode::invalid_argument, "fusion time must be >= 1");

  auto d1 = data1.samples();
  auto d2 = data2.samples();
  auto i1 = ifield1.values.samples();
  auto i2 = ifield2.values.samples();
  std::vector<double> data(shape.size());
  std::vector<double> info(shape.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    if (i1[p] > i2[p]) {
      data[p] = d1[p];
      info[p] = i1[p];
      if (time == 1) labels[p] = time;
    } else {
      data[p] = d2[p];
      info[p] = i2[p];
      labels[p] = time + 1;
    }
  }
  return {Field(shape, std::move(data), data1.channel_tag()), Field(shape, std::move(info), "info"),
          std::move(labels)};
}

/// Zeroes the label wherever the fused value is background.
inline void apply_confidence(const Field& fused_data, LabelField& labels, const ConfidenceRule& rule) {
  require(fused_data.shape() == labels.shape(), ErrorCode::invalid_argument, "label shape mismatch");
  auto d = fused_data.samples();
  for (std::size_t p = 0; p < d.size(); ++p)
    if (rule.rejects(d[p])) labels[p] = 0;
}

/// Single fusion step followed by the confidence pass.
inline FusedFields create_fusion_fields(const Field& data1, const Field& data2, const InformationField& ifield1,
                                        const InformationField& ifield2, LabelField labels,
                                        std::uint32_t time, const ConfidenceRule& confidence) {
  FusedFields out = fusion_sweep(data1, data2, ifield1, ifield2, std::move(labels), time);
  apply_confidence(out.data, out.labels, confidence);
  return out;
}

/// Incremental left fold of a run: frames are consumed one at a time and
/// only the accumulator (data, info, labels) is retained.
class RunFuser {
 public:
  explicit RunFuser(FusionConfig config) : config_(config) {}

  bool empty() const noexcept { return !acc_.has_value(); }
  std::size_t length() const noexcept { return count_; }
  std::size_t run_start() const noexcept { return run_start_; }

  void add(const Field& frame, std::size_t absolute_index) {
    if (!acc_) {
      acc_ = FusedFields{frame, Field::filled(frame.shape(), 0.0, "info"), LabelField(frame.shape())};
      run_start_ = absolute_index;
      last_index_ = absolute_index;
      count_ = 1;
      return;
    }
    require(frame.shape() == acc_->data.shape(), ErrorCode::invalid_sequence,
            "frame " + std::to_string(absolute_index) + " changes shape mid-run");
    require(absolute_index == last_index_ + 1, ErrorCode::invalid_argument,
            "run indices must be contiguous");

    const InformationField ifield1 = information_field(acc_->data, frame, config_.measure, Operand::a,
                                                       config_.bin_count, config_.ssi_sign);
    const InformationField ifield2 = information_field(acc_->data, frame, config_.measure, Operand::b,
                                                       config_.bin_count, config_.ssi_sign);
    const auto time = static_cast<std::uint32_t>(count_);
    acc_ = fusion_sweep(acc_->data, frame, ifield1, ifield2, std::move(acc_->labels), time);
    last_index_ = absolute_index;
    ++count_;
  }

  /// Applies the confidence pass and returns the bundle. Needs >= 2 frames.
  SummaryBundle finish() {
    require(count_ >= 2, ErrorCode::invalid_argument, "a fused run needs at least 2 timesteps");
    apply_confidence(acc_->data, acc_->labels, config_.confidence);
    SummaryBundle bundle{std::move(acc_->data), std::move(acc_->info), std::move(acc_->labels), run_start_,
                         last_index_};
    reset();
    return bundle;
  }

  void reset() {
    acc_.reset();
    count_ = 0;
  }

 private:
  FusionConfig config_;
  std::optional<FusedFields> acc_;
  std::size_t run_start_ = 0;
  std::size_t last_index_ = 0;
  std::size_t count_ = 0;
};

/// Fuses a contiguous run of >= 2 timesteps on one channel.
inline SummaryBundle fuse_run(std::span<const TimestepRecord> records, const std::string& channel,
                              const FusionConfig& config) {
  require(records.size() >= 2, ErrorCode::invalid_argument, "a fused run needs at least 2 timesteps");
  RunFuser fuser(config);
  for (const auto& r : records) fuser.add(r.channel(channel), r.index());
  return fuser.finish();
}

}  // namespace stsum
