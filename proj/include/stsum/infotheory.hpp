#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stsum/binning.hpp"
#include "stsum/error.hpp"
#include "stsum/field.hpp"
#include "stsum/probability.hpp"

// All measures are in bits. Cells with zero probability contribute nothing
// to any sum (p log p -> 0); no epsilon enters a logarithm.

namespace stsum {

enum class MeasureKind { surprise, predictability, ssi, pmi };

/// The printed SSI formula carries a leading minus that the original
/// definition does not; `negated` reproduces the printed form.
enum class SsiSign { positive, negated };

/// Which operand of a field pair is the reference variable.
enum class Operand { a, b };

inline std::string_view to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::surprise: return "surprise";
    case MeasureKind::predictability: return "predictability";
    case MeasureKind::ssi: return "ssi";
    case MeasureKind::pmi: return "pmi";
  }
  return "unknown";
}

inline std::optional<MeasureKind> parse_measure(std::string_view s) {
  if (s == "surprise") return MeasureKind::surprise;
  if (s == "predictability") return MeasureKind::predictability;
  if (s == "ssi") return MeasureKind::ssi;
  if (s == "pmi") return MeasureKind::pmi;
  return std::nullopt;
}

namespace detail {

inline void require_observed(const JointDistribution& joint, std::size_t y_bin) {
  require(y_bin < joint.bins_y(), ErrorCode::invalid_argument, "y bin out of range");
  require(joint.py(y_bin) > 0.0, ErrorCode::undefined_conditional,
          "y bin " + std::to_string(y_bin) + " is never observed");
}

// -sum p log2 p over the nonzero entries
template <class Range>
double entropy(const Range& probs) {
  double h = 0.0;
  for (double v : probs)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

}  // namespace detail

/// I(X;Y) = sum p(x,y) log2[p(x,y) / (p(x) p(y))].
inline double mutual_information(const JointDistribution& joint) {
  double mi = 0.0;
  for (std::size_t x = 0; x < joint.bins_x(); ++x) {
    for (std::size_t y = 0; y < joint.bins_y(); ++y) {
      const double pxy = joint.p(x, y);
      if (pxy <= 0.0) continue;
      mi += pxy * std::log2(pxy / (joint.px(x) * joint.py(y)));
    }
  }
  return mi;
}

inline double entropy_x(const JointDistribution& joint) { return detail::entropy(joint.px()); }

/// Surprise I1(y;X): KL divergence of p(x|y) from p(x). Never negative.
inline double surprise(const JointDistribution& joint, std::size_t y_bin) {
  detail::require_observed(joint, y_bin);
  const double py = joint.py(y_bin);
  double kl = 0.0;
  for (std::size_t x = 0; x < joint.bins_x(); ++x) {
    const double pxy = joint.p(x, y_bin);
    if (pxy <= 0.0) continue;
    const double cond = pxy / py;
    kl += cond * std::log2(cond / joint.px(x));
  }
  return kl;
}

/// Predictability I2(y;X) = H(X) - H(X|y). Can be negative.
inline double predictability(const JointDistribution& joint, std::size_t y_bin) {
  detail::require_observed(joint, y_bin);
  const double py = joint.py(y_bin);
  double neg_h_cond = 0.0;
  for (std::size_t x = 0; x < joint.bins_x(); ++x) {
    const double pxy = joint.p(x, y_bin);
    if (pxy <= 0.0) continue;
    const double cond = pxy / py;
    neg_h_cond += cond * std::log2(cond);
  }
  return entropy_x(joint) + neg_h_cond;
}

/// I2(x;Y) for every x bin; unobserved x bins get 0.
inline std::vector<double> predictability_of_x(const JointDistribution& joint) {
  const double hy = detail::entropy(joint.py());
  std::vector<double> out(joint.bins_x(), 0.0);
  for (std::size_t x = 0; x < joint.bins_x(); ++x) {
    const double px = joint.px(x);
    if (px <= 0.0) continue;
    double neg_h_cond = 0.0;
    for (std::size_t y = 0; y < joint.bins_y(); ++y) {
      const double pxy = joint.p(x, y);
      if (pxy <= 0.0) continue;
      const double cond = pxy / px;
      neg_h_cond += cond * std::log2(cond);
    }
    out[x] = hy + neg_h_cond;
  }
  return out;
}

namespace detail {

inline double ssi_with(const JointDistribution& joint, std::size_t y_bin, const std::vector<double>& i2_of_x,
                       SsiSign sign) {
  const double py = joint.py(y_bin);
  double acc = 0.0;
  for (std::size_t x = 0; x < joint.bins_x(); ++x) {
    const double pxy = joint.p(x, y_bin);
    if (pxy <= 0.0) continue;
    acc += (pxy / py) * i2_of_x[x];
  }
  return sign == SsiSign::negated ? -acc : acc;
}

}  // namespace detail

/// Stimulus-specific information I3(y;X) = sum_x p(x|y) I2(x;Y).
inline double ssi(const JointDistribution& joint, std::size_t y_bin, SsiSign sign = SsiSign::positive) {
  detail::require_observed(joint, y_bin);
  return detail::ssi_with(joint, y_bin, predictability_of_x(joint), sign);
}

/// PMI(x,y) = log2[p(x,y) / (p(x) p(y))]. A pair that never co-occurs
/// reports 0 instead of -inf.
inline double pmi(const JointDistribution& joint, std::size_t x_bin, std::size_t y_bin) {
  require(x_bin < joint.bins_x() && y_bin < joint.bins_y(), ErrorCode::invalid_argument,
          "pmi bin out of range");
  const double pxy = joint.p(x_bin, y_bin);
  if (pxy <= 0.0) return 0.0;
  return std::log2(pxy / (joint.px(x_bin) * joint.py(y_bin)));
}

/// Per-y-bin table of a specific-information measure (surprise,
/// predictability or ssi). Unobserved y bins hold 0.
inline std::vector<double> specific_information_table(const JointDistribution& joint, MeasureKind measure,
                                                      SsiSign sign = SsiSign::positive) {
  require(measure != MeasureKind::pmi, ErrorCode::invalid_argument,
          "pmi is a pairwise measure and has no per-bin table");
  std::vector<double> table(joint.bins_y(), 0.0);
  std::vector<double> i2_of_x;
  if (measure == MeasureKind::ssi) i2_of_x = predictability_of_x(joint);
  for (std::size_t y = 0; y < joint.bins_y(); ++y) {
    if (joint.py(y) <= 0.0) continue;
    switch (measure) {
      case MeasureKind::surprise: table[y] = surprise(joint, y); break;
      case MeasureKind::predictability: table[y] = predictability(joint, y); break;
      case MeasureKind::ssi: table[y] = detail::ssi_with(joint, y, i2_of_x, sign); break;
      case MeasureKind::pmi: break;
    }
  }
  return table;
}

/// Per-sample information values for one operand of a field pair.
struct InformationField {
  Field values;
  MeasureKind measure = MeasureKind::surprise;
  Operand reference = Operand::a;
};

/// Information carried by each sample of the reference operand about the
/// other operand. Specific measures are evaluated once per reference bin and
/// expanded by lookup; PMI is evaluated per position on the (a_i, b_i) pair.
inline InformationField information_field(const Field& field_a, const Field& field_b, MeasureKind measure,
                                          Operand reference, std::size_t bin_count,
                                          SsiSign sign = SsiSign::positive) {
  require(field_a.shape() == field_b.shape(), ErrorCode::invalid_argument,
          "information field needs equal shapes, got " + field_a.shape().to_string() + " and " +
              field_b.shape().to_string());
  const Field& ref = reference == Operand::a ? field_a : field_b;
  const Field& other = reference == Operand::a ? field_b : field_a;

  if (measure == MeasureKind::pmi) {
    const JointDistribution joint = build_joint(field_a, field_b, bin_count);
    const auto& bx = joint.binning_x();
    const auto& by = joint.binning_y();
    auto as = field_a.samples();
    auto bs = field_b.samples();
    std::vector<double> out(as.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pmi(joint, bx.bin_of(as[i]), by.bin_of(bs[i]));
    return {Field(ref.shape(), std::move(out), ref.channel_tag()), measure, reference};
  }

  // Conditioning variable goes on the y axis.
  const JointDistribution joint = build_joint(other, ref, bin_count);
  const std::vector<double> table = specific_information_table(joint, measure, sign);
  return {map_samples(ref, table, joint.binning_y()), measure, reference};
}

}  // namespace stsum
