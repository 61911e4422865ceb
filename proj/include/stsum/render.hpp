#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "stsum/error.hpp"
#include "stsum/field.hpp"
#include "stsum/image_io.hpp"

namespace stsum {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class PaletteMode { discrete, continuous };

struct Palette {
  static constexpr std::size_t kDiscreteSize = 64;

  PaletteMode mode = PaletteMode::discrete;
  Rgb background{255, 255, 255};
};

namespace detail {

inline Rgb hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h * 6.0, 6.0);
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  auto q = [](double u) { return static_cast<std::uint8_t>(std::lround(std::clamp(u, 0.0, 1.0) * 255.0)); };
  return {q(r + m), q(g + m), q(b + m)};
}

}  // namespace detail

/// k-th discrete colour (0-based): golden-ratio hue walk with alternating
/// saturation/value rings.
inline Rgb discrete_color(std::size_t k) {
  const double golden = 0.6180339887498949;
  const double h = std::fmod(0.1 + static_cast<double>(k) * golden, 1.0);
  const double s = (k / 2) % 2 == 0 ? 0.9 : 0.6;
  const double v = k % 2 == 0 ? 0.95 : 0.7;
  return detail::hsv_to_rgb(h, s, v);
}

/// Blue -> cyan -> green -> yellow -> red ramp, t in [0,1].
inline Rgb continuous_color(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {0.19, 0.07, 0.55}, {0.10, 0.60, 0.85}, {0.20, 0.75, 0.30}, {0.95, 0.80, 0.10}, {0.80, 0.10, 0.10}}};
  t = std::clamp(t, 0.0, 1.0) * static_cast<double>(stops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  auto mix = [&](int c) {
    const double u = stops[i][c] + f * (stops[i + 1][c] - stops[i][c]);
    return static_cast<std::uint8_t>(std::lround(u * 255.0));
  };
  return {mix(0), mix(1), mix(2)};
}

struct LabelRendering {
  Image8 image;
  PaletteMode mode_used = PaletteMode::discrete;
  bool switched_to_continuous = false;
};

/// Colours a 2D label field: label 0 gets the background, labels 1..k go
/// through the palette in index order. A discrete palette that is too small
/// for k labels falls back to the continuous ramp.
inline LabelRendering render_labels(const LabelField& labels, const Palette& palette) {
  require(labels.shape().rank() == 2, ErrorCode::unsupported_shape, "label rendering needs a 2D field");
  const std::uint32_t k = labels.max_label();
  LabelRendering out;
  out.mode_used = palette.mode;
  if (palette.mode == PaletteMode::discrete && k > Palette::kDiscreteSize) {
    out.mode_used = PaletteMode::continuous;
    out.switched_to_continuous = true;
  }
  auto color_of = [&](std::uint32_t l) {
    if (l == 0) return palette.background;
    if (out.mode_used == PaletteMode::discrete) return discrete_color(l - 1);
    return continuous_color(k <= 1 ? 0.0 : static_cast<double>(l - 1) / static_cast<double>(k - 1));
  };
  out.image = Image8{labels.shape().width(), labels.shape().height(), 3, {}};
  out.image.pixels.reserve(labels.size() * 3);
  for (std::uint32_t l : labels.labels()) {
    const Rgb c = color_of(l);
    out.image.pixels.insert(out.image.pixels.end(), {c.r, c.g, c.b});
  }
  return out;
}

/// Linear gray rendering of a 2D field: min -> 0, max -> 255.
inline Image8 render_gray(const Field& field) {
  require(field.shape().rank() == 2, ErrorCode::unsupported_shape, "gray rendering needs a 2D field");
  const auto [lo, hi] = minmax(field);
  Image8 img{field.shape().width(), field.shape().height(), 1, std::vector<std::uint8_t>(field.size(), 0)};
  if (hi > lo) {
    for (std::size_t i = 0; i < field.size(); ++i)
      img.pixels[i] = static_cast<std::uint8_t>(std::lround((field[i] - lo) / (hi - lo) * 255.0));
  }
  return img;
}

/// 8-bit gray image of a 2D field's values as-is (rounded, clamped to [0,255]).
inline Image8 render_gray_levels(const Field& field) {
  require(field.shape().rank() == 2, ErrorCode::unsupported_shape, "gray rendering needs a 2D field");
  Image8 img{field.shape().width(), field.shape().height(), 1, std::vector<std::uint8_t>(field.size(), 0)};
  for (std::size_t i = 0; i < field.size(); ++i)
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(field[i], 0.0, 255.0)));
  return img;
}

}  // namespace stsum
