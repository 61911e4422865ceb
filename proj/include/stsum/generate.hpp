#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stsum/error.hpp"
#include "stsum/field.hpp"

namespace stsum {

namespace detail {

// pixel (x, y) is inside when its centre lies in the closed disk
inline void stamp_disk(std::vector<double>& px, std::size_t w, std::size_t h, double cx, double cy, double r,
                       double value) {
  const auto y0 = static_cast<long>(std::floor(cy - r - 1));
  const auto y1 = static_cast<long>(std::ceil(cy + r + 1));
  const auto x0 = static_cast<long>(std::floor(cx - r - 1));
  const auto x1 = static_cast<long>(std::ceil(cx + r + 1));
  for (long y = std::max(0L, y0); y <= std::min<long>(static_cast<long>(h) - 1, y1); ++y) {
    for (long x = std::max(0L, x0); x <= std::min<long>(static_cast<long>(w) - 1, x1); ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= r * r) px[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = value;
    }
  }
}

}  // namespace detail

struct RollingBallParams {
  std::size_t width = 800;
  std::size_t height = 400;
  std::size_t steps = 19;
  double radius = 40.0;
  double dx = 20.0;  // half a radius per step
};

struct RollingBall {
  std::vector<Field> frames;
  std::vector<bool> presence;
  std::vector<double> centers_x;  // NaN where the ball is absent
};

/// Binary 0/255 frames of a ball rolling left to right. Frame 0 is empty
/// (ball not yet in view), frames 1..steps-2 hold one disk each moving by
/// dx, and the last frame is empty again (ball gone). The in-view path is
/// centred horizontally.
inline RollingBall gen_rolling_ball(const RollingBallParams& p = {}) {
  require(p.width >= 1 && p.height >= 1, ErrorCode::invalid_argument, "frame must be non-empty");
  require(p.steps >= 3, ErrorCode::invalid_argument, "rolling ball needs >= 3 steps");
  require(p.radius >= 1.0, ErrorCode::invalid_argument, "radius must be >= 1 px");
  require(p.dx > 0.0, ErrorCode::invalid_argument, "dx must be positive");
  require(p.dx < 2.0 * p.radius, ErrorCode::invalid_argument, "consecutive positions must overlap (dx < 2r)");
  const std::size_t in_view = p.steps - 2;
  const double span = static_cast<double>(in_view - 1) * p.dx + 2.0 * p.radius;
  require(span <= static_cast<double>(p.width), ErrorCode::invalid_argument,
          "ball path does not fit in the frame width");
  require(2.0 * p.radius <= static_cast<double>(p.height), ErrorCode::invalid_argument,
          "ball does not fit in the frame height");

  const Shape shape = Shape::image(p.width, p.height);
  const double x_first = (static_cast<double>(p.width) - static_cast<double>(in_view - 1) * p.dx) / 2.0;
  const double cy = static_cast<double>(p.height) / 2.0;

  RollingBall out;
  for (std::size_t t = 0; t < p.steps; ++t) {
    std::vector<double> px(shape.size(), 0.0);
    const bool present = t >= 1 && t + 1 < p.steps;
    double cx = std::nan("");
    if (present) {
      cx = x_first + static_cast<double>(t - 1) * p.dx;
      detail::stamp_disk(px, p.width, p.height, cx, cy, p.radius, 255.0);
    }
    out.frames.emplace_back(shape, std::move(px), "value");
    out.presence.push_back(present);
    out.centers_x.push_back(cx);
  }
  return out;
}

/// A blob visible on frames [enter, exit] (inclusive), moving with constant
/// velocity from (cx, cy).
struct BlobEvent {
  std::size_t enter = 0;
  std::size_t exit = 0;
  double cx = 0.0;
  double cy = 0.0;
  double radius = 8.0;
  double vx = 0.0;
  double vy = 0.0;
};

struct MultiblobSpec {
  std::size_t width = 320;
  std::size_t height = 240;
  std::size_t steps = 12;
  std::vector<BlobEvent> blobs;
};

struct Multiblob {
  std::vector<Field> frames;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> trigger_indices;  // t >= 1 where the count changes
};

namespace detail {

inline void blob_center(const BlobEvent& b, std::size_t t, double& x, double& y) {
  const double dt = static_cast<double>(t - b.enter);
  x = b.cx + b.vx * dt;
  y = b.cy + b.vy * dt;
}

inline void validate_schedule(const MultiblobSpec& spec) {
  require(spec.width >= 1 && spec.height >= 1 && spec.steps >= 1, ErrorCode::invalid_argument,
          "multiblob frame and step counts must be positive");
  for (std::size_t i = 0; i < spec.blobs.size(); ++i) {
    const BlobEvent& b = spec.blobs[i];
    require(b.enter <= b.exit && b.exit < spec.steps, ErrorCode::invalid_argument,
            "blob " + std::to_string(i) + " has an invalid time window");
    require(b.radius >= 1.0, ErrorCode::invalid_argument, "blob radius must be >= 1");
    for (std::size_t t = b.enter; t <= b.exit; ++t) {
      double x, y;
      blob_center(b, t, x, y);
      require(x - b.radius >= 0 && y - b.radius >= 0 && x + b.radius <= static_cast<double>(spec.width) &&
                  y + b.radius <= static_cast<double>(spec.height),
              ErrorCode::invalid_argument,
              "blob " + std::to_string(i) + " leaves the frame at t=" + std::to_string(t));
    }
  }
  // Blobs closer than 2 px could merge under 8-connectivity.
  for (std::size_t t = 0; t < spec.steps; ++t) {
    for (std::size_t i = 0; i < spec.blobs.size(); ++i) {
      const BlobEvent& a = spec.blobs[i];
      if (t < a.enter || t > a.exit) continue;
      for (std::size_t j = i + 1; j < spec.blobs.size(); ++j) {
        const BlobEvent& b = spec.blobs[j];
        if (t < b.enter || t > b.exit) continue;
        double ax, ay, bx, by;
        blob_center(a, t, ax, ay);
        blob_center(b, t, bx, by);
        if (std::hypot(ax - bx, ay - by) <= a.radius + b.radius + 2.0)
          fail(ErrorCode::schedule_conflict, "blobs " + std::to_string(i) + " and " + std::to_string(j) +
                                                 " touch at t=" + std::to_string(t));
      }
    }
  }
}

}  // namespace detail

/// Binary 0/255 frames with scheduled blobs, plus the exact indices where
/// the blob count changes.
inline Multiblob gen_multiblob(const MultiblobSpec& spec) {
  detail::validate_schedule(spec);
  const Shape shape = Shape::image(spec.width, spec.height);
  Multiblob out;
  for (std::size_t t = 0; t < spec.steps; ++t) {
    std::vector<double> px(shape.size(), 0.0);
    std::size_t count = 0;
    for (const auto& b : spec.blobs) {
      if (t < b.enter || t > b.exit) continue;
      double x, y;
      detail::blob_center(b, t, x, y);
      detail::stamp_disk(px, spec.width, spec.height, x, y, b.radius, 255.0);
      ++count;
    }
    out.frames.emplace_back(shape, std::move(px), "value");
    out.counts.push_back(count);
    if (t >= 1 && count != out.counts[t - 1]) out.trigger_indices.push_back(t);
  }
  return out;
}

/// Random valid schedule with 1..max_blobs blobs; placements that would
/// conflict are redrawn.
inline MultiblobSpec random_multiblob_spec(std::uint64_t seed, std::size_t width = 320, std::size_t height = 240,
                                           std::size_t steps = 30, std::size_t max_blobs = 4) {
  require(steps >= 2 && max_blobs >= 1, ErrorCode::invalid_argument, "need >= 2 steps and >= 1 blob");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> n_dist(1, max_blobs);
  std::uniform_real_distribution<double> r_dist(5.0, 12.0);
  std::uniform_real_distribution<double> v_dist(-2.0, 2.0);

  MultiblobSpec spec{width, height, steps, {}};
  const std::size_t n = n_dist(rng);
  for (std::size_t k = 0; k < n; ++k) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      BlobEvent b;
      std::uniform_int_distribution<std::size_t> enter_dist(0, steps - 1);
      b.enter = enter_dist(rng);
      std::uniform_int_distribution<std::size_t> exit_dist(b.enter, steps - 1);
      b.exit = exit_dist(rng);
      b.radius = r_dist(rng);
      b.vx = v_dist(rng);
      b.vy = v_dist(rng);
      std::uniform_real_distribution<double> x_dist(b.radius, static_cast<double>(width) - b.radius);
      std::uniform_real_distribution<double> y_dist(b.radius, static_cast<double>(height) - b.radius);
      b.cx = x_dist(rng);
      b.cy = y_dist(rng);
      MultiblobSpec trial = spec;
      trial.blobs.push_back(b);
      try {
        detail::validate_schedule(trial);
      } catch (const Error&) {
        continue;
      }
      spec = std::move(trial);
      break;
    }
  }
  return spec;
}

}  // namespace stsum
