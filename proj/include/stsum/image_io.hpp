#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "stsum/error.hpp"
#include "stsum/field.hpp"

namespace stsum {

namespace fs = std::filesystem;

/// 8-bit interleaved image (1 channel gray or 3 channel RGB).
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  friend bool operator==(const Image8&, const Image8&) = default;
};

namespace detail {

inline std::vector<char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  return std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_all(const fs::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot create " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) fail(ErrorCode::io_error, "write failed for " + path.string());
}

// next whitespace-separated PNM header token, skipping '#' comments
inline std::string pnm_token(const std::vector<char>& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) tok += buf[pos++];
  return tok;
}

}  // namespace detail

/// Reads a binary (P5) or ASCII (P2) PGM as a field of raw gray levels.
inline Field read_pgm(const fs::path& path, const std::string& tag = {}) {
  const std::vector<char> buf = detail::read_all(path);
  std::size_t pos = 0;
  const std::string magic = detail::pnm_token(buf, pos);
  if (magic != "P5" && magic != "P2") fail(ErrorCode::io_error, path.string() + " is not a PGM file");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(detail::pnm_token(buf, pos));
    h = std::stoul(detail::pnm_token(buf, pos));
    maxval = std::stoul(detail::pnm_token(buf, pos));
  } catch (const std::exception&) {
    fail(ErrorCode::io_error, path.string() + " has a corrupt PGM header");
  }
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535)
    fail(ErrorCode::io_error, path.string() + " has invalid PGM dimensions");

  std::vector<double> samples(w * h);
  if (magic == "P5") {
    ++pos;  // single whitespace byte after maxval
    const std::size_t bps = maxval < 256 ? 1 : 2;
    if (buf.size() < pos + samples.size() * bps) fail(ErrorCode::io_error, path.string() + " is truncated");
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] = bps == 1 ? p[i] : static_cast<double>((p[2 * i] << 8) | p[2 * i + 1]);
  } else {
    for (auto& s : samples) {
      const std::string tok = detail::pnm_token(buf, pos);
      if (tok.empty()) fail(ErrorCode::io_error, path.string() + " is truncated");
      s = std::stod(tok);
    }
  }
  return Field(Shape::image(w, h), std::move(samples), tag);
}

/// Writes a field as 8-bit binary PGM; samples are rounded and clamped to [0,255].
inline void write_pgm(const fs::path& path, const Field& field) {
  require(field.shape().rank() == 2, ErrorCode::unsupported_shape, "PGM needs a 2D field");
  const std::string header = "P5\n" + std::to_string(field.shape().width()) + " " +
                             std::to_string(field.shape().height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double s : field.samples()) {
    const double c = s < 0.0 ? 0.0 : (s > 255.0 ? 255.0 : s);
    out.push_back(static_cast<std::uint8_t>(c + 0.5));
  }
  detail::write_all(path, out.data(), out.size());
}

/// Reads a PNG as 8-bit gray (colour is converted by libpng).
inline Field read_png_gray(const fs::path& path, const std::string& tag = {}) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    fail(ErrorCode::io_error, path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::io_error, path.string() + ": " + msg);
  }
  std::vector<double> samples(buf.begin(), buf.end());
  return Field(Shape::image(image.width, image.height), std::move(samples), tag);
}

inline void write_png(const fs::path& path, const Image8& img) {
  require(img.channels == 1 || img.channels == 3, ErrorCode::invalid_argument, "PNG needs 1 or 3 channels");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr))
    fail(ErrorCode::io_error, path.string() + ": " + image.message);
}

// ---- raw little-endian float32 with key=value sidecar -------------------

inline constexpr const char* kSidecarName = "meta.txt";

inline void write_sidecar(const fs::path& dir, const Shape& shape, const std::string& dtype = "f32") {
  std::ostringstream os;
  os << "width=" << shape.width() << "\nheight=" << shape.height() << "\n";
  if (shape.rank() == 3) os << "depth=" << shape.depth() << "\n";
  os << "dtype=" << dtype << "\n";
  const std::string s = os.str();
  detail::write_all(dir / kSidecarName, s.data(), s.size());
}

inline Shape read_sidecar(const fs::path& dir) {
  std::ifstream in(dir / kSidecarName);
  if (!in) fail(ErrorCode::io_error, "missing sidecar " + (dir / kSidecarName).string());
  std::map<std::string, std::string> kv;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::io_error, "bad sidecar line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!kv.count("width") || !kv.count("height"))
    fail(ErrorCode::io_error, "sidecar in " + dir.string() + " lacks width/height");
  if (kv.count("dtype") && kv["dtype"] != "f32")
    fail(ErrorCode::io_error, "unsupported sidecar dtype '" + kv["dtype"] + "'");
  try {
    const std::size_t w = std::stoul(kv["width"]);
    const std::size_t h = std::stoul(kv["height"]);
    if (kv.count("depth") && std::stoul(kv["depth"]) > 1) return Shape::volume(w, h, std::stoul(kv["depth"]));
    return Shape::image(w, h);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::io_error, "sidecar in " + dir.string() + " has non-numeric extents");
  }
}

inline void write_raw_f32(const fs::path& path, const Field& field) {
  std::vector<std::uint8_t> out(field.size() * 4);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(field[i]));
    for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  detail::write_all(path, out.data(), out.size());
}

inline Field read_raw_f32(const fs::path& path, const Shape& shape, const std::string& tag = {}) {
  const std::vector<char> buf = detail::read_all(path);
  if (buf.size() != 4 * shape.size())
    fail(ErrorCode::io_error, path.string() + " has " + std::to_string(buf.size()) + " bytes, expected " +
                                  std::to_string(4 * shape.size()) + " for shape " + shape.to_string());
  std::vector<double> samples(shape.size());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[4 * i + b]) << (8 * b);
    const float v = std::bit_cast<float>(bits);
    if (!std::isfinite(v)) fail(ErrorCode::io_error, path.string() + " contains a non-finite sample");
    samples[i] = v;
  }
  return Field(shape, std::move(samples), tag);
}

inline void write_raw_u16(const fs::path& path, std::span<const std::uint32_t> values) {
  std::vector<std::uint8_t> out(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] <= 0xFFFF, ErrorCode::invalid_argument, "label exceeds 16-bit range");
    out[2 * i] = static_cast<std::uint8_t>(values[i] & 0xFF);
    out[2 * i + 1] = static_cast<std::uint8_t>(values[i] >> 8);
  }
  detail::write_all(path, out.data(), out.size());
}

inline std::vector<std::uint32_t> read_raw_u16(const fs::path& path, std::size_t count) {
  const std::vector<char> buf = detail::read_all(path);
  if (buf.size() != 2 * count) fail(ErrorCode::io_error, path.string() + " has the wrong size");
  std::vector<std::uint32_t> out(count);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  for (std::size_t i = 0; i < count; ++i) out[i] = p[2 * i] | (static_cast<std::uint32_t>(p[2 * i + 1]) << 8);
  return out;
}

/// Loads a single frame by extension (.pgm, .png, .f32 with sidecar in the
/// same directory).
inline Field read_frame(const fs::path& path, const std::string& tag = {}) {
  if (!fs::exists(path)) fail(ErrorCode::io_error, "frame " + path.string() + " does not exist");
  const std::string ext = path.extension().string();
  if (ext == ".pgm") return read_pgm(path, tag);
  if (ext == ".png") return read_png_gray(path, tag);
  if (ext == ".f32" || ext == ".raw") return read_raw_f32(path, read_sidecar(path.parent_path()), tag);
  fail(ErrorCode::io_error, "unrecognized frame format '" + ext + "' for " + path.string());
}

}  // namespace stsum
