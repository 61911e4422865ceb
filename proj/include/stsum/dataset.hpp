#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stsum/error.hpp"
#include "stsum/field.hpp"
#include "stsum/image_io.hpp"
#include "stsum/pipeline.hpp"
#include "stsum/render.hpp"

namespace stsum {

enum class DatasetFormat { gray_image, raw_f32 };

inline std::optional<DatasetFormat> parse_format(std::string_view s) {
  if (s == "gray-image") return DatasetFormat::gray_image;
  if (s == "raw-f32") return DatasetFormat::raw_f32;
  return std::nullopt;
}

/// Where and how the frames of a dataset live on disk. A flat directory
/// holds one channel (tagged `channel`); a directory of subdirectories holds
/// one channel per subdirectory, tagged by its name. Frames are ordered
/// lexicographically by file name.
struct DatasetDescriptor {
  fs::path root;
  DatasetFormat format = DatasetFormat::gray_image;
  std::string channel = "value";
  std::optional<Shape> shape;  // raw-f32 only; otherwise read from the sidecar
};

namespace detail {

inline bool frame_extension(const fs::path& p, DatasetFormat format) {
  const std::string ext = p.extension().string();
  if (format == DatasetFormat::gray_image) return ext == ".pgm" || ext == ".png";
  return ext == ".f32" || ext == ".raw";
}

inline std::vector<fs::path> list_frames(const fs::path& dir, DatasetFormat format) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && frame_extension(e.path(), format)) out.push_back(e.path());
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

}  // namespace detail

/// Lazily loads one timestep per `next()` call; nothing is prefetched.
class FrameSource {
 public:
  explicit FrameSource(DatasetDescriptor desc) : desc_(std::move(desc)) {
    if (!fs::is_directory(desc_.root)) fail(ErrorCode::io_error, "input " + desc_.root.string() + " is not a directory");

    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(desc_.root))
      if (e.is_directory() && !detail::list_frames(e.path(), desc_.format).empty()) subdirs.push_back(e.path());
    std::sort(subdirs.begin(), subdirs.end());

    if (subdirs.empty()) {
      add_channel(desc_.channel, desc_.root);
    } else {
      for (const auto& d : subdirs) add_channel(d.filename().string(), d);
    }

    std::size_t n = channels_.front().frames.size();
    for (const auto& c : channels_)
      if (c.frames.size() != n)
        fail(ErrorCode::io_error, "channel '" + c.tag + "' has " + std::to_string(c.frames.size()) +
                                      " frames, expected " + std::to_string(n));
    if (n == 0) fail(ErrorCode::empty_input, "no frames found under " + desc_.root.string());
    count_ = n;
  }

  std::size_t frame_count() const noexcept { return count_; }
  std::vector<std::string> channel_tags() const {
    std::vector<std::string> t;
    for (const auto& c : channels_) t.push_back(c.tag);
    return t;
  }

  /// Loads frame `i` of one channel without advancing the stream.
  Field load(const std::string& tag, std::size_t i) const {
    for (const auto& c : channels_)
      if (c.tag == tag) return load_frame(c, i);
    fail(ErrorCode::invalid_argument, "dataset has no channel '" + tag + "'");
  }

  std::optional<TimestepRecord> next() {
    if (cursor_ >= count_) return std::nullopt;
    std::map<std::string, Field> fields;
    for (const auto& c : channels_) {
      Field f = load_frame(c, cursor_);
      if (!shape_) shape_ = f.shape();
      if (!(f.shape() == *shape_))
        fail(ErrorCode::invalid_sequence, "frame " + c.frames[cursor_].string() + " has shape " +
                                              f.shape().to_string() + ", expected " + shape_->to_string());
      fields.emplace(c.tag, std::move(f));
    }
    return TimestepRecord(cursor_++, std::move(fields));
  }

 private:
  struct Channel {
    std::string tag;
    fs::path dir;
    std::vector<fs::path> frames;
    std::optional<Shape> raw_shape;
  };

  void add_channel(std::string tag, const fs::path& dir) {
    Channel c{std::move(tag), dir, detail::list_frames(dir, desc_.format), std::nullopt};
    if (desc_.format == DatasetFormat::raw_f32 && !c.frames.empty())
      c.raw_shape = desc_.shape ? *desc_.shape : read_sidecar(dir);
    channels_.push_back(std::move(c));
  }

  Field load_frame(const Channel& c, std::size_t i) const {
    const fs::path& p = c.frames.at(i);
    try {
      if (desc_.format == DatasetFormat::raw_f32) return read_raw_f32(p, *c.raw_shape, c.tag);
      return p.extension() == ".png" ? read_png_gray(p, c.tag) : read_pgm(p, c.tag);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::io_error) throw;
      fail(ErrorCode::io_error, "frame " + p.string() + ": " + e.what());
    }
  }

  DatasetDescriptor desc_;
  std::vector<Channel> channels_;
  std::size_t count_ = 0;
  std::size_t cursor_ = 0;
  std::optional<Shape> shape_;
};

inline FrameSource read_sequence(const DatasetDescriptor& desc) { return FrameSource(desc); }

struct BundleWriteResult {
  std::vector<fs::path> files;
  bool palette_switched = false;
};

inline std::string bundle_dir_name(const SummaryBundle& b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "fused_%06zu_%06zu", b.run_start, b.run_end);
  return buf;
}

inline std::string key_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "key_%06zu", index);
  return buf;
}

/// Writes the three fused fields of a run: data and info as raw-f32 (plus
/// gray PNGs for 2D), labels as 16-bit little-endian raw (plus a colour PNG),
/// and bundle.json with the run range and label map.
inline BundleWriteResult write_bundle(const SummaryBundle& bundle, const fs::path& out_dir,
                                      const Palette& palette = {}) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + out_dir.string() + ": " + ec.message());

  BundleWriteResult res;
  const Shape& shape = bundle.fused_data.shape();
  write_sidecar(out_dir, shape);
  res.files.push_back(out_dir / kSidecarName);
  write_raw_f32(out_dir / "fused_data.f32", bundle.fused_data);
  write_raw_f32(out_dir / "fused_info.f32", bundle.fused_info);
  write_raw_u16(out_dir / "labels.u16", bundle.labels.labels());
  res.files.insert(res.files.end(),
                   {out_dir / "fused_data.f32", out_dir / "fused_info.f32", out_dir / "labels.u16"});

  std::string palette_name = "none";
  if (shape.rank() == 2) {
    write_png(out_dir / "fused_data.png", render_gray(bundle.fused_data));
    write_png(out_dir / "fused_info.png", render_gray(bundle.fused_info));
    const LabelRendering lr = render_labels(bundle.labels, palette);
    write_png(out_dir / "labels.png", lr.image);
    res.palette_switched = lr.switched_to_continuous;
    palette_name = lr.mode_used == PaletteMode::discrete ? "discrete" : "continuous";
    res.files.insert(res.files.end(),
                     {out_dir / "fused_data.png", out_dir / "fused_info.png", out_dir / "labels.png"});
  }

  nlohmann::json labels = nlohmann::json::object();
  for (std::uint32_t j = 1; j <= bundle.run_length(); ++j) labels[std::to_string(j)] = bundle.absolute_index(j);
  nlohmann::json meta{{"run_start", bundle.run_start},
                      {"run_end", bundle.run_end},
                      {"dims", shape.dims()},
                      {"labels_dtype", "u16le"},
                      {"label_map", labels},
                      {"palette", palette_name}};
  const std::string text = meta.dump(2) + "\n";
  detail::write_all(out_dir / "bundle.json", text.data(), text.size());
  res.files.push_back(out_dir / "bundle.json");
  return res;
}

/// Reads back a bundle written by write_bundle.
inline SummaryBundle read_bundle(const fs::path& dir) {
  const std::vector<char> raw = detail::read_all(dir / "bundle.json");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io_error, (dir / "bundle.json").string() + ": " + e.what());
  }
  const Shape shape(meta.at("dims").get<std::vector<std::size_t>>());
  SummaryBundle b;
  b.fused_data = read_raw_f32(dir / "fused_data.f32", shape);
  b.fused_info = read_raw_f32(dir / "fused_info.f32", shape, "info");
  b.labels = LabelField(shape, read_raw_u16(dir / "labels.u16", shape.size()));
  b.run_start = meta.at("run_start").get<std::size_t>();
  b.run_end = meta.at("run_end").get<std::size_t>();
  return b;
}

inline void write_manifest(const Manifest& m, const fs::path& path) {
  const std::string text = to_json(m).dump(2) + "\n";
  detail::write_all(path, text.data(), text.size());
}

inline Manifest read_manifest(const fs::path& path) {
  const std::vector<char> raw = detail::read_all(path);
  try {
    return manifest_from_json(nlohmann::json::parse(raw.begin(), raw.end()));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io_error, path.string() + ": " + e.what());
  }
}

/// Sink that stores key timesteps raw and fused runs as bundles under one
/// output directory.
class DirectorySink {
 public:
  DirectorySink(fs::path out_dir, Palette palette = {}, bool write_pgm_keys = false)
      : out_(std::move(out_dir)), palette_(palette), pgm_keys_(write_pgm_keys) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) fail(ErrorCode::io_error, "cannot create " + out_.string() + ": " + ec.message());
  }

  void write_key(const TimestepRecord& record) {
    const fs::path dir = out_ / key_dir_name(record.index());
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io_error, "cannot create " + dir.string());
    write_sidecar(dir, record.shape());
    for (const auto& [tag, f] : record.channels()) {
      write_raw_f32(dir / (tag + ".f32"), f);
      if (pgm_keys_ && f.shape().rank() == 2) write_pgm(dir / (tag + ".pgm"), f);
    }
  }

  void write_fused(const SummaryBundle& bundle) {
    const BundleWriteResult r = write_bundle(bundle, out_ / bundle_dir_name(bundle), palette_);
    if (r.palette_switched)
      warnings_.push_back("run " + std::to_string(bundle.run_start) + ".." + std::to_string(bundle.run_end) +
                          " has more labels than the discrete palette; rendered with the continuous palette");
  }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const fs::path& out_dir() const noexcept { return out_; }

 private:
  fs::path out_;
  Palette palette_;
  bool pgm_keys_;
  std::vector<std::string> warnings_;
};

}  // namespace stsum
