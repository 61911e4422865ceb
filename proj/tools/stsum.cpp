// stsum: summarize time-varying field datasets into key timesteps plus
// information-fused runs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stsum/stsum.hpp"

namespace fs = std::filesystem;
using stsum::ErrorCode;

namespace {

struct RunOptions {
  std::string input;
  std::string out;
  std::string format = "gray-image";
  std::string channel = "value";
  std::string trigger = "count-change";
  std::string seg_channel;
  std::string segmentation = "threshold";
  std::size_t background_frames = 10;
  double seg_threshold = 128.0;
  std::string seg_polarity = "above";
  std::size_t min_size = 1;
  int connectivity = 8;
  double mi_threshold = 0.0;
  std::vector<std::string> mi_channels;
  std::string measure = "surprise";
  std::size_t bins = 0;
  double conf_th = std::numeric_limits<double>::lowest();
  std::string conf_dir = "below-bg";
  bool ssi_negate = false;
  std::string palette = "discrete";
  std::string baseline;
};

struct RollingBallOptions {
  std::string out;
  std::string image_format = "pgm";
  stsum::RollingBallParams params;
};

struct MultiblobOptions {
  std::string out;
  std::size_t width = 320;
  std::size_t height = 240;
  std::size_t steps = 30;
  std::vector<std::string> blobs;
  std::int64_t seed = -1;
  std::size_t max_blobs = 4;
};

struct InfoOptions {
  std::vector<std::string> pair;
  std::string measure = "surprise";
  std::string reference = "b";
  std::size_t bins = 256;
  bool ssi_negate = false;
  std::string out;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) stsum::fail(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) stsum::fail(ErrorCode::io_error, "cannot create " + path.string());
  out << text;
}

std::string frame_name(std::size_t t, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.%s", t, ext.c_str());
  return buf;
}

void write_frames(const std::vector<stsum::Field>& frames, const fs::path& out, const std::string& ext) {
  ensure_dir(out);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const fs::path p = out / frame_name(t, ext);
    if (ext == "png") stsum::write_png(p, stsum::render_gray_levels(frames[t]));
    else stsum::write_pgm(p, frames[t]);
  }
}

int cmd_run(const RunOptions& o) {
  const auto format = stsum::parse_format(o.format);
  const auto trigger_kind = stsum::parse_trigger(o.trigger);
  const auto measure = stsum::parse_measure(o.measure);
  stsum::require(format.has_value(), ErrorCode::invalid_argument, "unknown format '" + o.format + "'");
  stsum::require(trigger_kind.has_value(), ErrorCode::invalid_argument, "unknown trigger '" + o.trigger + "'");
  stsum::require(measure.has_value(), ErrorCode::invalid_argument, "unknown measure '" + o.measure + "'");

  stsum::DatasetDescriptor desc{o.input, *format, o.channel, std::nullopt};
  stsum::FrameSource source = stsum::read_sequence(desc);
  const std::vector<std::string> tags = source.channel_tags();
  std::string fuse_channel = o.channel;
  if (tags.size() == 1) fuse_channel = tags.front();

  stsum::TriggerConfig trigger;
  trigger.kind = *trigger_kind;
  trigger.channel = o.seg_channel.empty() ? fuse_channel : o.seg_channel;
  trigger.seg_threshold = o.seg_threshold;
  trigger.seg_polarity = o.seg_polarity == "below" ? stsum::Polarity::below : stsum::Polarity::above;
  stsum::require(o.seg_polarity == "above" || o.seg_polarity == "below", ErrorCode::invalid_argument,
                 "--seg-polarity must be above or below");
  trigger.min_component_size = o.min_size;
  stsum::require(o.connectivity == 4 || o.connectivity == 8, ErrorCode::invalid_argument,
                 "--connectivity must be 4 or 8");
  trigger.connectivity = o.connectivity == 4 ? stsum::Connectivity::four : stsum::Connectivity::eight;
  if (!o.baseline.empty())
    trigger.baseline = o.baseline == "first" ? stsum::Baseline::first_timestep : stsum::Baseline::second_timestep;
  trigger.mi_threshold = o.mi_threshold;
  trigger.mi_bin_count = o.bins != 0 ? o.bins : (*format == stsum::DatasetFormat::gray_image ? 256 : 128);
  if (trigger.kind == stsum::TriggerKind::mi_threshold) {
    if (o.mi_channels.size() == 2) {
      trigger.channel_a = o.mi_channels[0];
      trigger.channel_b = o.mi_channels[1];
    } else {
      stsum::require(tags.size() >= 2, ErrorCode::invalid_argument,
                     "mi-threshold trigger needs two channels (--mi-channels a b)");
      trigger.channel_a = tags[0];
      trigger.channel_b = tags[1];
    }
  }
  if (o.segmentation == "static-background") {
    trigger.segmentation = stsum::Segmentation::static_background;
    std::vector<stsum::Field> head;
    const std::size_t k = std::min(o.background_frames, source.frame_count());
    for (std::size_t i = 0; i < k; ++i) head.push_back(source.load(trigger.channel, i));
    trigger.background = stsum::StaticBackground::from_frames(head);
  } else {
    stsum::require(o.segmentation == "threshold", ErrorCode::invalid_argument,
                   "--segmentation must be threshold or static-background");
  }

  stsum::FusionConfig fusion;
  fusion.measure = *measure;
  fusion.bin_count = trigger.mi_bin_count;
  fusion.confidence.threshold = o.conf_th;
  stsum::require(o.conf_dir == "below-bg" || o.conf_dir == "above-bg", ErrorCode::invalid_argument,
                 "--conf-dir must be below-bg or above-bg");
  fusion.confidence.comparator = o.conf_dir == "below-bg"
                                     ? stsum::ConfidenceRule::Comparator::below_is_background
                                     : stsum::ConfidenceRule::Comparator::above_is_background;
  fusion.ssi_sign = o.ssi_negate ? stsum::SsiSign::negated : stsum::SsiSign::positive;

  stsum::Palette palette;
  palette.mode = o.palette == "continuous" ? stsum::PaletteMode::continuous : stsum::PaletteMode::discrete;

  const auto t0 = std::chrono::steady_clock::now();
  stsum::DirectorySink sink(o.out, palette, *format == stsum::DatasetFormat::gray_image);
  stsum::Manifest manifest = stsum::run_pipeline(source, trigger, fusion, fuse_channel, sink);
  stsum::write_manifest(manifest, fs::path(o.out) / "manifest.json");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& w : sink.warnings()) std::cerr << "warning: " << w << "\n";
  for (const auto& e : manifest.entries) {
    if (const auto* k = std::get_if<stsum::KeyEntry>(&e)) {
      std::cout << "key        " << k->index << "\n";
    } else if (const auto* f = std::get_if<stsum::FusedEntry>(&e)) {
      std::cout << "fused      " << f->run_start << ".." << f->run_end << "\n";
    } else {
      std::cout << "discarded  " << std::get<stsum::DiscardedEntry>(e).index << "\n";
    }
  }
  std::printf("%zu timesteps -> %zu outputs, reduction ratio %.4f (%.2f s)\n", manifest.stats.input_count,
              manifest.stats.output_count, manifest.stats.reduction_ratio, secs);
  return 0;
}

int cmd_gen_rolling_ball(const RollingBallOptions& o) {
  stsum::require(o.image_format == "pgm" || o.image_format == "png", ErrorCode::invalid_argument,
                 "--image-format must be pgm or png");
  const stsum::RollingBall rb = stsum::gen_rolling_ball(o.params);
  write_frames(rb.frames, o.out, o.image_format);

  std::vector<std::size_t> triggers;
  for (std::size_t t = 1; t < rb.presence.size(); ++t)
    if (rb.presence[t] != rb.presence[t - 1]) triggers.push_back(t);
  nlohmann::json centers = nlohmann::json::array();
  for (double c : rb.centers_x) centers.push_back(std::isnan(c) ? nlohmann::json(nullptr) : nlohmann::json(c));
  const nlohmann::json truth{{"generator", "rolling-ball"},
                             {"width", o.params.width},
                             {"height", o.params.height},
                             {"steps", o.params.steps},
                             {"radius", o.params.radius},
                             {"dx", o.params.dx},
                             {"presence", rb.presence},
                             {"centers_x", centers},
                             {"trigger_indices", triggers}};
  write_text(fs::path(o.out) / "ground_truth.json", truth.dump(2) + "\n");
  std::cout << "wrote " << rb.frames.size() << " frames to " << o.out << "\n";
  return 0;
}

stsum::BlobEvent parse_blob(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      stsum::fail(ErrorCode::invalid_argument, "bad --blob value '" + s + "'");
    }
  }
  stsum::require(v.size() == 5 || v.size() == 7, ErrorCode::invalid_argument,
                 "--blob expects enter,exit,cx,cy,r[,vx,vy]");
  stsum::require(v[0] >= 0 && v[1] >= 0, ErrorCode::invalid_argument, "blob times must be >= 0");
  stsum::BlobEvent b;
  b.enter = static_cast<std::size_t>(v[0]);
  b.exit = static_cast<std::size_t>(v[1]);
  b.cx = v[2];
  b.cy = v[3];
  b.radius = v[4];
  if (v.size() == 7) {
    b.vx = v[5];
    b.vy = v[6];
  }
  return b;
}

int cmd_gen_multiblob(const MultiblobOptions& o) {
  stsum::MultiblobSpec spec;
  if (o.seed >= 0) {
    spec = stsum::random_multiblob_spec(static_cast<std::uint64_t>(o.seed), o.width, o.height, o.steps, o.max_blobs);
  } else {
    spec = {o.width, o.height, o.steps, {}};
    for (const auto& b : o.blobs) spec.blobs.push_back(parse_blob(b));
  }
  const stsum::Multiblob mb = stsum::gen_multiblob(spec);
  write_frames(mb.frames, o.out, "pgm");

  std::vector<std::size_t> keys{0};
  keys.insert(keys.end(), mb.trigger_indices.begin(), mb.trigger_indices.end());
  nlohmann::json blobs = nlohmann::json::array();
  for (const auto& b : spec.blobs)
    blobs.push_back({{"enter", b.enter}, {"exit", b.exit}, {"cx", b.cx}, {"cy", b.cy}, {"radius", b.radius},
                     {"vx", b.vx}, {"vy", b.vy}});
  const nlohmann::json truth{{"generator", "multiblob"}, {"width", spec.width},  {"height", spec.height},
                             {"steps", spec.steps},      {"blobs", blobs},       {"counts", mb.counts},
                             {"trigger_indices", mb.trigger_indices},            {"key_indices", keys}};
  write_text(fs::path(o.out) / "ground_truth.json", truth.dump(2) + "\n");
  std::cout << "wrote " << mb.frames.size() << " frames to " << o.out << "\n";
  return 0;
}

int cmd_info(const InfoOptions& o) {
  const auto measure = stsum::parse_measure(o.measure);
  stsum::require(measure.has_value(), ErrorCode::invalid_argument, "unknown measure '" + o.measure + "'");
  stsum::require(o.reference == "a" || o.reference == "b", ErrorCode::invalid_argument,
                 "--reference must be a or b");
  const stsum::Field a = stsum::read_frame(o.pair.at(0), "a");
  const stsum::Field b = stsum::read_frame(o.pair.at(1), "b");
  const auto sign = o.ssi_negate ? stsum::SsiSign::negated : stsum::SsiSign::positive;
  const stsum::InformationField info = stsum::information_field(
      a, b, *measure, o.reference == "a" ? stsum::Operand::a : stsum::Operand::b, o.bins, sign);
  const double mi = stsum::mutual_information(stsum::build_joint(a, b, o.bins));
  const auto [lo, hi] = stsum::minmax(info.values);
  double sum = 0.0;
  for (double v : info.values.samples()) sum += v;

  const nlohmann::json report{{"mutual_information", mi},
                              {"measure", stsum::to_string(*measure)},
                              {"reference", o.reference},
                              {"bins", o.bins},
                              {"min", lo},
                              {"max", hi},
                              {"mean", sum / static_cast<double>(info.values.size())}};
  std::cout << report.dump(2) << "\n";
  if (!o.out.empty()) {
    ensure_dir(o.out);
    stsum::write_sidecar(o.out, info.values.shape());
    stsum::write_raw_f32(fs::path(o.out) / "info.f32", info.values);
    if (info.values.shape().rank() == 2)
      stsum::write_png(fs::path(o.out) / "info.png", stsum::render_gray(info.values));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Summarize time-varying fields: key timesteps plus information-guided fusion of quiet runs"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Summarize a frame sequence");
  run_cmd->add_option("--input", run.input, "Input directory of frames")->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--format", run.format, "gray-image or raw-f32")
      ->check(CLI::IsMember({"gray-image", "raw-f32"}));
  run_cmd->add_option("--channel", run.channel, "Channel to fuse (tag of a flat directory)");
  run_cmd->add_option("--trigger", run.trigger)
      ->check(CLI::IsMember({"count-change", "presence-change", "mi-threshold"}));
  run_cmd->add_option("--seg-channel", run.seg_channel, "Channel to segment (default: --channel)");
  run_cmd->add_option("--segmentation", run.segmentation)->check(CLI::IsMember({"threshold", "static-background"}));
  run_cmd->add_option("--background-frames", run.background_frames, "Frames in the static background median");
  run_cmd->add_option("--seg-threshold", run.seg_threshold);
  run_cmd->add_option("--seg-polarity", run.seg_polarity)->check(CLI::IsMember({"above", "below"}));
  run_cmd->add_option("--min-size", run.min_size, "Minimum component size in pixels");
  run_cmd->add_option("--connectivity", run.connectivity)->check(CLI::IsMember({4, 8}));
  run_cmd->add_option("--baseline", run.baseline,
                      "Timestep that sets the trigger baseline (default: second for presence-change, else first)")
      ->check(CLI::IsMember({"first", "second"}));
  run_cmd->add_option("--mi-threshold", run.mi_threshold, "Bits");
  run_cmd->add_option("--mi-channels", run.mi_channels, "Two channel tags for the MI trigger")->expected(2);
  run_cmd->add_option("--measure", run.measure)
      ->check(CLI::IsMember({"surprise", "pmi", "predictability", "ssi"}));
  run_cmd->add_option("--bins", run.bins, "Histogram bins (default 256 for gray-image, 128 for raw-f32)");
  run_cmd->add_option("--conf-th", run.conf_th, "Confidence threshold on fused values");
  run_cmd->add_option("--conf-dir", run.conf_dir)->check(CLI::IsMember({"below-bg", "above-bg"}));
  run_cmd->add_flag("--ssi-negate", run.ssi_negate, "Use the negated SSI form");
  run_cmd->add_option("--palette", run.palette)->check(CLI::IsMember({"discrete", "continuous"}));

  auto* gen_cmd = app.add_subcommand("gen", "Generate synthetic datasets");
  gen_cmd->require_subcommand(1);

  RollingBallOptions rb;
  auto* rb_cmd = gen_cmd->add_subcommand("rolling-ball", "Binary rolling-ball sequence");
  rb_cmd->add_option("--out", rb.out)->required();
  rb_cmd->add_option("--width", rb.params.width);
  rb_cmd->add_option("--height", rb.params.height);
  rb_cmd->add_option("--steps", rb.params.steps);
  rb_cmd->add_option("--radius", rb.params.radius, "Pixels");
  rb_cmd->add_option("--dx", rb.params.dx, "Pixels per step");
  rb_cmd->add_option("--image-format", rb.image_format)->check(CLI::IsMember({"pgm", "png"}));

  MultiblobOptions mb;
  auto* mb_cmd = gen_cmd->add_subcommand("multiblob", "Scheduled blobs entering and leaving");
  mb_cmd->add_option("--out", mb.out)->required();
  mb_cmd->add_option("--width", mb.width);
  mb_cmd->add_option("--height", mb.height);
  mb_cmd->add_option("--steps", mb.steps);
  mb_cmd->add_option("--blob", mb.blobs, "enter,exit,cx,cy,r[,vx,vy] (repeatable)");
  mb_cmd->add_option("--seed", mb.seed, "Random schedule seed (ignores --blob)");
  mb_cmd->add_option("--max-blobs", mb.max_blobs);

  InfoOptions info;
  auto* info_cmd = app.add_subcommand("info", "Inspect an information measure between two frames");
  info_cmd->add_option("--pair", info.pair, "Two frame files")->expected(2)->required();
  info_cmd->add_option("--measure", info.measure)
      ->check(CLI::IsMember({"surprise", "pmi", "predictability", "ssi"}));
  info_cmd->add_option("--reference", info.reference, "Operand whose samples are scored (a or b)")
      ->check(CLI::IsMember({"a", "b"}));
  info_cmd->add_option("--bins", info.bins);
  info_cmd->add_flag("--ssi-negate", info.ssi_negate);
  info_cmd->add_option("--out", info.out, "Directory for the information field");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCode::invalid_argument);
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (rb_cmd->parsed()) return cmd_gen_rolling_ball(rb);
    if (mb_cmd->parsed()) return cmd_gen_multiblob(mb);
    if (info_cmd->parsed()) return cmd_info(info);
  } catch (const stsum::Error& e) {
    std::cerr << "stsum: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "stsum: internal-error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::internal_error);
  }
  return 0;
}
