#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>
#include <set>

#include "stsum/dataset.hpp"
#include "stsum/fusion.hpp"
#include "stsum/generate.hpp"

using namespace stsum;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("stsum_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string frame_name(std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.%s", i, ext);
  return buf;
}

Field random_field(std::mt19937_64& rng, const Shape& s, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(s.size());
  for (auto& x : v) x = static_cast<double>(static_cast<float>(u(rng)));
  return Field(s, std::move(v));
}

DatasetDescriptor desc(const fs::path& root, DatasetFormat format) {
  DatasetDescriptor d;
  d.root = root;
  d.format = format;
  return d;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal_error;
}

std::set<std::tuple<int, int, int>> colours(const Image8& img) {
  std::set<std::tuple<int, int, int>> out;
  for (std::size_t i = 0; i + 2 < img.pixels.size(); i += 3)
    out.insert({img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]});
  return out;
}

}  // namespace

TEST(RawF32, BitExactRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Shape s = t % 2 ? Shape::image(17, 9) : Shape::volume(5, 4, 3);
    const Field f = random_field(rng, s, -1e6, 1e6);
    write_raw_f32(dir / "f.f32", f);
    const Field back = read_raw_f32(dir / "f.f32", s);
    ASSERT_EQ(std::memcmp(f.samples().data(), back.samples().data(), f.size() * sizeof(double)), 0);
  }
}

TEST(RawF32, WrongSizeIsIoError) {
  TempDir dir;
  write_raw_f32(dir / "f.f32", Field::filled(Shape::image(4, 4), 1));
  EXPECT_EQ(code_of([&] { read_raw_f32(dir / "f.f32", Shape::image(5, 4)); }), ErrorCode::io_error);
}

TEST(Pgm, RoundTripAndAscii) {
  TempDir dir;
  std::vector<double> v(12);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i * 20);
  const Field f(Shape::image(4, 3), v);
  write_pgm(dir / "a.pgm", f);
  EXPECT_EQ(read_pgm(dir / "a.pgm"), f);

  std::ofstream(dir / "b.pgm") << "P2\n# comment\n3 1\n255\n0 128 255\n";
  const Field b = read_pgm(dir / "b.pgm");
  EXPECT_EQ(b.shape(), Shape::image(3, 1));
  EXPECT_EQ(b[1], 128.0);
}

TEST(Png, GrayRoundTrip) {
  TempDir dir;
  std::vector<std::uint8_t> px(30 * 20);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i % 251);
  write_png(dir / "g.png", Image8{30, 20, 1, px});
  const Field f = read_png_gray(dir / "g.png");
  ASSERT_EQ(f.shape(), Shape::image(30, 20));
  for (std::size_t i = 0; i < px.size(); ++i) ASSERT_EQ(f[i], px[i]);
}

TEST(ReadSequence, RollingBallPgmFrames) {
  TempDir dir;
  const RollingBall rb = gen_rolling_ball();
  for (std::size_t i = 0; i < rb.frames.size(); ++i) write_pgm(dir / frame_name(i, "pgm"), rb.frames[i]);
  FrameSource src = read_sequence(desc(dir.path(), DatasetFormat::gray_image));
  EXPECT_EQ(src.frame_count(), 19u);
  std::size_t n = 0;
  while (auto r = src.next()) {
    EXPECT_EQ(r->index(), n);
    EXPECT_EQ(r->shape(), Shape::image(800, 400));
    EXPECT_EQ(r->channel("value"), rb.frames[n]);
    ++n;
  }
  EXPECT_EQ(n, 19u);
}

TEST(ReadSequence, RawWithDeclaredShape) {
  TempDir dir;
  std::mt19937_64 rng(2);
  const Shape s = Shape::image(488, 842);
  std::vector<Field> frames;
  for (std::size_t i = 0; i < 3; ++i) {
    frames.push_back(random_field(rng, s, 0, 30));
    write_raw_f32(dir / frame_name(i, "f32"), frames.back());
  }
  FrameSource declared = read_sequence({dir.path(), DatasetFormat::raw_f32, "density", s});
  for (std::size_t i = 0; i < 3; ++i) {
    auto r = declared.next();
    ASSERT_TRUE(r);
    EXPECT_EQ(r->shape(), s);
    EXPECT_EQ(r->channel("density"), frames[i]);
  }
  EXPECT_FALSE(declared.next());

  EXPECT_EQ(code_of([&] { read_sequence(desc(dir.path(), DatasetFormat::raw_f32)); }), ErrorCode::io_error);
  write_sidecar(dir.path(), s);
  FrameSource sidecar = read_sequence(desc(dir.path(), DatasetFormat::raw_f32));
  EXPECT_EQ(sidecar.next()->shape(), s);
}

TEST(ReadSequence, MultiChannelDirectories) {
  TempDir dir;
  fs::create_directories(dir / "red");
  fs::create_directories(dir / "green");
  for (std::size_t i = 0; i < 2; ++i) {
    write_pgm(dir / "red" / frame_name(i, "pgm"), Field::filled(Shape::image(3, 3), 10.0 * i));
    write_pgm(dir / "green" / frame_name(i, "pgm"), Field::filled(Shape::image(3, 3), 5));
  }
  FrameSource src = read_sequence(desc(dir.path(), DatasetFormat::gray_image));
  EXPECT_EQ(src.channel_tags(), (std::vector<std::string>{"green", "red"}));
  src.next();
  const auto r = src.next();
  EXPECT_EQ(r->channel("red")[0], 10.0);

  write_pgm(dir / "green" / frame_name(2, "pgm"), Field::filled(Shape::image(3, 3), 5));
  EXPECT_EQ(code_of([&] { read_sequence(desc(dir.path(), DatasetFormat::gray_image)); }), ErrorCode::io_error);
}

TEST(ReadSequence, Errors) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { read_sequence(desc(dir.path(), DatasetFormat::gray_image)); }), ErrorCode::empty_input);
  EXPECT_EQ(code_of([&] { read_sequence(desc(dir / "missing", DatasetFormat::gray_image)); }), ErrorCode::io_error);

  write_pgm(dir / frame_name(0, "pgm"), Field::filled(Shape::image(4, 4), 0));
  write_pgm(dir / frame_name(1, "pgm"), Field::filled(Shape::image(4, 5), 0));
  FrameSource drift = read_sequence(desc(dir.path(), DatasetFormat::gray_image));
  drift.next();
  EXPECT_EQ(code_of([&] { drift.next(); }), ErrorCode::invalid_sequence);

  std::ofstream(dir / frame_name(1, "pgm")) << "P5\n4 4\n255\nxx";
  FrameSource corrupt = read_sequence(desc(dir.path(), DatasetFormat::gray_image));
  corrupt.next();
  try {
    corrupt.next();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
    EXPECT_NE(std::string(e.what()).find(frame_name(1, "pgm")), std::string::npos);
  }
}

TEST(WriteBundle, RoundTripAndFiles) {
  TempDir dir;
  const RollingBall rb = gen_rolling_ball();
  std::vector<TimestepRecord> recs;
  for (std::size_t i = 1; i <= 17; ++i) recs.emplace_back(i, rb.frames[i]);
  FusionConfig cfg;
  cfg.confidence.threshold = 255;
  const SummaryBundle b = fuse_run(recs, "value", cfg);
  const BundleWriteResult res = write_bundle(b, dir / bundle_dir_name(b));
  EXPECT_EQ(bundle_dir_name(b), "fused_000001_000017");
  EXPECT_FALSE(res.palette_switched);
  for (const auto& f : res.files) EXPECT_TRUE(fs::exists(f)) << f;
  const fs::path bd = dir / bundle_dir_name(b);
  for (const char* name : {"fused_data.f32", "fused_info.f32", "labels.u16", "fused_data.png", "fused_info.png",
                           "labels.png", "bundle.json", "meta.txt"})
    EXPECT_TRUE(fs::exists(bd / name)) << name;

  const SummaryBundle back = read_bundle(bd);
  EXPECT_EQ(back.run_start, 1u);
  EXPECT_EQ(back.run_end, 17u);
  EXPECT_EQ(back.labels, b.labels);
  EXPECT_EQ(back.fused_data, b.fused_data);
  for (std::size_t i = 0; i < b.fused_info.size(); ++i)
    ASSERT_EQ(back.fused_info[i], static_cast<double>(static_cast<float>(b.fused_info[i])));

  const auto img = render_labels(b.labels, {}).image;
  const auto cs = colours(img);
  EXPECT_EQ(cs.size(), 18u);
  EXPECT_TRUE(cs.count({255, 255, 255}));
}

TEST(WriteBundle, IdempotentBundleImageEqualsFrame) {
  TempDir dir;
  std::vector<double> px(40 * 30);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<double>(i % 256);
  const Field f(Shape::image(40, 30), px);
  const SummaryBundle b = fuse_run(std::vector<TimestepRecord>{TimestepRecord(4, f), TimestepRecord(5, f)}, "value", {});
  write_bundle(b, dir.path());
  EXPECT_EQ(read_png_gray(dir / "fused_data.png"), f);
}

TEST(WriteBundle, LongRunSwitchesToContinuous) {
  TempDir dir;
  const Shape s = Shape::image(20, 10);
  std::vector<TimestepRecord> recs;
  for (std::size_t i = 0; i < 170; ++i) {
    std::vector<double> px(s.size(), 0.0);
    px[i] = 255.0;
    recs.emplace_back(i, Field(s, px));
  }
  FusionConfig cfg;
  cfg.confidence.threshold = 255;
  const SummaryBundle b = fuse_run(recs, "value", cfg);
  EXPECT_GT(b.labels.max_label(), Palette::kDiscreteSize);
  const BundleWriteResult res = write_bundle(b, dir.path());
  EXPECT_TRUE(res.palette_switched);

  DirectorySink sink(dir / "out");
  sink.write_fused(b);
  EXPECT_EQ(sink.warnings().size(), 1u);
}

TEST(RenderLabels, Examples) {
  const Shape s = Shape::image(4, 2);
  const auto blank = render_labels(LabelField(s), {}).image;
  EXPECT_EQ(colours(blank), (std::set<std::tuple<int, int, int>>{{255, 255, 255}}));

  const auto three = render_labels(LabelField(s, {0, 1, 2, 0, 1, 2, 0, 0}), {}).image;
  EXPECT_EQ(colours(three).size(), 3u);

  std::vector<std::uint32_t> l(6 * 6, 0);
  for (std::uint32_t k = 1; k <= 33; ++k) l[k] = k;
  const auto r33 = render_labels(LabelField(Shape::image(6, 6), l), {});
  EXPECT_FALSE(r33.switched_to_continuous);
  EXPECT_EQ(colours(r33.image).size(), 34u);

  EXPECT_EQ(code_of([] { render_labels(LabelField(Shape::volume(2, 2, 2)), {}); }), ErrorCode::unsupported_shape);
}

TEST(RenderLabels, Deterministic) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::uint32_t> v(0, 90);
  for (int t = 0; t < 10; ++t) {
    std::vector<std::uint32_t> l(32 * 16);
    for (auto& x : l) x = v(rng);
    const LabelField lf(Shape::image(32, 16), l);
    for (auto mode : {PaletteMode::discrete, PaletteMode::continuous}) {
      const Palette p{mode, {255, 255, 255}};
      ASSERT_EQ(render_labels(lf, p).image, render_labels(lf, p).image);
    }
  }
}

TEST(DirectorySinkTest, KeysAreBitIdentical) {
  TempDir dir;
  std::mt19937_64 rng(4);
  const Field f = random_field(rng, Shape::image(9, 7), -5, 5);
  DirectorySink sink(dir.path(), {}, true);
  sink.write_key(TimestepRecord(12, f.with_tag("value")));
  const fs::path kd = dir / key_dir_name(12);
  EXPECT_EQ(read_raw_f32(kd / "value.f32", read_sidecar(kd), "value"), f.with_tag("value"));
  EXPECT_TRUE(fs::exists(kd / "value.pgm"));
}
