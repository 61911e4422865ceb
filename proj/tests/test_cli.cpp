#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "stsum/dataset.hpp"

using namespace stsum;

namespace {

struct Result {
  int code;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(STSUM_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("stsum_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& s) const { return (dir_ / s).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MultiblobRunMatchesGroundTruth) {
  ASSERT_EQ(cli("gen multiblob --out " + at("mb") + " --steps 12 --blob 3,10,80,120,10 --blob 6,8,220,120,10").code, 0);
  std::ifstream gt(at("mb/ground_truth.json"));
  const auto truth = nlohmann::json::parse(gt);
  EXPECT_EQ(truth.at("trigger_indices"), nlohmann::json({3, 6, 9, 11}));

  const Result r = cli("run --input " + at("mb") + " --out " + at("out"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("reduction ratio"), std::string::npos);
  const Manifest m = read_manifest(at("out/manifest.json"));
  std::vector<std::size_t> keys;
  for (const auto& e : m.entries)
    if (const auto* k = std::get_if<KeyEntry>(&e)) keys.push_back(k->index);
  EXPECT_EQ(nlohmann::json(keys), truth.at("key_indices"));
  EXPECT_TRUE(fs::exists(at("out/fused_000001_000002/bundle.json")));
  EXPECT_TRUE(fs::exists(at("out/key_000003/value.f32")));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("run --input " + at("x")).code, 2);
  EXPECT_EQ(cli("run --input " + at("x") + " --out " + at("o") + " --trigger sometimes").code, 2);
  EXPECT_EQ(cli("run --input " + at("missing") + " --out " + at("o")).code, 8);
  fs::create_directories(at("empty"));
  EXPECT_EQ(cli("run --input " + at("empty") + " --out " + at("o")).code, 6);
  EXPECT_EQ(cli("gen rolling-ball --out " + at("rb") + " --dx 100").code, 2);
  EXPECT_EQ(cli("gen multiblob --out " + at("mb") + " --blob 0,4,40,50,10 --blob 1,3,55,50,10").code, 9);
  fs::create_directories(at("one"));
  write_pgm(at("one/frame_0000.pgm"), Field::filled(Shape::image(4, 4), 0));
  EXPECT_EQ(cli("run --input " + at("one") + " --out " + at("o2") + " --trigger mi-threshold").code, 2);
}

TEST_F(CliTest, InfoReportsFixtureSurprise) {
  write_pgm(at("x.pgm"), Field(Shape::image(2, 2), {0, 0, 0, 255}));
  write_pgm(at("y.pgm"), Field(Shape::image(2, 2), {0, 0, 255, 255}));
  const Result r = cli("info --pair " + at("x.pgm") + " " + at("y.pgm") + " --bins 2 --reference b");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("mutual_information").get<double>(), 0.31127812445913283, 1e-12);
  EXPECT_NEAR(j.at("max").get<double>(), 0.41503749927884376, 1e-12);
  EXPECT_NEAR(j.at("min").get<double>(), 0.20751874963942185, 1e-12);
}
