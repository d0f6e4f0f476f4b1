#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "objreloc/model_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string output;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(OBJRELOC_TEST_TMP) / "cli" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  CliRun run(const std::string& args) const {
    const fs::path log = dir_ / "log.txt";
    const std::string cmd = std::string("\"") + OBJRELOC_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = slurp(log);
    return r;
  }

  fs::path scene(std::uint64_t seed = 7) const {
    const fs::path s = dir_ / "scene";
    const CliRun r = run("synth --seed " + std::to_string(seed) + " --landmarks 20 --classes 5 --queries 3 --output \"" +
                      s.string() + "\"");
    EXPECT_EQ(r.code, 0) << r.output;
    return s;
  }

  std::string inputs(const fs::path& s) const {
    return "--map \"" + (s / "map.json").string() + "\" --detections \"" + (s / "detections.json").string() +
           "\" --intrinsics \"" + (s / "camera.json").string() + "\" --groundtruth \"" +
           (s / "groundtruth.txt").string() + "\"";
  }

  fs::path dir_;
};

TEST_F(Cli, SynthWritesSceneLayout) {
  const fs::path s = scene();
  for (const char* f : {"map.json", "text.emb", "detections.json", "det.emb", "groundtruth.txt", "camera.json"})
    EXPECT_TRUE(fs::exists(s / f)) << f;
  const CliRun v = run("validate --scene \"" + s.string() + "\"");
  EXPECT_EQ(v.code, 0) << v.output;
}

TEST_F(Cli, LocalizeWritesValidResults) {
  const fs::path s = scene();
  const fs::path out = dir_ / "results.json";
  const CliRun r = run("localize " + inputs(s) + " --matching hybrid --algorithm b-prosac --output \"" + out.string() + "\"");
  EXPECT_TRUE(r.code == 0 || r.code == 2) << r.output;
  ASSERT_TRUE(fs::exists(out));
  const CliRun v = run("validate --results \"" + out.string() + "\"");
  EXPECT_EQ(v.code, 0) << v.output;
  const auto results = objreloc::load_results(out);
  EXPECT_EQ(results.size(), 3u);
  for (const auto& q : results) EXPECT_EQ(q.method, "hybrid_b-prosac");
}

TEST_F(Cli, ClassWithProsacRejected) {
  const fs::path s = scene();
  const CliRun r = run("localize " + inputs(s) + " --matching class --algorithm prosac --output \"" +
                    (dir_ / "r.json").string() + "\"");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("class"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("prosac"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(dir_ / "r.json"));
}

TEST_F(Cli, MissingMapIsAnError) {
  const fs::path s = scene();
  const CliRun r = run("localize --map \"" + (dir_ / "nope.json").string() + "\" --detections \"" +
                    (s / "detections.json").string() + "\" --intrinsics \"" + (s / "camera.json").string() +
                    "\" --output \"" + (dir_ / "r.json").string() + "\"");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("nope.json"), std::string::npos) << r.output;
}

TEST_F(Cli, CorruptEmbeddingReported) {
  const fs::path s = scene();
  {
    std::fstream f(s / "text.emb", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  const CliRun r = run("validate --embeddings \"" + (s / "text.emb").string() + "\"");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("BadMagic"), std::string::npos) << r.output;
  const CliRun m = run("validate --map \"" + (s / "map.json").string() + "\"");
  EXPECT_EQ(m.code, 1) << m.output;
}

TEST_F(Cli, UnknownFlagRejected) {
  const CliRun r = run("localize --frobnicate 3");
  EXPECT_EQ(r.code, 1);
  const CliRun none = run("");
  EXPECT_EQ(none.code, 1);
}

TEST_F(Cli, HelpDocumentsFlags) {
  const CliRun top = run("--help");
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"localize", "bench", "synth", "validate"})
    EXPECT_NE(top.output.find(sub), std::string::npos) << sub;

  const CliRun loc = run("localize --help");
  EXPECT_EQ(loc.code, 0);
  for (const char* flag : {"--map", "--detections", "--intrinsics", "--matching", "--algorithm", "--k",
                           "--iterations", "--iou-threshold", "--confidence-floor", "--seed", "--output"})
    EXPECT_NE(loc.output.find(flag), std::string::npos) << flag;

  const CliRun bench = run("bench --help");
  EXPECT_EQ(bench.code, 0);
  for (const char* flag : {"--scene", "--grid", "--trials", "--success-threshold", "--threads", "--output"})
    EXPECT_NE(bench.output.find(flag), std::string::npos) << flag;
}

TEST_F(Cli, BenchWritesReports) {
  const fs::path s = scene();
  const fs::path out = dir_ / "report";
  const CliRun r = run("bench --scene \"" + s.string() + "\" --grid hybrid_b-prosac,clip_ransac --trials 5 --threads 1 "
                    "--iterations 100 --output \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"table.csv", "success_vs_threshold.csv", "iters_to_best.csv", "raw_rows.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  const auto table = lines_of(slurp(out / "table.csv"));
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[1].rfind("hybrid_b-prosac,hybrid,b-prosac,5,3,", 0), 0u) << table[1];
  EXPECT_EQ(table[2].rfind("clip_ransac,clip,ransac,5,3,", 0), 0u) << table[2];

  // Two methods, 30 thresholds each.
  EXPECT_EQ(lines_of(slurp(out / "success_vs_threshold.csv")).size(), 61u);
  // Two methods, 5 trials, 3 queries.
  EXPECT_EQ(lines_of(slurp(out / "raw_rows.csv")).size(), 31u);
}

TEST_F(Cli, BenchRejectsUnscoredProsac) {
  const fs::path s = scene();
  const CliRun r = run("bench --scene \"" + s.string() + "\" --grid class_prosac --output \"" +
                    (dir_ / "report").string() + "\"");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("class"), std::string::npos) << r.output;
}

TEST_F(Cli, LocalizeDeterministic) {
  const fs::path s = scene();
  auto once = [&](const std::string& name) {
    const fs::path out = dir_ / (name + ".json");
    const CliRun r = run("localize " + inputs(s) + " --seed 11 --output \"" + out.string() + "\"");
    EXPECT_TRUE(r.code == 0 || r.code == 2) << r.output;
    const fs::path stripped = dir_ / (name + "_stripped.json");
    objreloc::save_results(objreloc::load_results(out), stripped, false);
    return slurp(stripped);
  };
  const std::string a = once("a");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, once("b"));
}

TEST_F(Cli, SynthDeterministic) {
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  ASSERT_EQ(run("synth --seed 5 --landmarks 15 --queries 2 --output \"" + a.string() + "\"").code, 0);
  ASSERT_EQ(run("synth --seed 5 --landmarks 15 --queries 2 --output \"" + b.string() + "\"").code, 0);
  for (const char* f : {"map.json", "text.emb", "detections.json", "det.emb", "groundtruth.txt", "camera.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

}  // namespace
