#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "json.hpp"
#include "support.hpp"
#include "tvbench/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" TVBENCH_CLI "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("eval --corpus x.json"), 1);
  EXPECT_EQ(run("eval --track 4 --corpus x.json --out r.json"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, DataErrors) {
  const fs::path dir = tvtest::scratch_dir("cli_data");
  EXPECT_EQ(run("eval --corpus " + q(dir / "missing.json") + " --out " + q(dir / "r.json")), 2);
  tvbench::io::write_text(dir / "bad.toml", "[tracking]\nbogus = 1\n");
  tvbench::io::write_text(dir / "corpus.json", R"({"schema_version":1,"clips":[]})");
  EXPECT_EQ(run("eval --corpus " + q(dir / "corpus.json") + " --config " + q(dir / "bad.toml") + " --out " +
                q(dir / "r.json")),
            2);
  EXPECT_EQ(run("eval --corpus " + q(dir / "corpus.json") + " --out " + q(dir / "r.json"), "TVBENCH_THREADS=abc"), 1);
}

TEST(Cli, EvalWritesReportsAndHonoursSkipErrors) {
  const fs::path dir = tvtest::scratch_dir("cli_eval");
  ASSERT_EQ(run("gen-fixtures --seed 3 --clips 3 --frames 20 --width 48 --height 40 --noisy --out " + q(dir / "fx")), 0);
  const fs::path corpus = dir / "fx" / "corpus.json";
  ASSERT_EQ(run("eval --track all --corpus " + q(corpus) + " --out " + q(dir / "r.json")), 0);
  ASSERT_EQ(run("eval --track 1 --corpus " + q(corpus) + " --out " + q(dir / "r.csv")), 0);
  const std::string csv = tvbench::io::read_text(dir / "r.csv");
  EXPECT_EQ(csv.rfind("clip_id,HOTA", 0), 0u);

  const auto report = nlohmann::json::parse(tvbench::io::read_text(dir / "r.json"));
  EXPECT_EQ(report["clips"].size(), 3u);
  EXPECT_EQ(report["track"], "all");

  tvbench::io::write_text(dir / "fx" / "clip_001" / "pred_poses.json", "[");
  EXPECT_EQ(run("eval --track 2 --corpus " + q(corpus) + " --out " + q(dir / "bad.json")), 2);
  EXPECT_FALSE(fs::exists(dir / "bad.json"));
  EXPECT_EQ(run("eval --track 2 --skip-errors --corpus " + q(corpus) + " --out " + q(dir / "skip.json")), 0);
  const auto skipped = nlohmann::json::parse(tvbench::io::read_text(dir / "skip.json"));
  EXPECT_EQ(skipped["clips"].size(), 2u);
  ASSERT_EQ(skipped["errors"].size(), 1u);
  EXPECT_EQ(skipped["errors"][0]["clip"], "clip_001");
}

TEST(Cli, ThreadsFlagAndEnvironmentGiveIdenticalBytes) {
  const fs::path dir = tvtest::scratch_dir("cli_threads");
  ASSERT_EQ(run("gen-fixtures --seed 4 --clips 3 --frames 16 --width 40 --height 40 --noisy --out " + q(dir / "fx")), 0);
  const std::string corpus = q(dir / "fx" / "corpus.json");
  ASSERT_EQ(run("eval --corpus " + corpus + " --threads 1 --out " + q(dir / "a.json")), 0);
  ASSERT_EQ(run("eval --corpus " + corpus + " --out " + q(dir / "b.json"), "TVBENCH_THREADS=3"), 0);
  EXPECT_EQ(tvbench::io::read_text(dir / "a.json"), tvbench::io::read_text(dir / "b.json"));
}

TEST(Cli, Curate) {
  const fs::path dir = tvtest::scratch_dir("cli_curate");
  ASSERT_EQ(run("gen-fixtures --clips 1 --frames 8 --no-video --curation --out " + q(dir / "fx")), 0);
  const fs::path c = dir / "fx" / "curation";
  ASSERT_EQ(run("curate --detections " + q(c / "d") + " --poses " + q(c / "p") + " --masks " + q(c / "m") + " --out " +
                q(dir / "out")),
            0);
  const auto clean = nlohmann::json::parse(tvbench::io::read_text(dir / "out" / "clean.json"));
  EXPECT_TRUE(clean["verdict"]["accepted"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "out" / "clean.poses.json"));
  const auto single = nlohmann::json::parse(tvbench::io::read_text(dir / "out" / "single_subject.json"));
  EXPECT_FALSE(single["verdict"]["accepted"].get<bool>());
  EXPECT_EQ(single["verdict"]["reasons"][0]["rule"], "subjects");
  EXPECT_EQ(run("curate --detections " + q(dir / "nowhere") + " --out " + q(dir / "out2")), 2);
}
