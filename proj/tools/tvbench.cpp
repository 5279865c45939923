// tvbench: corpus evaluation, curation and fixture generation.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tvbench/engine.hpp"
#include "tvbench/error.hpp"
#include "tvbench/fixtures.hpp"

namespace fs = std::filesystem;
using namespace tvbench;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct EvalArgs {
  std::string track = "all";
  fs::path corpus;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::size_t> threads;
  bool skip_errors = false;
  bool profile = false;
};

struct CurateArgs {
  fs::path detections;
  std::optional<fs::path> poses;
  std::optional<fs::path> masks;
  fs::path out;
  std::optional<fs::path> config;
  std::optional<int> width;
  std::optional<int> height;
  double fps = 30.0;
};

struct FixtureArgs {
  FixtureOptions options;
  fs::path out;
  bool noisy = false;
  bool no_video = false;
  bool curation = false;
};

TrackSelection parse_track(const std::string& s) {
  if (s == "1") return TrackSelection::kIdentity;
  if (s == "2") return TrackSelection::kInteraction;
  if (s == "3") return TrackSelection::kQuality;
  return TrackSelection::kAll;
}

std::optional<std::size_t> env_threads() {
  const char* v = std::getenv("TVBENCH_THREADS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw Error(ErrorCode::kInvalidArgument, std::string("TVBENCH_THREADS is not a count: ") + v);
  return static_cast<std::size_t>(n);
}

int run_eval(const EvalArgs& a) {
  EngineConfig config = a.config ? load_config(*a.config) : EngineConfig{};
  if (auto n = env_threads()) config.threads = *n;
  if (a.threads) config.threads = *a.threads;
  const std::string ext = a.out.extension().string();
  if (ext == ".csv") config.format = "csv";
  else if (ext == ".json") config.format = "json";

  const auto manifests = io::load_corpus(a.corpus);
  const EvaluationResult result = evaluate_corpus(manifests, parse_track(a.track), config);
  for (const ClipError& e : result.report.errors) {
    std::cerr << "tvbench: " << e.clip << ": " << e.code << ": " << e.message << "\n";
  }
  if (a.profile) std::cout << format_profile(result.timings);
  if (!result.report.errors.empty() && !a.skip_errors) {
    std::cerr << "tvbench: " << result.report.errors.size() << " clip(s) failed; no report written\n";
    return result.internal_error ? kInternal : kData;
  }
  io::write_text(a.out, write_report(result.report, config.format));
  return result.internal_error ? kInternal : kOk;
}

int run_curate(const CurateArgs& a) {
  const EngineConfig config = a.config ? load_config(*a.config) : EngineConfig{};
  const auto inputs = discover_curation_inputs(a.detections, a.poses, a.masks, a.width, a.height, a.fps);
  if (inputs.empty()) throw Error(ErrorCode::kIo, "no .jsonl detection dumps in " + a.detections.string());
  for (const CurationInputs& in : inputs) {
    const CurationOutcome outcome = curate_clip(in, config);
    write_curation(a.out, outcome);
    std::cout << outcome.clip_id << ": " << (outcome.verdict.accepted ? "accepted" : "rejected");
    for (const FilterReason& r : outcome.verdict.reasons) std::cout << "; " << r.message;
    std::cout << "\n";
  }
  return kOk;
}

int run_fixtures(FixtureArgs a) {
  a.options.perfect = !a.noisy;
  a.options.video = !a.no_video;
  const FixtureCorpus corpus = write_fixture_corpus(a.out, a.options);
  std::cout << corpus.corpus.string() << "\n";
  if (a.curation) {
    write_curation_fixtures(a.out / "curation", filter_rule_scenarios(), a.options.seed);
    std::cout << (a.out / "curation").string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-person video generation benchmark engine"};
  app.require_subcommand(1);

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Score a corpus of clip manifests");
  ev->add_option("--track", eval.track, "1, 2, 3 or all")->check(CLI::IsMember({"1", "2", "3", "all"}));
  ev->add_option("--corpus", eval.corpus, "corpus.json listing clip manifests")->required();
  ev->add_option("--config", eval.config, "TOML config file");
  ev->add_option("--out", eval.out, "report path (.json or .csv)")->required();
  ev->add_option("--threads", eval.threads, "worker threads (0 = all cores)");
  ev->add_flag("--skip-errors", eval.skip_errors, "write the report even if some clips fail");
  ev->add_flag("--profile", eval.profile, "print per-clip stage timings");

  CurateArgs cur;
  auto* cu = app.add_subcommand("curate", "Associate tracks, select subjects and filter clips");
  cu->add_option("--detections", cur.detections, "directory of <clip>.jsonl detection dumps")->required();
  cu->add_option("--poses", cur.poses, "directory of <clip>.jsonl pose dumps");
  cu->add_option("--masks", cur.masks, "directory of <clip>/<rank>/ mask sequences");
  cu->add_option("--out", cur.out, "output directory")->required();
  cu->add_option("--config", cur.config, "TOML config file");
  cu->add_option("--frame-width", cur.width, "frame width in pixels")->check(CLI::PositiveNumber);
  cu->add_option("--frame-height", cur.height, "frame height in pixels")->check(CLI::PositiveNumber);
  cu->add_option("--fps", cur.fps, "frame rate stamped on assigned poses")->check(CLI::PositiveNumber);

  FixtureArgs fix;
  auto* gf = app.add_subcommand("gen-fixtures", "Write a synthetic corpus");
  gf->add_option("--seed", fix.options.seed, "generator seed");
  gf->add_option("--out", fix.out, "output directory")->required();
  gf->add_option("--clips", fix.options.clips, "number of clips");
  gf->add_option("--frames", fix.options.frames, "frames per clip")->check(CLI::Range(4, 100000));
  gf->add_option("--width", fix.options.width, "frame width")->check(CLI::Range(32, 8192));
  gf->add_option("--height", fix.options.height, "frame height")->check(CLI::Range(32, 8192));
  gf->add_flag("--noisy", fix.noisy, "perturb predictions instead of copying the ground truth");
  gf->add_flag("--no-video", fix.no_video, "skip frames, masks and features");
  gf->add_flag("--curation", fix.curation, "also write the curation rule suite under <out>/curation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*ev) return run_eval(eval);
    if (*cu) return run_curate(cur);
    return run_fixtures(fix);
  } catch (const Error& e) {
    std::cerr << "tvbench: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kUsage : kData;
  } catch (const std::exception& e) {
    std::cerr << "tvbench: internal error: " << e.what() << "\n";
    return kInternal;
  }
}
