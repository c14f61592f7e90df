// End-to-end exercise of the command-line tool: the full
// datagen -> align -> linaec -> train -> enhance -> eval chain on a scaled-down
// model, plus exit-code and determinism contracts. The binary path comes in
// through the DAEC_BIN compile definition.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "daec/checkpoint.hpp"
#include "daec/scene_gen.hpp"
#include "daec/wav.hpp"

using namespace daec;
namespace fs = std::filesystem;

namespace {

const std::string kRoot = "/tmp/daec_cli_e2e";

int run(const std::string& args) {
  const std::string log = kRoot + "/cmd.log";
  const std::string cmd = std::string("\"") + DAEC_BIN + "\" " + args + " > " +
                          log + " 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  if (code != 0) {
    std::ifstream is(log);
    std::stringstream ss;
    ss << is.rdbuf();
    MESSAGE("command: ", args, "\nexit ", code, "\n", ss.str());
  }
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Scaled-down settings: 17-bin models (32-sample window), 1.5 s scenes with
// all optional defects disabled so every subcommand finishes in seconds.
void write_toy_config(const std::string& path) {
  std::ofstream os(path);
  os << "# end-to-end test settings\n"
        "seed=11\n"
        "corpus.n_speech=4\n"
        "corpus.n_noise=2\n"
        "corpus.n_music=2\n"
        "corpus.clip_min_s=2.0\n"
        "corpus.clip_max_s=3.0\n"
        "scene.duration_s=1.5\n"
        "scene.echo_delay_max_s=0.03\n"
        "scene.silence_min_s=0.1\n"
        "scene.silence_max_s=0.2\n"
        "scene.dropout_prob=0\n"
        "scene.clockdrift_prob=0\n"
        "scene.clip_prob=0\n"
        "scene.pathchange_prob=0\n"
        "scene.spectral_aug_prob=0\n"
        "scene.pitch_aug_prob=0\n"
        "model.n_bins=17\n"
        "model.base_channels=2\n"
        "model.gru_groups=2\n"
        "train.epochs=2\n"
        "train.sequences_per_epoch=4\n"
        "train.batch_size=2\n"
        "train.crop_seconds=0.5\n"
        "train.lr_init=1e-3\n";
}

struct Env {
  std::string cfg;
  Env() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    cfg = kRoot + "/config.txt";
    write_toy_config(cfg);
  }
  std::string path(const std::string& rel) const { return kRoot + "/" + rel; }
};

}  // namespace

TEST_CASE("cli end-to-end chain") {
  Env env;

  // ---- datagen ----
  REQUIRE(run("--config " + env.cfg + " datagen --out " + env.path("scenes") +
              " --n 4") == 0);
  for (const char* d : {"scene-0000", "scene-0001", "scene-0002", "scene-0003"}) {
    CAPTURE(d);
    CHECK(fs::exists(env.path("scenes/" + std::string(d) + "/mic.wav")));
    CHECK(fs::exists(env.path("scenes/" + std::string(d) + "/meta.json")));
  }
  const auto manifest = nlohmann::json::parse(slurp(env.path("scenes/manifest.json")));
  CHECK(manifest["n_scenes"] == 4);
  CHECK(manifest["scenes"].size() == 4);
  int total = 0;
  for (const auto& [cat, n] : manifest["category_counts"].items()) total += n.get<int>();
  CHECK(total == 4);
  const auto prov = nlohmann::json::parse(slurp(env.path("scenes/provenance.json")));
  CHECK(prov["subcommand"] == "datagen");
  CHECK(prov["seed"] == 11);
  CHECK(prov["config_hash"].is_number_unsigned());

  const std::string mic = env.path("scenes/scene-0000/mic.wav");
  const std::string far = env.path("scenes/scene-0000/farend.wav");

  // ---- align ----
  REQUIRE(run("--config " + env.cfg + " align --mic " + mic + " --far " + far +
              " --out " + env.path("delay.csv")) == 0);
  const std::string csv = slurp(env.path("delay.csv"));
  CHECK(csv.rfind("frame_index,delay_frames,msc_peak", 0) == 0);
  CHECK(fs::exists(env.path("delay.csv.provenance.json")));

  // ---- linaec ----
  REQUIRE(run("--config " + env.cfg + " linaec --mic " + mic + " --far " + far +
              " --out " + env.path("err.wav") + " --echo-out " +
              env.path("echo.wav")) == 0);
  const WavData in = read_wav(mic);
  const WavData err = read_wav(env.path("err.wav"));
  CHECK(err.sample_rate_hz == in.sample_rate_hz);
  CHECK(err.samples.size() == in.samples.size());
  CHECK(read_wav(env.path("echo.wav")).samples.size() == in.samples.size());

  // ---- train (two-stage) ----
  REQUIRE(run("--config " + env.cfg + " train --scenes " + env.path("scenes") +
              " --out " + env.path("run")) == 0);
  CHECK(checkpoint_kind(env.path("run/checkpoint.bin")) == "two_stage");
  const std::string tlog = slurp(env.path("run/trainlog.csv"));
  CHECK(tlog.find("epoch,total") != std::string::npos);
  // Two epochs of combined training logged.
  CHECK(tlog.find("\n2,") != std::string::npos);
  CHECK(fs::exists(env.path("run/trainlog.json")));
  CHECK(fs::exists(env.path("run/provenance.json")));

  // ---- train (single-stage) ----
  REQUIRE(run("--config " + env.cfg + " --set model.variant=single --set "
              "train.epochs=1 train --scenes " + env.path("scenes") +
              " --out " + env.path("run_single")) == 0);
  CHECK(checkpoint_kind(env.path("run_single/checkpoint.bin")) == "single_stage");

  // ---- enhance ----
  REQUIRE(run("--config " + env.cfg + " enhance --mic " + mic + " --far " + far +
              " --checkpoint " + env.path("run/checkpoint.bin") + " --out " +
              env.path("enh.wav") + " --mode two_stage --echo-out " +
              env.path("d_hat.wav") + " --error-out " + env.path("e.wav")) == 0);
  CHECK(read_wav(env.path("enh.wav")).samples.size() == in.samples.size());
  CHECK(read_wav(env.path("d_hat.wav")).samples.size() == in.samples.size());
  CHECK(read_wav(env.path("e.wav")).samples.size() == in.samples.size());
  CHECK(fs::exists(env.path("enh.wav.provenance.json")));

  REQUIRE(run("--config " + env.cfg + " enhance --mic " + mic + " --far " + far +
              " --checkpoint " + env.path("run_single/checkpoint.bin") +
              " --out " + env.path("enh_single.wav") + " --mode single") == 0);
  CHECK(read_wav(env.path("enh_single.wav")).samples.size() == in.samples.size());

  // Checkpoint/mode mismatch is an artifact error (exit 3).
  CHECK(run("--config " + env.cfg + " enhance --mic " + mic + " --far " + far +
            " --checkpoint " + env.path("run/checkpoint.bin") + " --out " +
            env.path("bad.wav") + " --mode single") == 3);

  // ---- eval ----
  REQUIRE(run("--config " + env.cfg + " eval --scenes " + env.path("scenes") +
              " --out " + env.path("report") +
              " --pipelines identity,linaec,two_stage,single_stage"
              " --two-stage-ckpt " + env.path("run/checkpoint.bin") +
              " --single-ckpt " + env.path("run_single/checkpoint.bin") +
              " --svg") == 0);
  const auto report = nlohmann::json::parse(slurp(env.path("report/report.json")));
  CHECK(report["pipelines"].size() == 4);
  CHECK(report["scenes"].size() == 4);
  CHECK(report["config_hash"].is_number_unsigned());
  const std::string svg = slurp(env.path("report/report.svg"));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(fs::exists(env.path("report/report.csv")));
  CHECK(fs::exists(env.path("report/provenance.json")));
}

TEST_CASE("cli datagen is seed-deterministic") {
  Env env;
  REQUIRE(run("--config " + env.cfg + " datagen --out " + env.path("a") +
              " --n 2") == 0);
  REQUIRE(run("--config " + env.cfg + " datagen --out " + env.path("b") +
              " --n 2") == 0);
  REQUIRE(run("--config " + env.cfg + " --seed 12 datagen --out " +
              env.path("c") + " --n 2") == 0);

  CHECK(slurp(env.path("a/scene-0000/mic.wav")) ==
        slurp(env.path("b/scene-0000/mic.wav")));
  CHECK(slurp(env.path("a/scene-0001/meta.json")) ==
        slurp(env.path("b/scene-0001/meta.json")));
  CHECK(slurp(env.path("a/scene-0000/mic.wav")) !=
        slurp(env.path("c/scene-0000/mic.wav")));

  // The scene set reads back through the library API.
  const SceneBundle s = read_scene(env.path("a/scene-0000"), 16000);
  CHECK(s.mic.size() == size_t(1.5 * 16000));
}

TEST_CASE("cli reports usage, config, and io failures with distinct codes") {
  Env env;

  CHECK(run("--help") == 0);
  CHECK(run("frobnicate") == 2);                       // unknown subcommand
  CHECK(run("datagen --out " + env.path("x")) == 2);   // missing required --n
  CHECK(run("--set bogus.key=1 datagen --out " + env.path("x") + " --n 1") == 2);
  CHECK(run("--config /tmp/daec_missing_cfg.txt datagen --out " +
            env.path("x") + " --n 1") == 3);
  CHECK(run("--config " + env.cfg + " train --scenes " +
            env.path("no_scenes") + " --out " + env.path("run")) == 3);
  CHECK(run("--config " + env.cfg + " align --mic /tmp/daec_missing.wav --far " +
            env.cfg + " --out " + env.path("d.csv")) == 3);
}
