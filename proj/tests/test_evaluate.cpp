#include <cmath>
#include <string>
#include <vector>

#include "daec/evaluate.hpp"
#include "daec/metrics.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace daec;

namespace {

WindowConfig toy_window() {
  WindowConfig wc;
  wc.window_len_samples = 32;
  wc.hop_samples = 16;
  return wc;
}

TwoStageConfig toy_two_stage(uint64_t seed) {
  TwoStageConfig cfg = TwoStageConfig::desk_default(seed);
  for (CruseConfig* c : {&cfg.daec, &cfg.nres}) {
    c->n_bins = 17;
    c->encoder_channels = {2, 2, 2, 2};
    c->gru_groups = 2;
  }
  return cfg;
}

CruseConfig toy_single(uint64_t seed) {
  CruseConfig c = single_stage_desk_config(seed);
  c.n_bins = 17;
  c.encoder_channels = {2, 2, 2, 2};
  c.gru_groups = 2;
  return c;
}

Corpus eval_corpus() {
  CorpusSpec cs;
  cs.n_speech = 4;
  cs.n_noise = 2;
  cs.n_music = 2;
  cs.clip_min_s = 2.0;
  cs.clip_max_s = 3.0;
  return make_synthetic_corpus(cs, 99);
}

SceneConfig base_scene_cfg() {
  SceneConfig sc;
  sc.duration_s = 1.5;
  sc.echo_delay_max_s = 0.03;
  sc.silence_min_s = 0.1;
  sc.silence_max_s = 0.2;
  sc.dropout_prob = 0.0;
  sc.clockdrift_prob = 0.0;
  sc.clip_prob = 0.0;
  sc.pathchange_prob = 0.0;
  sc.spectral_aug_prob = 0.0;
  sc.pitch_aug_prob = 0.0;
  return sc;
}

std::vector<SceneBundle> farend_only_scenes(int n, bool with_noise,
                                            uint64_t seed0) {
  SceneConfig sc = base_scene_cfg();
  sc.doubletalk_prob = 0.0;
  sc.farend_only_prob = 1.0;
  sc.farend_noise_prob = with_noise ? 1.0 : 0.0;
  const Corpus corpus = eval_corpus();
  std::vector<SceneBundle> out;
  for (int i = 0; i < n; ++i)
    out.push_back(generate_scene(corpus, sc, seed0 + i));
  return out;
}

std::vector<SceneBundle> doubletalk_scenes(int n, uint64_t seed0) {
  SceneConfig sc = base_scene_cfg();
  sc.doubletalk_prob = 1.0;
  sc.farend_only_prob = 0.0;
  const Corpus corpus = eval_corpus();
  std::vector<SceneBundle> out;
  for (int i = 0; i < n; ++i)
    out.push_back(generate_scene(corpus, sc, seed0 + i));
  return out;
}

std::vector<SceneBundle> mixed_scenes(int n, uint64_t seed0) {
  SceneConfig sc = base_scene_cfg();  // default 50% DT / 25% FEO / 25% NEO
  const Corpus corpus = eval_corpus();
  std::vector<SceneBundle> out;
  for (int i = 0; i < n; ++i)
    out.push_back(generate_scene(corpus, sc, seed0 + i));
  return out;
}

EvalConfig toy_eval_cfg() {
  EvalConfig cfg;
  cfg.lsd_cfg = toy_window();
  cfg.model_identity = "test-models";
  cfg.config_hash = 0x5eed;
  return cfg;
}

}  // namespace

TEST_CASE("identity pipeline scores zero ERLE on far-end scenes") {
  std::vector<SceneBundle> scenes = farend_only_scenes(3, true, 3001);
  EvalReport r = scenario_eval({identity_pipeline()}, scenes, toy_eval_cfg());

  REQUIRE(r.pipelines.size() == 1);
  REQUIRE(r.pipelines[0].per_scene.size() == 3);
  for (const SceneMetrics& m : r.pipelines[0].per_scene) {
    REQUIRE(m.erle.present);
    CHECK(m.erle.value == 0.0);
    CHECK_FALSE(m.si_sdr.present);
    CHECK(m.si_sdr.reason.find("far-end-only") != std::string::npos);
    CHECK_FALSE(m.lsd.present);
  }
  const AggregateStat& all = r.pipelines[0].erle.at("all");
  CHECK(all.n == 3);
  CHECK(all.mean == 0.0);
  CHECK(all.stddev == 0.0);
}

TEST_CASE("oracle pipeline hits the SI-SDR cap on double-talk scenes") {
  std::vector<SceneBundle> scenes = doubletalk_scenes(3, 3101);
  EvalReport r = scenario_eval({oracle_pipeline(), identity_pipeline()}, scenes,
                               toy_eval_cfg());

  const PipelineReport& oracle = r.pipelines[0];
  const PipelineReport& ident = r.pipelines[1];
  for (int i = 0; i < 3; ++i) {
    REQUIRE(oracle.per_scene[i].si_sdr.present);
    CHECK(oracle.per_scene[i].si_sdr.value == 80.0);  // capped maximum
    CHECK(oracle.per_scene[i].lsd.value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(oracle.per_scene[i].erle.present);
    // The oracle dominates leaving the mic untouched.
    CHECK(oracle.per_scene[i].si_sdr.value >= ident.per_scene[i].si_sdr.value);
  }
  CHECK(oracle.si_sdr.at("category:double-talk").mean == 80.0);
}

TEST_CASE("true echo subtraction reaches the ERLE cap on noise-free scenes") {
  std::vector<SceneBundle> scenes = farend_only_scenes(3, false, 3201);
  for (const SceneBundle& s : scenes) {
    REQUIRE_FALSE(s.meta.has_noise);
  }
  EvalReport r =
      scenario_eval({true_echo_subtractor_pipeline()}, scenes, toy_eval_cfg());
  for (const SceneMetrics& m : r.pipelines[0].per_scene) {
    REQUIRE(m.erle.present);
    CHECK(m.erle.value == 80.0);
  }
}

TEST_CASE("report categories partition the scene set") {
  std::vector<SceneBundle> scenes = mixed_scenes(12, 3301);
  EvalReport r = scenario_eval({identity_pipeline()}, scenes, toy_eval_cfg());

  int total = 0;
  for (const auto& [cat, n] : r.category_counts) {
    CHECK(n > 0);
    total += n;
  }
  CHECK(total == 12);
  // Counts match the generator's own metadata.
  std::map<std::string, int> expect;
  for (const SceneBundle& s : scenes) expect[to_string(s.meta.category)] += 1;
  CHECK(r.category_counts == expect);
  REQUIRE(r.scenes.size() == 12);
  for (size_t i = 0; i < scenes.size(); ++i) {
    CHECK(r.scenes[i].category == to_string(scenes[i].meta.category));
    CHECK(r.scenes[i].challenge_tag == scenes[i].meta.challenge_tag);
  }
}

TEST_CASE("evaluation is deterministic and covers all five system variants") {
  std::vector<SceneBundle> scenes = mixed_scenes(4, 3401);
  TwoStageModel two(toy_two_stage(71));
  SingleStageModel single{CruseModel(toy_single(73))};
  const WindowConfig wc = toy_window();
  const MscConfig mc;
  LinAecConfig lin;

  const std::vector<Pipeline> pipelines = {
      linaec_pipeline(lin),
      linaec_ns_pipeline(lin, single, 0.3, wc, mc),
      single_stage_pipeline(single, 0.3, wc, mc),
      daec_only_pipeline(two, wc, mc),
      two_stage_pipeline(two, wc, mc),
  };
  EvalReport r1 = scenario_eval(pipelines, scenes, toy_eval_cfg());
  EvalReport r2 = scenario_eval(pipelines, scenes, toy_eval_cfg());
  CHECK(r1.to_json() == r2.to_json());

  REQUIRE(r1.pipelines.size() == 5);
  CHECK(r1.pipelines[0].pipeline == "linaec");
  CHECK(r1.pipelines[1].pipeline == "linaec+ns");
  CHECK(r1.pipelines[2].pipeline == "single_stage");
  CHECK(r1.pipelines[3].pipeline == "daec_only");
  CHECK(r1.pipelines[4].pipeline == "two_stage");
  for (const PipelineReport& pr : r1.pipelines) {
    REQUIRE(pr.per_scene.size() == 4);
    for (const SceneMetrics& m : pr.per_scene) {
      CHECK((m.erle.present || !m.erle.reason.empty()));
      if (m.si_sdr.present) CHECK(std::isfinite(m.si_sdr.value));
      if (m.erle.present) CHECK(std::isfinite(m.erle.value));
      if (m.lsd.present) CHECK(std::isfinite(m.lsd.value));
    }
  }
}

TEST_CASE("report serializes to JSON, CSV, and SVG") {
  std::vector<SceneBundle> scenes = mixed_scenes(5, 3501);
  EvalConfig cfg = toy_eval_cfg();
  EvalReport r = scenario_eval({identity_pipeline(), oracle_pipeline()}, scenes, cfg);

  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["model_identity"] == "test-models");
  CHECK(j["config_hash"].get<uint64_t>() == 0x5eed);
  CHECK(j["n_scenes"].get<int>() == 5);
  CHECK(j.contains("external_mos"));
  REQUIRE(j["pipelines"].size() == 2);
  REQUIRE(j["pipelines"][0]["per_scene"].size() == 5);
  // Omitted metrics carry an explicit reason next to the null value.
  bool saw_reason = false;
  for (const auto& row : j["pipelines"][0]["per_scene"]) {
    if (row["erle_db"].is_null()) {
      CHECK(row.contains("erle_db_omitted"));
      saw_reason = true;
    }
  }
  CHECK(saw_reason);

  const std::string csv = r.to_csv();
  CHECK(csv.rfind("pipeline,scene,category,tag,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 5);

  const std::string svg = r.to_svg();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("ERLE (dB)") != std::string::npos);
  CHECK(svg.find("SI-SDR (dB)") != std::string::npos);
  CHECK(svg.find("oracle") != std::string::npos);
}
