#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "daec/delay_align.hpp"
#include "daec/linaec.hpp"
#include "daec/scene_gen.hpp"
#include "daec/two_stage.hpp"

namespace daec {

// ---- Pipelines under evaluation ----
// A pipeline maps a scene to enhanced samples (length <= the mic signal;
// the tail is what synthesis windowing could not cover). Model-backed
// factories capture their models by reference; keep them alive for the
// report's lifetime.

struct Pipeline {
  std::string name;
  std::function<std::vector<double>(const SceneBundle&)> run;
};

Pipeline identity_pipeline();                // out = mic
Pipeline oracle_pipeline();                  // out = near-end target
Pipeline true_echo_subtractor_pipeline();    // out = mic - true echo
Pipeline linaec_pipeline(const LinAecConfig& cfg);
// Linear canceller followed by the one-model enhancer reading the error
// signal in place of the mic (its noise-suppression role).
Pipeline linaec_ns_pipeline(const LinAecConfig& lin_cfg, SingleStageModel& ns,
                            double compress_exp, const WindowConfig& wcfg,
                            const MscConfig& mcfg);
Pipeline single_stage_pipeline(SingleStageModel& model, double compress_exp,
                               const WindowConfig& wcfg, const MscConfig& mcfg);
// First stage only: the echo-subtracted error signal, no suppression.
Pipeline daec_only_pipeline(TwoStageModel& model, const WindowConfig& wcfg,
                            const MscConfig& mcfg);
Pipeline two_stage_pipeline(TwoStageModel& model, const WindowConfig& wcfg,
                            const MscConfig& mcfg);

// ---- Report ----

// A metric either holds a value or records why it does not apply.
struct MetricValue {
  bool present = false;
  double value = 0.0;
  std::string reason;  // set iff !present
};

struct SceneMetrics {
  MetricValue erle;    // far-end-only scenes
  MetricValue si_sdr;  // scenes with a near-end target
  MetricValue lsd;     // scenes with a near-end target
};

struct AggregateStat {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct SceneInfo {
  std::string id;  // "scene-<seed>"
  std::string category;
  std::string challenge_tag;
};

struct PipelineReport {
  std::string pipeline;
  std::vector<SceneMetrics> per_scene;  // parallel to EvalReport::scenes
  // Keyed "all", "category:<name>", "tag:<name>"; only present values enter.
  std::map<std::string, AggregateStat> erle, si_sdr, lsd;
};

struct EvalReport {
  std::string model_identity;
  uint64_t config_hash = 0;
  std::vector<SceneInfo> scenes;
  std::map<std::string, int> category_counts;  // partition of the scene set
  std::vector<PipelineReport> pipelines;

  std::string to_json() const;  // full report, incl. omission reasons
  std::string to_csv() const;   // per-scene wide table
  std::string to_svg() const;   // per-category mean bars, one panel per metric
};

struct EvalConfig {
  WindowConfig lsd_cfg = processing_window();  // analysis for the LSD metric
  std::string model_identity;
  uint64_t config_hash = 0;
};

// Runs every pipeline over every scene and aggregates mean +- std per
// primary category and challenge tag. Deterministic per (pipelines, scenes).
EvalReport scenario_eval(const std::vector<Pipeline>& pipelines,
                         const std::vector<SceneBundle>& scenes,
                         const EvalConfig& cfg);

}  // namespace daec
