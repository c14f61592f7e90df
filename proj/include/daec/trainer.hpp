#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "daec/cruse.hpp"
#include "daec/delay_align.hpp"
#include "daec/losses.hpp"
#include "daec/scene_gen.hpp"
#include "daec/spectral.hpp"
#include "daec/two_stage.hpp"

namespace daec {

// ---- Scene preparation ----
// Scenes are analyzed once: mic and far-end spectra at the processing
// resolution, the far-end delay-aligned with the coherence tracker, and the
// true echo's spectrum for the echo loss. Crops then slice frame ranges, so
// a crop's spectra equal the scene's spectra restricted to those frames.

struct PreparedScene {
  Spectrogram y;          // linear mic spectrum
  Spectrogram u_aligned;  // delay-aligned far-end spectrum
  Spectrogram d;          // linear true-echo spectrum
  std::vector<double> mic, target, echo;
  SceneMeta meta;
};

PreparedScene prepare_scene(const SceneBundle& scene, const WindowConfig& wcfg,
                            const MscConfig& mcfg);

struct SceneCrop {
  Spectrogram y, u, d;
  std::vector<double> mic, target;  // hop-aligned samples covering the frames
};

SceneCrop crop_scene(const PreparedScene& s, int start_frame, int n_frames);

// ---- Training configuration and log ----

enum class PretrainMode { kNone, kDaecFirst };

struct TrainConfig {
  int batch_size = 8;
  int epochs = 50;
  int sequences_per_epoch = 200;
  double lr_init = 3e-4;
  double lr_drop_factor = 0.5;
  int lr_patience_epochs = 20;
  LossWeights weights;
  GammaMode gamma_mode = GammaMode::kAdaptive;
  double fixed_gamma = 0.05;
  PretrainMode pretrain_mode = PretrainMode::kNone;
  int pretrain_epochs = 0;  // echo-only phase length under kDaecFirst
  double grad_clip_norm = 5.0;
  double crop_seconds = 4.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  WindowConfig loss_cfg = loss_window();
  uint64_t seed = 1;

  void validate() const;
  std::string to_text() const;  // canonical key=value form
  uint64_t config_hash() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double total = 0.0, ccmse = 0.0, asym = 0.0, echo_mae = 0.0;
  double gamma = 0.0;      // mean batch echo weight over the epoch
  double val_proxy = 0.0;  // validation score after the epoch's updates
  double lr = 0.0;         // learning rate applied during the epoch
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  uint64_t config_hash = 0;
  uint64_t seed = 0;

  std::string to_csv() const;
  std::string to_json() const;
};

struct TrainResult {
  TrainLog log;
  int best_epoch = -1;  // -1: no epoch ran; model left at its initial state
  double best_score = 0.0;
  bool diverged = false;
  std::string diagnostic;
};

// ---- Differentiable graph the optimizer drives ----
// Adapters wrap the model kinds so one loop trains them all. forward_item
// caches per-slot state that backward_item consumes; infer runs a full
// prepared scene and returns the enhanced samples.

struct ItemOut {
  std::vector<double> s_hat;  // empty when the graph has no speech output
  Spectrogram d_hat_lin;      // empty when the graph has no echo estimate
};

class TrainGraph {
 public:
  virtual ~TrainGraph() = default;
  virtual std::vector<NamedParam> params() = 0;
  virtual void zero_grad() = 0;
  virtual void begin_batch(int n_items) = 0;
  virtual ItemOut forward_item(int slot, const SceneCrop& crop) = 0;
  virtual void backward_item(int slot, const std::vector<double>& g_s_hat,
                             const Spectrogram* g_d_hat_lin) = 0;
  virtual std::vector<double> infer(const PreparedScene& scene) = 0;
  virtual bool has_echo() const = 0;
  virtual double validation_score(const std::vector<PreparedScene>& val) = 0;
};

class TwoStageGraph : public TrainGraph {
 public:
  explicit TwoStageGraph(TwoStageModel& model) : model_(model) {}
  std::vector<NamedParam> params() override { return model_.params(); }
  void zero_grad() override { model_.zero_grad(); }
  void begin_batch(int n_items) override;
  ItemOut forward_item(int slot, const SceneCrop& crop) override;
  void backward_item(int slot, const std::vector<double>& g_s_hat,
                     const Spectrogram* g_d_hat_lin) override;
  std::vector<double> infer(const PreparedScene& scene) override;
  bool has_echo() const override { return true; }
  double validation_score(const std::vector<PreparedScene>& val) override;

 private:
  TwoStageModel& model_;
  std::vector<TwoStageCache> caches_;
};

class SingleStageGraph : public TrainGraph {
 public:
  SingleStageGraph(SingleStageModel& model, double compress_exp)
      : model_(model), c_(compress_exp) {}
  std::vector<NamedParam> params() override { return model_.params(); }
  void zero_grad() override { model_.zero_grad(); }
  void begin_batch(int n_items) override;
  ItemOut forward_item(int slot, const SceneCrop& crop) override;
  void backward_item(int slot, const std::vector<double>& g_s_hat,
                     const Spectrogram* g_d_hat_lin) override;
  std::vector<double> infer(const PreparedScene& scene) override;
  bool has_echo() const override { return false; }
  double validation_score(const std::vector<PreparedScene>& val) override;

 private:
  SingleStageModel& model_;
  double c_;
  std::vector<SingleStageCache> caches_;
};

// The canceller module alone, trained on the echo loss only. Its validation
// score is the negated relative echo error, so "higher is better" still
// drives checkpoint selection and the LR schedule.
class EchoStageGraph : public TrainGraph {
 public:
  EchoStageGraph(CruseModel& daec, double compress_exp)
      : daec_(daec), c_(compress_exp) {}
  std::vector<NamedParam> params() override { return daec_.params(); }
  void zero_grad() override { daec_.zero_grad(); }
  void begin_batch(int n_items) override;
  ItemOut forward_item(int slot, const SceneCrop& crop) override;
  void backward_item(int slot, const std::vector<double>& g_s_hat,
                     const Spectrogram* g_d_hat_lin) override;
  std::vector<double> infer(const PreparedScene& scene) override;
  bool has_echo() const override { return true; }
  double validation_score(const std::vector<PreparedScene>& val) override;

 private:
  struct Slot {
    CruseCache core;
    FeatureMap in;
    Spectrogram d_hat_c;
  };
  CruseModel& daec_;
  double c_;
  std::vector<Slot> slots_;
};

// ---- Loss plan ----
// speech=false trains on the echo term alone with unit weight (the
// pretraining phase); otherwise the combined loss applies with the batch
// echo weight resolved per gamma_mode from batch-aggregated sums.

struct LossPlan {
  bool speech = true;
  GammaMode gamma_mode = GammaMode::kAdaptive;
  double fixed_gamma = 0.05;
};

// ---- Validation proxy ----
// Mean SI-SDR improvement of the output over the mic on double-talk scenes
// plus 0.5 x mean segmental ERLE on far-end-only scenes. Categories missing
// from the set contribute zero. Signal edges shortened by synthesis
// windowing are excluded on both sides of every comparison.

struct ProxyBreakdown {
  double dt_si_sdr_gain = 0.0;
  double feo_seg_erle = 0.0;
  int n_dt = 0, n_feo = 0;
  double value = 0.0;
};

ProxyBreakdown validation_proxy(
    const std::vector<PreparedScene>& val,
    const std::function<std::vector<double>(const PreparedScene&)>& infer);

// ---- Optimizer ----

class Adam {
 public:
  Adam(double beta1, double beta2, double eps) : b1_(beta1), b2_(beta2), eps_(eps) {}
  // One update from the gradients currently held in the parameters.
  void step(const std::vector<NamedParam>& params, double lr);

 private:
  double b1_, b2_, eps_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// ---- Training loops ----

// Runs the optimization and leaves the graph's parameters at the best
// validation score seen (the initial state when no epoch ran). On a
// non-finite loss or gradient the run aborts, the parameters roll back to
// the best finite state, and the result carries a diagnostic.
TrainResult train(TrainGraph& graph, const std::vector<PreparedScene>& train_scenes,
                  const std::vector<PreparedScene>& val_scenes,
                  const TrainConfig& cfg, const LossPlan& plan);

// Echo-only phase on the canceller module of a two-stage model; afterwards
// every module remains trainable for the subsequent combined run.
TrainResult pretrain_daec(TwoStageModel& model,
                          const std::vector<PreparedScene>& train_scenes,
                          const std::vector<PreparedScene>& val_scenes,
                          const TrainConfig& cfg);

// Mean relative echo error sum|D_hat - D| / sum|D| of the canceller over
// whole prepared scenes (pretraining's progress measure).
double relative_echo_error(CruseModel& daec, double compress_exp,
                           const std::vector<PreparedScene>& scenes);

// ---- Ablation arms ----

enum class TrainArm { kAdaptiveAsym, kAdaptiveNoAsym, kFixed, kPretrainFixed };

const char* to_string(TrainArm arm);
TrainArm train_arm_from_string(const std::string& s);

// Applies one arm's loss settings / pretrain split to a base config and
// runs it on the model. Arms share the base budget: the pretrain arm spends
// cfg.pretrain_epochs of cfg.epochs on the echo-only phase.
TrainResult run_arm(TwoStageModel& model, TrainArm arm,
                    const std::vector<PreparedScene>& train_scenes,
                    const std::vector<PreparedScene>& val_scenes,
                    const TrainConfig& base_cfg);

}  // namespace daec
