#pragma once

#include <string>
#include <vector>

#include "daec/corpus.hpp"
#include "daec/rng.hpp"

namespace daec {

struct NormalDist {
  double mean = 0.0;
  double stddev = 1.0;
  double sample(Rng& rng) const { return rng.normal(mean, stddev); }
};

struct SceneConfig {
  int sample_rate_hz = 16000;
  double duration_s = 20.0;
  NormalDist snr_db_dist{5.0, 10.0};
  NormalDist ser_db_dist{0.0, 10.0};
  NormalDist mic_level_dbfs_dist{-26.0, 10.0};
  double early_boundary_ms = 50.0;
  double silence_min_s = 3.0;
  double silence_max_s = 15.0;
  double dropout_prob = 0.10;
  double clockdrift_prob = 0.20;
  double clockdrift_std_sps = 0.5;  // samples per second
  double clip_prob = 0.20;
  double pathchange_prob = 0.20;
  int max_pathchanges = 2;
  double echo_delay_max_s = 0.5;
  NormalDist direct_gain_db_dist{12.0, 5.0};
  double t60_match_ms = 100.0;
  double spectral_aug_prob = 0.80;
  double pitch_aug_prob = 0.20;
  // Scenario mix (not from the source recipe; remainder is near-end only).
  double doubletalk_prob = 0.50;
  double farend_only_prob = 0.25;
  double farend_noise_prob = 0.50;  // chance of noise on far-end-only scenes
  // Synthetic room draw.
  double t60_min_ms = 150.0;
  double t60_max_ms = 500.0;

  void validate() const;
  size_t n_samples() const { return static_cast<size_t>(duration_s * sample_rate_hz); }
};

struct Rir {
  std::vector<double> taps;
  double t60_ms = 0.0;
  int direct_index = 0;
};

// Exponentially decaying seeded noise tail behind a dominant direct tap;
// energy decay reaches -60 dB at t60.
Rir synth_rir(double t60_ms, double length_ms, double direct_delay_ms,
              int sample_rate_hz, uint64_t seed);

struct SplitRir {
  Rir early;
  Rir late;
};

// Tap-wise partition at direct + boundary; early + late == rir exactly.
// boundary_ms is relative to the direct path and must not exceed the RIR
// duration.
SplitRir split_rir(const Rir& rir, double boundary_ms, int sample_rate_hz);

enum class ClipKind { kSigmoid, kRectifier };

// Memoryless loudspeaker nonlinearity. Sigmoid: tanh(g x)/g with drive gain
// g = param (slope 1 at the origin). Rectifier: one-sided clamp min(x, param).
std::vector<double> apply_nonlinearity(const std::vector<double>& u, ClipKind kind,
                                       double param);

struct NonlinDraw {
  ClipKind kind;
  double param;
};

// Random parameters in the documented ranges: sigmoid gain in [2, 8],
// rectifier threshold in [0.3, 0.9].
NonlinDraw draw_nonlinearity(Rng& rng);

// Linear-interpolation resampling by the given rate (output[i] = u(i*rate));
// output length changes accordingly.
std::vector<double> clock_drift(const std::vector<double>& u, double rate);

// Random signal portions concatenated to scene length; one silence region is
// zeroed; optional dropouts. Clipping and clock drift are only *decided* here
// (recorded in the plan) and applied along the echo path, so the returned
// reference stays clean of them.
struct FarendBuild {
  std::vector<double> samples;
  double silence_start_s = 0.0;
  double silence_dur_s = 0.0;
  bool dropouts = false;
  int n_dropouts = 0;
  bool clip = false;
  ClipKind clip_kind = ClipKind::kSigmoid;
  double clip_param = 0.0;
  bool drift = false;
  double drift_rate = 1.0;
};

FarendBuild build_farend(const Corpus& corpus, const SceneConfig& cfg, uint64_t seed);

struct PathSegment {
  size_t start_sample = 0;
  size_t end_sample = 0;
  double delay_s = 0.0;
  double direct_gain_db = 0.0;
  double t60_ms = 0.0;
};

struct EchoPathEffects {
  bool clip = false;
  ClipKind clip_kind = ClipKind::kSigmoid;
  double clip_param = 4.0;
  bool drift = false;
  double drift_rate = 1.0;
  bool augment_eir = true;  // delay shift, direct gain, bandpass per segment
};

struct EchoBuild {
  std::vector<double> echo;
  std::vector<PathSegment> schedule;
};

// d = eir * Q{drift{u}} per schedule segment, crossfaded (<= 20 ms) at path
// changes. eirs supplies one base response per segment (reused cyclically if
// short).
EchoBuild build_echo(const std::vector<double>& u, const std::vector<Rir>& eirs,
                     const SceneConfig& cfg, uint64_t seed,
                     const EchoPathEffects& fx);

// Random low-order EQ: 1-3 cookbook sections with gains within +-6 dB.
std::vector<double> spectral_shape_aug(const std::vector<double>& x, int sample_rate_hz,
                                       uint64_t seed);

// Resampling pitch shift within +-2 semitones, length restored by pad/trim.
std::vector<double> pitch_aug(const std::vector<double>& x, uint64_t seed);

enum class SceneCategory { kNearEndOnly, kFarEndOnly, kDoubleTalk };

const char* to_string(SceneCategory c);
SceneCategory scene_category_from_string(const std::string& s);

struct SceneMeta {
  uint64_t seed = 0;
  SceneCategory category = SceneCategory::kDoubleTalk;
  std::string challenge_tag;  // clean|noise|volume-change|long-delay|nonlinear|glitch
  double target_snr_db = 0.0, realized_snr_db = 0.0;
  double target_ser_db = 0.0, realized_ser_db = 0.0;
  double target_mic_dbfs = 0.0, realized_mic_dbfs = 0.0;
  bool has_noise = false, has_echo = false, has_speech = false;
  double t60_speech_ms = 0.0, t60_echo_ms = 0.0;
  std::vector<PathSegment> path_schedule;
  double silence_start_s = 0.0, silence_dur_s = 0.0;
  bool dropouts = false;
  int n_dropouts = 0;
  bool farend_clip = false;
  std::string clip_kind;
  bool farend_drift = false;
  double drift_rate = 1.0;
  bool speech_spectral_aug = false, speech_pitch_aug = false;
  bool noise_spectral_aug = false, noise_pitch_aug = false;
};

// All component signals share the scene length and satisfy
// mic == target + late_reverb + noise + echo sample-wise by construction.
struct SceneBundle {
  std::vector<double> mic, target, late_reverb, noise, echo, farend;
  SceneMeta meta;
};

SceneBundle generate_scene(const Corpus& corpus, const SceneConfig& cfg, uint64_t seed);

// Per-scene directory: mic/target/echo/farend/noise WAVs plus meta.json.
void write_scene(const SceneBundle& scene, const std::string& dir, int sample_rate_hz);
SceneBundle read_scene(const std::string& dir, int expected_sample_rate_hz);

}  // namespace daec
