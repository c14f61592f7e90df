#include "daec/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "daec/error.hpp"
#include "daec/fft.hpp"
#include "daec/filters.hpp"
#include "daec/metrics.hpp"
#include "daec/wav.hpp"
#include "json.hpp"

namespace daec {

namespace fs = std::filesystem;
using nlohmann::json;

void SceneConfig::validate() const {
  require(sample_rate_hz > 0 && duration_s > 0.0, "scene dimensions must be positive");
  for (double p : {dropout_prob, clockdrift_prob, clip_prob, pathchange_prob,
                   spectral_aug_prob, pitch_aug_prob, doubletalk_prob,
                   farend_only_prob, farend_noise_prob}) {
    require(p >= 0.0 && p <= 1.0, "probabilities must lie in [0, 1]");
  }
  require(doubletalk_prob + farend_only_prob <= 1.0, "scenario mix exceeds 1");
  require(silence_min_s > 0.0 && silence_max_s >= silence_min_s,
          "silence range invalid");
  require(silence_min_s < duration_s, "silence longer than the scene");
  require(t60_min_ms > 0.0 && t60_max_ms >= t60_min_ms, "t60 range invalid");
  require(early_boundary_ms > 0.0 && early_boundary_ms < 1.5 * t60_min_ms,
          "early boundary outside the synthesized response");
  require(max_pathchanges >= 0, "max_pathchanges negative");
  require(echo_delay_max_s >= 0.0, "echo delay negative");
}

Rir synth_rir(double t60_ms, double length_ms, double direct_delay_ms,
              int sample_rate_hz, uint64_t seed) {
  require(t60_ms > 0.0, "t60 must be positive");
  require(length_ms > 0.0 && direct_delay_ms >= 0.0, "rir geometry invalid");
  const int fs = sample_rate_hz;
  const int len = std::max(1, static_cast<int>(length_ms * fs / 1000.0));
  const int direct = static_cast<int>(direct_delay_ms * fs / 1000.0);
  require(direct < len, "direct delay beyond rir length");
  Rir rir;
  rir.taps.assign(len, 0.0);
  rir.t60_ms = t60_ms;
  rir.direct_index = direct;
  Rng rng(derive_seed(seed, 0x5172));
  const double t60_samples = t60_ms * fs / 1000.0;
  // Amplitude envelope reaching -60 dB in energy at t60.
  const double decay = 3.0 * std::log(10.0) / t60_samples;
  for (int i = direct + 1; i < len; ++i) {
    rir.taps[i] = rng.uniform(-1.0, 1.0) * std::exp(-decay * (i - direct));
  }
  rir.taps[direct] = 1.5;  // strictly dominant direct tap
  return rir;
}

SplitRir split_rir(const Rir& rir, double boundary_ms, int sample_rate_hz) {
  const double dur_ms = 1000.0 * static_cast<double>(rir.taps.size()) / sample_rate_hz;
  require(boundary_ms >= 0.0 && boundary_ms <= dur_ms, "split boundary beyond rir duration");
  const size_t cut = std::min(
      rir.taps.size(),
      static_cast<size_t>(rir.direct_index) +
          static_cast<size_t>(boundary_ms * sample_rate_hz / 1000.0));
  SplitRir out;
  out.early = rir;
  out.late = rir;
  std::fill(out.early.taps.begin() + cut, out.early.taps.end(), 0.0);
  std::fill(out.late.taps.begin(), out.late.taps.begin() + cut, 0.0);
  return out;
}

std::vector<double> apply_nonlinearity(const std::vector<double>& u, ClipKind kind,
                                       double param) {
  require(param > 0.0, "nonlinearity parameter must be positive");
  std::vector<double> y(u.size());
  if (kind == ClipKind::kSigmoid) {
    for (size_t i = 0; i < u.size(); ++i) y[i] = std::tanh(param * u[i]) / param;
  } else {
    for (size_t i = 0; i < u.size(); ++i) y[i] = std::min(u[i], param);
  }
  return y;
}

NonlinDraw draw_nonlinearity(Rng& rng) {
  NonlinDraw d;
  if (rng.chance(0.5)) {
    d.kind = ClipKind::kSigmoid;
    d.param = rng.uniform(2.0, 8.0);
  } else {
    d.kind = ClipKind::kRectifier;
    d.param = rng.uniform(0.3, 0.9);
  }
  return d;
}

std::vector<double> clock_drift(const std::vector<double>& u, double rate) {
  require(std::abs(rate - 1.0) < 1e-3, "drift rate out of the modeled range");
  return linear_resample(u, rate);
}

namespace {

// Copies random portions of random clips into out[pos..], contiguously when
// gap range is empty, with pauses otherwise.
void concat_portions(const std::vector<CorpusClip>& clips, Rng& rng,
                     std::vector<double>& out, double portion_min_s,
                     double portion_max_s, double gap_min_s, double gap_max_s,
                     int fs) {
  size_t pos = 0;
  while (pos < out.size()) {
    const CorpusClip& clip = clips[rng.randint(0, static_cast<int>(clips.size()) - 1)];
    const size_t clip_len = clip.samples.size();
    if (clip_len == 0) continue;
    size_t want = static_cast<size_t>(rng.uniform(portion_min_s, portion_max_s) * fs);
    want = std::min({want, clip_len, out.size() - pos});
    if (want == 0) want = std::min(clip_len, out.size() - pos);
    const size_t start =
        clip_len > want ? static_cast<size_t>(rng.randint(0, static_cast<int>(clip_len - want))) : 0;
    std::copy(clip.samples.begin() + start, clip.samples.begin() + start + want,
              out.begin() + pos);
    pos += want;
    if (gap_max_s > 0.0) pos += static_cast<size_t>(rng.uniform(gap_min_s, gap_max_s) * fs);
  }
}

std::vector<double> pick_material(const Corpus& corpus, Rng& rng, bool allow_music,
                                  size_t n, int fs) {
  std::vector<double> out(n, 0.0);
  size_t pos = 0;
  while (pos < n) {
    const bool use_music = allow_music && !corpus.music.empty() && rng.chance(0.3);
    const auto& clips = use_music ? corpus.music : corpus.speech;
    const CorpusClip& clip = clips[rng.randint(0, static_cast<int>(clips.size()) - 1)];
    if (clip.samples.empty()) continue;
    size_t want = static_cast<size_t>(rng.uniform(3.0, 8.0) * fs);
    want = std::min({want, clip.samples.size(), n - pos});
    if (want == 0) want = std::min(clip.samples.size(), n - pos);
    const size_t start = clip.samples.size() > want
                             ? static_cast<size_t>(rng.randint(
                                   0, static_cast<int>(clip.samples.size() - want)))
                             : 0;
    std::copy(clip.samples.begin() + start, clip.samples.begin() + start + want,
              out.begin() + pos);
    pos += want;
  }
  return out;
}

}  // namespace

FarendBuild build_farend(const Corpus& corpus, const SceneConfig& cfg, uint64_t seed) {
  require(!corpus.speech.empty(), "far-end source corpus is empty");
  cfg.validate();
  const int fs = cfg.sample_rate_hz;
  const size_t n = cfg.n_samples();
  Rng rng(derive_seed(seed, 0xFA3E));

  FarendBuild fb;
  fb.samples = pick_material(corpus, rng, /*allow_music=*/true, n, fs);

  // One silence period, always present.
  const double max_sil = std::min(cfg.silence_max_s, 0.75 * cfg.duration_s);
  fb.silence_dur_s = rng.uniform(cfg.silence_min_s, std::max(cfg.silence_min_s, max_sil));
  fb.silence_start_s = rng.uniform(0.0, cfg.duration_s - fb.silence_dur_s);
  const size_t s0 = static_cast<size_t>(fb.silence_start_s * fs);
  const size_t s1 = std::min(n, s0 + static_cast<size_t>(fb.silence_dur_s * fs));
  std::fill(fb.samples.begin() + s0, fb.samples.begin() + s1, 0.0);

  if (rng.chance(cfg.dropout_prob)) {
    fb.dropouts = true;
    fb.n_dropouts = rng.randint(1, 5);
    for (int i = 0; i < fb.n_dropouts; ++i) {
      const size_t gap = static_cast<size_t>(rng.uniform(0.010, 0.100) * fs);
      const size_t at = static_cast<size_t>(rng.uniform(0.0, cfg.duration_s) * fs);
      std::fill(fb.samples.begin() + std::min(at, n),
                fb.samples.begin() + std::min(at + gap, n), 0.0);
    }
  }

  // Decisions only; both effects act on the echo-path copy so that the
  // reference/echo mismatch actually exists.
  if (rng.chance(cfg.clockdrift_prob)) {
    fb.drift = true;
    double rate = 1.0 + rng.normal(0.0, cfg.clockdrift_std_sps) / fs;
    fb.drift_rate = std::clamp(rate, 1.0 - 5e-4, 1.0 + 5e-4);
  }
  if (rng.chance(cfg.clip_prob)) {
    fb.clip = true;
    const NonlinDraw d = draw_nonlinearity(rng);
    fb.clip_kind = d.kind;
    fb.clip_param = d.param;
  }
  return fb;
}

EchoBuild build_echo(const std::vector<double>& u, const std::vector<Rir>& eirs,
                     const SceneConfig& cfg, uint64_t seed,
                     const EchoPathEffects& fx) {
  require(!eirs.empty(), "need at least one echo impulse response");
  const size_t n = u.size();
  const int fs = cfg.sample_rate_hz;
  Rng rng(derive_seed(seed, 0xEC40));

  std::vector<double> up = u;
  if (fx.clip) up = apply_nonlinearity(up, fx.clip_kind, fx.clip_param);
  if (fx.drift) {
    up = clock_drift(up, fx.drift_rate);
    up.resize(n, 0.0);
  }

  // Path schedule.
  int n_changes = 0;
  if (cfg.max_pathchanges > 0 && rng.chance(cfg.pathchange_prob)) {
    n_changes = rng.randint(1, cfg.max_pathchanges);
  }
  std::vector<size_t> changes;
  for (int i = 0; i < n_changes; ++i) {
    changes.push_back(static_cast<size_t>(rng.uniform(0.15, 0.85) * n));
  }
  std::sort(changes.begin(), changes.end());
  const size_t min_gap = static_cast<size_t>(fs);  // 1 s between changes
  std::vector<size_t> kept;
  for (size_t c : changes) {
    if (kept.empty() || c - kept.back() >= min_gap) kept.push_back(c);
  }

  EchoBuild out;
  out.echo.assign(n, 0.0);
  std::vector<std::vector<double>> renders;
  size_t seg_start = 0;
  for (size_t i = 0; i <= kept.size(); ++i) {
    const size_t seg_end = i < kept.size() ? kept[i] : n;
    const Rir& base = eirs[i % eirs.size()];
    std::vector<double> taps = base.taps;
    PathSegment seg;
    seg.start_sample = seg_start;
    seg.end_sample = seg_end;
    seg.t60_ms = base.t60_ms;
    if (fx.augment_eir) {
      seg.delay_s = rng.uniform(0.0, cfg.echo_delay_max_s);
      seg.direct_gain_db = cfg.direct_gain_db_dist.sample(rng);
      taps[base.direct_index] *= std::pow(10.0, seg.direct_gain_db / 20.0);
      const double f0 = std::exp(rng.uniform(std::log(500.0), std::log(3000.0)));
      const double q = rng.uniform(0.4, 0.8);
      taps = apply_biquads(taps, {design_bandpass(f0, q, fs)});
      const size_t delay = static_cast<size_t>(seg.delay_s * fs);
      taps.insert(taps.begin(), delay, 0.0);
    }
    std::vector<double> d = fft_convolve(up, taps);
    d.resize(n, 0.0);
    renders.push_back(std::move(d));
    out.schedule.push_back(seg);
    seg_start = seg_end;
  }

  // Stitch renders with raised-cosine crossfades at change points.
  const size_t xfade = static_cast<size_t>(0.020 * fs);
  for (size_t i = 0; i < renders.size(); ++i) {
    const size_t a = out.schedule[i].start_sample;
    const size_t b = out.schedule[i].end_sample;
    for (size_t t = a; t < b; ++t) out.echo[t] = renders[i][t];
  }
  for (size_t i = 1; i < renders.size(); ++i) {
    const size_t c = out.schedule[i].start_sample;
    const size_t half = std::min(xfade / 2, c);
    const size_t lo = c - half;
    const size_t hi = std::min(n, c + xfade / 2);
    const size_t span = hi - lo;
    for (size_t t = lo; t < hi; ++t) {
      const double th = M_PI * static_cast<double>(t - lo) / std::max<size_t>(1, span);
      const double w_new = 0.5 - 0.5 * std::cos(th);
      out.echo[t] = (1.0 - w_new) * renders[i - 1][t] + w_new * renders[i][t];
    }
  }
  return out;
}

std::vector<double> spectral_shape_aug(const std::vector<double>& x, int sample_rate_hz,
                                       uint64_t seed) {
  Rng rng(derive_seed(seed, 0x50EC));
  const int n_sections = rng.randint(1, 3);
  std::vector<Biquad> sections;
  for (int i = 0; i < n_sections; ++i) {
    const double gain = rng.uniform(-6.0, 6.0);
    const double q = rng.uniform(0.5, 1.5);
    const int kind = rng.randint(0, 2);
    if (kind == 0) {
      const double f0 = std::exp(rng.uniform(std::log(150.0), std::log(6000.0)));
      sections.push_back(design_peaking(f0, q, gain, sample_rate_hz));
    } else if (kind == 1) {
      const double f0 = std::exp(rng.uniform(std::log(200.0), std::log(2000.0)));
      sections.push_back(design_low_shelf(f0, q, gain, sample_rate_hz));
    } else {
      const double f0 = std::exp(rng.uniform(std::log(1000.0), std::log(6000.0)));
      sections.push_back(design_high_shelf(f0, q, gain, sample_rate_hz));
    }
  }
  return apply_biquads(x, sections);
}

std::vector<double> pitch_aug(const std::vector<double>& x, uint64_t seed) {
  Rng rng(derive_seed(seed, 0x717C));
  double semis = rng.uniform(-2.0, 2.0);
  if (std::abs(semis) < 0.25) semis = semis < 0.0 ? -0.25 : 0.25;
  const double rate = std::pow(2.0, semis / 12.0);
  std::vector<double> y = linear_resample(x, rate);
  y.resize(x.size(), 0.0);
  return y;
}

const char* to_string(SceneCategory c) {
  switch (c) {
    case SceneCategory::kNearEndOnly: return "near-end-only";
    case SceneCategory::kFarEndOnly: return "far-end-only";
    case SceneCategory::kDoubleTalk: return "double-talk";
  }
  return "unknown";
}

SceneCategory scene_category_from_string(const std::string& s) {
  if (s == "near-end-only") return SceneCategory::kNearEndOnly;
  if (s == "far-end-only") return SceneCategory::kFarEndOnly;
  if (s == "double-talk") return SceneCategory::kDoubleTalk;
  throw ConfigError("unknown scene category: " + s);
}

namespace {

std::string pick_challenge_tag(const SceneMeta& m) {
  // Priority order: the rarest, most disruptive condition labels the scene.
  if (m.dropouts) return "glitch";
  if (m.farend_clip) return "nonlinear";
  for (const PathSegment& s : m.path_schedule) {
    if (s.delay_s >= 0.25) return "long-delay";
  }
  if (m.path_schedule.size() > 1) return "volume-change";
  if (m.has_noise) return "noise";
  return "clean";
}

double power_db(double p) { return 10.0 * std::log10(std::max(p, 1e-300)); }

std::vector<double> sum_signals(const std::vector<double>& a,
                                const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

}  // namespace

SceneBundle generate_scene(const Corpus& corpus, const SceneConfig& cfg, uint64_t seed) {
  cfg.validate();
  corpus.validate();
  const int fs = cfg.sample_rate_hz;
  require(corpus.sample_rate_hz == fs, "corpus/scene sample rate mismatch");
  const size_t n = cfg.n_samples();
  Rng rng(derive_seed(seed, 0x5CE7E));

  SceneBundle sc;
  sc.meta.seed = seed;
  const double cat_draw = rng.uniform();
  if (cat_draw < cfg.doubletalk_prob) {
    sc.meta.category = SceneCategory::kDoubleTalk;
  } else if (cat_draw < cfg.doubletalk_prob + cfg.farend_only_prob) {
    sc.meta.category = SceneCategory::kFarEndOnly;
  } else {
    sc.meta.category = SceneCategory::kNearEndOnly;
  }
  sc.meta.has_speech = sc.meta.category != SceneCategory::kFarEndOnly;
  sc.meta.has_echo = sc.meta.category != SceneCategory::kNearEndOnly;
  sc.meta.has_noise = sc.meta.category == SceneCategory::kFarEndOnly
                          ? rng.chance(cfg.farend_noise_prob)
                          : true;

  const double t60_room = rng.uniform(cfg.t60_min_ms, cfg.t60_max_ms);
  sc.meta.t60_speech_ms = t60_room;

  sc.target.assign(n, 0.0);
  sc.late_reverb.assign(n, 0.0);
  if (sc.meta.has_speech) {
    std::vector<double> speech(n, 0.0);
    Rng srng = rng.fork(1);
    concat_portions(corpus.speech, srng, speech, 2.0, 6.0, 0.3, 1.5, fs);
    if (rng.chance(cfg.spectral_aug_prob)) {
      sc.meta.speech_spectral_aug = true;
      speech = spectral_shape_aug(speech, fs, rng.raw());
    }
    if (rng.chance(cfg.pitch_aug_prob)) {
      sc.meta.speech_pitch_aug = true;
      speech = pitch_aug(speech, rng.raw());
    }
    const Rir rir = synth_rir(t60_room, 1.5 * t60_room, rng.uniform(2.0, 15.0), fs,
                              rng.raw());
    const SplitRir split = split_rir(rir, cfg.early_boundary_ms, fs);
    sc.target = fft_convolve(speech, split.early.taps);
    sc.target.resize(n, 0.0);
    sc.late_reverb = fft_convolve(speech, split.late.taps);
    sc.late_reverb.resize(n, 0.0);
  }

  sc.noise.assign(n, 0.0);
  if (sc.meta.has_noise) {
    Rng nrng = rng.fork(2);
    concat_portions(corpus.noise, nrng, sc.noise, 4.0, 8.0, 0.0, 0.0, fs);
    if (rng.chance(cfg.spectral_aug_prob)) {
      sc.meta.noise_spectral_aug = true;
      sc.noise = spectral_shape_aug(sc.noise, fs, rng.raw());
    }
    if (rng.chance(cfg.pitch_aug_prob)) {
      sc.meta.noise_pitch_aug = true;
      sc.noise = pitch_aug(sc.noise, rng.raw());
    }
  }

  sc.farend.assign(n, 0.0);
  sc.echo.assign(n, 0.0);
  if (sc.meta.has_echo) {
    const FarendBuild fb = build_farend(corpus, cfg, rng.raw());
    sc.farend = fb.samples;
    sc.meta.silence_start_s = fb.silence_start_s;
    sc.meta.silence_dur_s = fb.silence_dur_s;
    sc.meta.dropouts = fb.dropouts;
    sc.meta.n_dropouts = fb.n_dropouts;
    sc.meta.farend_clip = fb.clip;
    sc.meta.clip_kind =
        fb.clip ? (fb.clip_kind == ClipKind::kSigmoid ? "sigmoid" : "rectifier") : "";
    sc.meta.farend_drift = fb.drift;
    sc.meta.drift_rate = fb.drift_rate;

    std::vector<Rir> eirs;
    for (int i = 0; i <= cfg.max_pathchanges; ++i) {
      const double lo = std::max(cfg.t60_min_ms, t60_room - cfg.t60_match_ms);
      const double hi = std::min(cfg.t60_max_ms, t60_room + cfg.t60_match_ms);
      const double t60_e = rng.uniform(lo, hi);
      eirs.push_back(synth_rir(t60_e, 1.5 * t60_e, rng.uniform(2.0, 15.0), fs, rng.raw()));
    }
    sc.meta.t60_echo_ms = eirs.front().t60_ms;
    EchoPathEffects fx;
    fx.clip = fb.clip;
    fx.clip_kind = fb.clip_kind;
    fx.clip_param = fb.clip_param;
    fx.drift = fb.drift;
    fx.drift_rate = fb.drift_rate;
    const EchoBuild eb = build_echo(sc.farend, eirs, cfg, rng.raw(), fx);
    sc.echo = eb.echo;
    sc.meta.path_schedule = eb.schedule;
  }

  // Level plan: component scaling against the near-end (or the echo when no
  // near-end exists), then one global gain to hit the drawn mic level.
  const double p_near = active_power(sum_signals(sc.target, sc.late_reverb), fs);
  const double p_noise_raw = active_power(sc.noise, fs);
  const double p_echo_raw = active_power(sc.echo, fs);

  sc.meta.target_snr_db = cfg.snr_db_dist.sample(rng);
  sc.meta.target_ser_db = cfg.ser_db_dist.sample(rng);
  sc.meta.target_mic_dbfs = cfg.mic_level_dbfs_dist.sample(rng);

  if (sc.meta.has_speech) {
    require(p_near > 0.0, "near-end speech is silent but a level ratio was requested");
  }
  const double ref_power = sc.meta.has_speech ? p_near : p_echo_raw;

  if (sc.meta.has_echo && sc.meta.has_speech && p_echo_raw > 0.0) {
    const double g = std::sqrt(p_near / p_echo_raw *
                               std::pow(10.0, -sc.meta.target_ser_db / 10.0));
    for (double& v : sc.echo) v *= g;
  }
  if (sc.meta.has_noise && p_noise_raw > 0.0 && ref_power > 0.0) {
    const double p_ref_now = sc.meta.has_speech ? p_near : active_power(sc.echo, fs);
    const double g = std::sqrt(p_ref_now / p_noise_raw *
                               std::pow(10.0, -sc.meta.target_snr_db / 10.0));
    for (double& v : sc.noise) v *= g;
  }

  std::vector<double> pre(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    pre[i] = sc.target[i] + sc.late_reverb[i] + sc.noise[i] + sc.echo[i];
  }
  const double p_pre = active_power(pre, fs);
  if (p_pre <= 0.0) throw NumericalError("generated scene is silent");
  const double g_all =
      std::sqrt(std::pow(10.0, sc.meta.target_mic_dbfs / 10.0) / p_pre);
  for (double& v : sc.target) v *= g_all;
  for (double& v : sc.late_reverb) v *= g_all;
  for (double& v : sc.noise) v *= g_all;
  for (double& v : sc.echo) v *= g_all;

  sc.mic.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    sc.mic[i] = sc.target[i] + sc.late_reverb[i] + sc.noise[i] + sc.echo[i];
  }

  sc.meta.realized_mic_dbfs = power_db(active_power(sc.mic, fs));
  const double p_near_f = active_power(sum_signals(sc.target, sc.late_reverb), fs);
  const double p_noise_f = active_power(sc.noise, fs);
  const double p_echo_f = active_power(sc.echo, fs);
  const double ref_f = sc.meta.has_speech ? p_near_f : p_echo_f;
  sc.meta.realized_snr_db = sc.meta.has_noise && p_noise_f > 0.0
                                ? power_db(ref_f) - power_db(p_noise_f)
                                : 0.0;
  sc.meta.realized_ser_db = sc.meta.has_echo && sc.meta.has_speech && p_echo_f > 0.0
                                ? power_db(p_near_f) - power_db(p_echo_f)
                                : 0.0;
  sc.meta.challenge_tag = pick_challenge_tag(sc.meta);
  return sc;
}

namespace {

json meta_to_json(const SceneMeta& m) {
  json j;
  j["seed"] = m.seed;
  j["category"] = to_string(m.category);
  j["challenge_tag"] = m.challenge_tag;
  j["target_snr_db"] = m.target_snr_db;
  j["realized_snr_db"] = m.realized_snr_db;
  j["target_ser_db"] = m.target_ser_db;
  j["realized_ser_db"] = m.realized_ser_db;
  j["target_mic_dbfs"] = m.target_mic_dbfs;
  j["realized_mic_dbfs"] = m.realized_mic_dbfs;
  j["has_noise"] = m.has_noise;
  j["has_echo"] = m.has_echo;
  j["has_speech"] = m.has_speech;
  j["t60_speech_ms"] = m.t60_speech_ms;
  j["t60_echo_ms"] = m.t60_echo_ms;
  j["silence_start_s"] = m.silence_start_s;
  j["silence_dur_s"] = m.silence_dur_s;
  j["dropouts"] = m.dropouts;
  j["n_dropouts"] = m.n_dropouts;
  j["farend_clip"] = m.farend_clip;
  j["clip_kind"] = m.clip_kind;
  j["farend_drift"] = m.farend_drift;
  j["drift_rate"] = m.drift_rate;
  j["speech_spectral_aug"] = m.speech_spectral_aug;
  j["speech_pitch_aug"] = m.speech_pitch_aug;
  j["noise_spectral_aug"] = m.noise_spectral_aug;
  j["noise_pitch_aug"] = m.noise_pitch_aug;
  j["path_schedule"] = json::array();
  for (const PathSegment& s : m.path_schedule) {
    j["path_schedule"].push_back({{"start_sample", s.start_sample},
                                  {"end_sample", s.end_sample},
                                  {"delay_s", s.delay_s},
                                  {"direct_gain_db", s.direct_gain_db},
                                  {"t60_ms", s.t60_ms}});
  }
  return j;
}

SceneMeta meta_from_json(const json& j) {
  SceneMeta m;
  m.seed = j.at("seed").get<uint64_t>();
  m.category = scene_category_from_string(j.at("category").get<std::string>());
  m.challenge_tag = j.at("challenge_tag").get<std::string>();
  m.target_snr_db = j.at("target_snr_db").get<double>();
  m.realized_snr_db = j.at("realized_snr_db").get<double>();
  m.target_ser_db = j.at("target_ser_db").get<double>();
  m.realized_ser_db = j.at("realized_ser_db").get<double>();
  m.target_mic_dbfs = j.at("target_mic_dbfs").get<double>();
  m.realized_mic_dbfs = j.at("realized_mic_dbfs").get<double>();
  m.has_noise = j.at("has_noise").get<bool>();
  m.has_echo = j.at("has_echo").get<bool>();
  m.has_speech = j.at("has_speech").get<bool>();
  m.t60_speech_ms = j.at("t60_speech_ms").get<double>();
  m.t60_echo_ms = j.at("t60_echo_ms").get<double>();
  m.silence_start_s = j.at("silence_start_s").get<double>();
  m.silence_dur_s = j.at("silence_dur_s").get<double>();
  m.dropouts = j.at("dropouts").get<bool>();
  m.n_dropouts = j.at("n_dropouts").get<int>();
  m.farend_clip = j.at("farend_clip").get<bool>();
  m.clip_kind = j.at("clip_kind").get<std::string>();
  m.farend_drift = j.at("farend_drift").get<bool>();
  m.drift_rate = j.at("drift_rate").get<double>();
  m.speech_spectral_aug = j.at("speech_spectral_aug").get<bool>();
  m.speech_pitch_aug = j.at("speech_pitch_aug").get<bool>();
  m.noise_spectral_aug = j.at("noise_spectral_aug").get<bool>();
  m.noise_pitch_aug = j.at("noise_pitch_aug").get<bool>();
  for (const json& s : j.at("path_schedule")) {
    PathSegment seg;
    seg.start_sample = s.at("start_sample").get<size_t>();
    seg.end_sample = s.at("end_sample").get<size_t>();
    seg.delay_s = s.at("delay_s").get<double>();
    seg.direct_gain_db = s.at("direct_gain_db").get<double>();
    seg.t60_ms = s.at("t60_ms").get<double>();
    m.path_schedule.push_back(seg);
  }
  return m;
}

void write_component(const fs::path& p, const std::vector<double>& x, int fs_hz) {
  write_wav(p.string(), x, fs_hz, WavFormat::kFloat32);
}

std::vector<double> read_component(const fs::path& p, int fs_hz) {
  WavData w = read_wav(p.string());
  require(w.sample_rate_hz == fs_hz, "unexpected sample rate in " + p.string());
  return std::move(w.samples);
}

}  // namespace

void write_scene(const SceneBundle& scene, const std::string& dir, int sample_rate_hz) {
  const fs::path root(dir);
  fs::create_directories(root);
  write_component(root / "mic.wav", scene.mic, sample_rate_hz);
  write_component(root / "target.wav", scene.target, sample_rate_hz);
  write_component(root / "echo.wav", scene.echo, sample_rate_hz);
  write_component(root / "farend.wav", scene.farend, sample_rate_hz);
  write_component(root / "noise.wav", scene.noise, sample_rate_hz);
  std::ofstream f(root / "meta.json");
  if (!f.good()) throw IoError("cannot write meta.json in " + dir);
  f << meta_to_json(scene.meta).dump(2) << "\n";
  if (!f.good()) throw IoError("meta.json write failed in " + dir);
}

SceneBundle read_scene(const std::string& dir, int expected_sample_rate_hz) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw IoError("scene directory not found: " + dir);
  SceneBundle sc;
  sc.mic = read_component(root / "mic.wav", expected_sample_rate_hz);
  sc.target = read_component(root / "target.wav", expected_sample_rate_hz);
  sc.echo = read_component(root / "echo.wav", expected_sample_rate_hz);
  sc.farend = read_component(root / "farend.wav", expected_sample_rate_hz);
  sc.noise = read_component(root / "noise.wav", expected_sample_rate_hz);
  std::ifstream f(root / "meta.json");
  if (!f.good()) throw IoError("cannot read meta.json in " + dir);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw IoError("meta.json parse error in " + dir + ": " + e.what());
  }
  sc.meta = meta_from_json(j);
  // The stored set omits the late reverb; recover it from the sum identity.
  sc.late_reverb.assign(sc.mic.size(), 0.0);
  for (size_t i = 0; i < sc.mic.size(); ++i) {
    sc.late_reverb[i] = sc.mic[i] - sc.target[i] - sc.noise[i] - sc.echo[i];
  }
  return sc;
}

}  // namespace daec

