#include "daec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "daec/error.hpp"
#include "daec/filters.hpp"
#include "daec/wav.hpp"
#include "json.hpp"

namespace daec {

namespace fs = std::filesystem;
using nlohmann::json;

double Corpus::total_duration_s() const {
  size_t n = 0;
  for (const auto& c : speech) n += c.samples.size();
  for (const auto& c : noise) n += c.samples.size();
  for (const auto& c : music) n += c.samples.size();
  return static_cast<double>(n) / sample_rate_hz;
}

void Corpus::validate() const {
  require(sample_rate_hz > 0, "corpus sample rate must be positive");
  require(!speech.empty() && !noise.empty(), "corpus needs speech and noise clips");
}

namespace {

void normalize_rms(std::vector<double>& x, double target_rms) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  const double rms = std::sqrt(sum / std::max<size_t>(1, x.size()));
  if (rms <= 0.0) return;
  double g = target_rms / rms;
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak * g > 0.9) g = 0.9 / peak;  // headroom for later scene gains
  for (double& v : x) v *= g;
}

void add_envelope_segment(std::vector<double>& out, const std::vector<double>& seg,
                          size_t start, double attack_s, double release_s, int fs) {
  const size_t n = seg.size();
  const size_t na = std::min(n / 2, static_cast<size_t>(attack_s * fs));
  const size_t nr = std::min(n - na, static_cast<size_t>(release_s * fs));
  for (size_t i = 0; i < n && start + i < out.size(); ++i) {
    double env = 1.0;
    if (i < na) env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / na);
    else if (i >= n - nr) env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(n - 1 - i) / nr);
    out[start + i] += seg[i] * env;
  }
}

std::vector<double> voiced_segment(Rng& rng, int n, int fs) {
  // Glottal-style impulse train with slow f0 glide, shaped by three parallel
  // formant resonators.
  const double f0_a = rng.uniform(90.0, 230.0);
  const double f0_b = f0_a * rng.uniform(0.85, 1.15);
  std::vector<double> exc(n, 0.0);
  double phase = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f0 = f0_a + (f0_b - f0_a) * i / std::max(1, n - 1);
    phase += f0 / fs;
    if (phase >= 1.0) {
      phase -= 1.0;
      exc[i] = 1.0;
    }
  }
  const double f1 = rng.uniform(300.0, 850.0);
  const double f2 = rng.uniform(900.0, 2200.0);
  const double f3 = rng.uniform(2300.0, 3200.0);
  std::vector<double> out(n, 0.0);
  const std::vector<std::pair<Biquad, double>> formants = {
      {design_bandpass(f1, 6.0, fs), 1.0},
      {design_bandpass(f2, 8.0, fs), 0.6},
      {design_bandpass(f3, 10.0, fs), 0.35}};
  for (const auto& [bq, gain] : formants) {
    std::vector<double> band = apply_biquads(exc, {bq});
    for (int i = 0; i < n; ++i) out[i] += gain * band[i];
  }
  return out;
}

std::vector<double> unvoiced_burst(Rng& rng, int n, int fs) {
  std::vector<double> noise(n);
  for (double& v : noise) v = rng.uniform(-1.0, 1.0);
  const double fc = rng.uniform(2000.0, 5500.0);
  return apply_biquads(noise, {design_bandpass(fc, 1.0, fs)});
}

}  // namespace

std::vector<double> make_speech_like(Rng& rng, int n_samples, int sample_rate_hz) {
  const int fs = sample_rate_hz;
  std::vector<double> out(n_samples, 0.0);
  size_t pos = static_cast<size_t>(rng.uniform(0.0, 0.2) * fs);
  while (pos < out.size()) {
    const int syllables = rng.randint(1, 4);
    for (int s = 0; s < syllables && pos < out.size(); ++s) {
      if (rng.chance(0.3)) {
        const int n = static_cast<int>(rng.uniform(0.04, 0.10) * fs);
        add_envelope_segment(out, unvoiced_burst(rng, n, fs), pos, 0.005, 0.01, fs);
        pos += static_cast<size_t>(n * 0.8);
      }
      const int n = static_cast<int>(rng.uniform(0.08, 0.25) * fs);
      add_envelope_segment(out, voiced_segment(rng, n, fs), pos, 0.015, 0.03, fs);
      pos += n + static_cast<size_t>(rng.uniform(0.01, 0.06) * fs);
    }
    pos += static_cast<size_t>(rng.uniform(0.06, 0.25) * fs);  // inter-word pause
  }
  normalize_rms(out, 0.05);
  return out;
}

std::vector<double> make_noise_bed(Rng& rng, int n_samples, int sample_rate_hz) {
  const int fs = sample_rate_hz;
  std::vector<double> out(n_samples, 0.0);
  const int kind = rng.randint(0, 2);
  if (kind == 0) {
    // Pink-ish noise, Kellet three-pole approximation.
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    for (double& v : out) {
      const double w = rng.uniform(-1.0, 1.0);
      p0 = 0.99765 * p0 + w * 0.0990460;
      p1 = 0.96300 * p1 + w * 0.2965164;
      p2 = 0.57000 * p2 + w * 1.0526913;
      v = p0 + p1 + p2 + w * 0.1848;
    }
  } else if (kind == 1) {
    // Slowly amplitude-modulated broadband band (fan / traffic texture).
    std::vector<double> white(n_samples);
    for (double& v : white) v = rng.uniform(-1.0, 1.0);
    const double fc = rng.uniform(400.0, 3000.0);
    out = apply_biquads(white, {design_bandpass(fc, 0.7, fs)});
    const double fm = rng.uniform(0.3, 2.0);
    const double depth = rng.uniform(0.2, 0.6);
    const double ph = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < n_samples; ++i)
      out[i] *= 1.0 + depth * std::sin(2.0 * M_PI * fm * i / fs + ph);
  } else {
    // Mains hum harmonics over a low pink bed.
    const double base = rng.chance(0.5) ? 50.0 : 60.0;
    for (int h = 1; h <= 6; ++h) {
      const double amp = 1.0 / h;
      const double ph = rng.uniform(0.0, 2.0 * M_PI);
      for (int i = 0; i < n_samples; ++i)
        out[i] += amp * std::sin(2.0 * M_PI * base * h * i / fs + ph);
    }
    double p0 = 0.0;
    for (double& v : out) {
      const double w = rng.uniform(-1.0, 1.0);
      p0 = 0.995 * p0 + 0.005 * w;
      v += 25.0 * p0;
    }
  }
  normalize_rms(out, 0.05);
  return out;
}

std::vector<double> make_music_like(Rng& rng, int n_samples, int sample_rate_hz) {
  const int fs = sample_rate_hz;
  std::vector<double> out(n_samples, 0.0);
  const double root = rng.uniform(110.0, 220.0);
  const double scale[] = {1.0, 9.0 / 8.0, 5.0 / 4.0, 3.0 / 2.0, 5.0 / 3.0, 2.0};
  size_t pos = 0;
  while (pos < out.size()) {
    const int note_len = static_cast<int>(rng.uniform(0.3, 0.7) * fs);
    const int n_notes = rng.randint(1, 3);
    std::vector<double> seg(note_len, 0.0);
    for (int v = 0; v < n_notes; ++v) {
      const double f = root * scale[rng.randint(0, 5)] * (rng.chance(0.3) ? 2.0 : 1.0);
      const double ph = rng.uniform(0.0, 2.0 * M_PI);
      for (int h = 1; h <= 6; ++h) {
        if (f * h >= fs / 2.0) break;
        const double amp = 1.0 / (h * n_notes);
        for (int i = 0; i < note_len; ++i)
          seg[i] += amp * std::sin(2.0 * M_PI * f * h * i / fs + h * ph);
      }
    }
    if (rng.chance(0.5)) {
      // Percussive tick on the note onset.
      const int tick = std::min(note_len, fs / 50);
      for (int i = 0; i < tick; ++i)
        seg[i] += 0.8 * rng.uniform(-1.0, 1.0) * std::exp(-8.0 * i / tick);
    }
    add_envelope_segment(out, seg, pos, 0.01, 0.05, fs);
    pos += note_len;
  }
  normalize_rms(out, 0.05);
  return out;
}

Corpus make_synthetic_corpus(const CorpusSpec& spec, uint64_t seed) {
  require(spec.sample_rate_hz > 0, "sample rate must be positive");
  require(spec.clip_min_s > 0 && spec.clip_max_s >= spec.clip_min_s,
          "clip length range invalid");
  require(spec.n_speech > 0 && spec.n_noise > 0, "need speech and noise clips");
  Corpus corpus;
  corpus.sample_rate_hz = spec.sample_rate_hz;
  auto gen = [&](const char* prefix, int count, int stream,
                 std::vector<double> (*fn)(Rng&, int, int)) {
    std::vector<CorpusClip> clips;
    for (int i = 0; i < count; ++i) {
      Rng rng(derive_seed(seed, static_cast<uint64_t>(stream), static_cast<uint64_t>(i)));
      const int n = static_cast<int>(rng.uniform(spec.clip_min_s, spec.clip_max_s) *
                                     spec.sample_rate_hz);
      CorpusClip clip;
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%03d", prefix, i);
      clip.name = name;
      clip.samples = fn(rng, n, spec.sample_rate_hz);
      clips.push_back(std::move(clip));
    }
    return clips;
  };
  corpus.speech = gen("speech", spec.n_speech, 1, make_speech_like);
  corpus.noise = gen("noise", spec.n_noise, 2, make_noise_bed);
  corpus.music = gen("music", spec.n_music, 3, make_music_like);
  return corpus;
}

namespace {

void write_category(const std::vector<CorpusClip>& clips, const fs::path& dir,
                    int fs_hz, json& manifest_entry) {
  fs::create_directories(dir);
  for (const auto& clip : clips) {
    const fs::path p = dir / (clip.name + ".wav");
    write_wav(p.string(), clip.samples, fs_hz, WavFormat::kFloat32);
    manifest_entry.push_back({{"file", dir.filename().string() + "/" + clip.name + ".wav"},
                              {"duration_s", static_cast<double>(clip.samples.size()) / fs_hz}});
  }
}

std::vector<CorpusClip> load_category(const fs::path& dir, int& fs_hz) {
  std::vector<CorpusClip> clips;
  if (!fs::is_directory(dir)) return clips;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    WavData w = read_wav(p.string());
    if (fs_hz == 0) fs_hz = w.sample_rate_hz;
    require(w.sample_rate_hz == fs_hz, "corpus clips disagree on sample rate: " + p.string());
    clips.push_back({p.stem().string(), std::move(w.samples)});
  }
  return clips;
}

}  // namespace

void write_corpus_dir(const Corpus& corpus, const std::string& dir) {
  corpus.validate();
  const fs::path root(dir);
  fs::create_directories(root);
  json manifest;
  manifest["sample_rate_hz"] = corpus.sample_rate_hz;
  manifest["categories"] = {{"speech", json::array()},
                            {"noise", json::array()},
                            {"music", json::array()}};
  write_category(corpus.speech, root / "speech", corpus.sample_rate_hz,
                 manifest["categories"]["speech"]);
  write_category(corpus.noise, root / "noise", corpus.sample_rate_hz,
                 manifest["categories"]["noise"]);
  write_category(corpus.music, root / "music", corpus.sample_rate_hz,
                 manifest["categories"]["music"]);
  std::ofstream f(root / "manifest.json");
  if (!f.good()) throw IoError("cannot write manifest in " + dir);
  f << manifest.dump(2) << "\n";
  if (!f.good()) throw IoError("manifest write failed in " + dir);
}

Corpus load_corpus_dir(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw IoError("corpus directory not found: " + dir);
  Corpus corpus;
  int fs_hz = 0;
  corpus.speech = load_category(root / "speech", fs_hz);
  corpus.noise = load_category(root / "noise", fs_hz);
  corpus.music = load_category(root / "music", fs_hz);
  if (fs_hz <= 0) throw IoError("no wav clips under " + dir);
  corpus.sample_rate_hz = fs_hz;
  corpus.validate();
  return corpus;
}

}  // namespace daec
