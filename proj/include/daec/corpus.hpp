#pragma once

#include <string>
#include <vector>

#include "daec/rng.hpp"

namespace daec {

struct CorpusClip {
  std::string name;
  std::vector<double> samples;
};

// Source material for scene synthesis: near-end speech, ambient noise, and
// far-end program material (speech plus music).
struct Corpus {
  int sample_rate_hz = 16000;
  std::vector<CorpusClip> speech;
  std::vector<CorpusClip> noise;
  std::vector<CorpusClip> music;

  double total_duration_s() const;
  void validate() const;
};

struct CorpusSpec {
  int sample_rate_hz = 16000;
  int n_speech = 24;
  int n_noise = 12;
  int n_music = 8;
  double clip_min_s = 8.0;
  double clip_max_s = 15.0;
};

// Procedurally synthesized stand-in corpus: formant-excited speech-like
// clips, shaped/modulated noise beds, and additive-synthesis music. Fully
// deterministic per (spec, seed).
Corpus make_synthetic_corpus(const CorpusSpec& spec, uint64_t seed);

// Single-clip generators, exposed for targeted tests.
std::vector<double> make_speech_like(Rng& rng, int n_samples, int sample_rate_hz);
std::vector<double> make_noise_bed(Rng& rng, int n_samples, int sample_rate_hz);
std::vector<double> make_music_like(Rng& rng, int n_samples, int sample_rate_hz);

// Directory layout: <dir>/{speech,noise,music}/<name>.wav plus manifest.json
// listing every clip with its duration. load accepts any directory with that
// layout (user-provided recordings included); clips must be mono and share
// one sample rate.
void write_corpus_dir(const Corpus& corpus, const std::string& dir);
Corpus load_corpus_dir(const std::string& dir);

}  // namespace daec
