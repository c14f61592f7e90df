#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "daec/delay_align.hpp"
#include "daec/rng.hpp"
#include "daec/spectral.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace daec;
using namespace daec::testutil;

namespace {

std::vector<double> delay_samples(const std::vector<double>& x, int by) {
  std::vector<double> out(x.size(), 0.0);
  for (size_t i = by; i < x.size(); ++i) out[i] = x[i - by];
  return out;
}

}  // namespace

TEST_CASE("delay estimator locks to zero when mic equals far") {
  const auto wcfg = processing_window();
  const auto x = random_signal(11, 16000 * 3);
  const auto spec = stft(x, wcfg);
  MscConfig cfg;
  const auto track = estimate_delay(spec, spec, cfg);
  const int warm = cfg.warmup_frames(wcfg);
  REQUIRE(spec.n_frames > warm + 20);
  for (int t = 0; t < spec.n_frames; ++t) {
    CHECK(track.warmup[t] == (t < warm));
    if (t >= warm) CHECK(track.delay_frames[t] == 0);
  }
  // Coherence of a signal with itself approaches 1.
  CHECK(track.msc_peak[spec.n_frames - 1] > 0.9);
}

TEST_CASE("delay estimator recovers a known frame shift") {
  const auto wcfg = processing_window();
  const int true_delay = 5;
  const auto far = random_signal(22, 16000 * 4);
  const auto mic = delay_samples(far, true_delay * wcfg.hop_samples);
  const auto track = estimate_delay(stft(mic, wcfg), stft(far, wcfg), MscConfig{});
  const int warm = MscConfig{}.warmup_frames(wcfg);
  for (int t = warm + 50; t < static_cast<int>(track.delay_frames.size()); ++t) {
    CHECK(track.delay_frames[t] == true_delay);
  }
}

TEST_CASE("delay estimate survives near-end interference at equal power") {
  const auto wcfg = processing_window();
  const int true_delay = 12;
  int hits = 0, total = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const auto far = random_signal(seed, 16000 * 4);
    auto mic = delay_samples(far, true_delay * wcfg.hop_samples);
    const auto near = random_signal(seed + 100, mic.size());
    for (size_t i = 0; i < mic.size(); ++i) mic[i] += near[i];
    const auto track = estimate_delay(stft(mic, wcfg), stft(far, wcfg), MscConfig{});
    const int warm = MscConfig{}.warmup_frames(wcfg);
    for (int t = warm; t < static_cast<int>(track.delay_frames.size()); ++t) {
      ++total;
      if (track.delay_frames[t] == true_delay) ++hits;
    }
  }
  CHECK(static_cast<double>(hits) / total > 0.9);
}

TEST_CASE("delay estimate is invariant to far-end scaling") {
  const auto wcfg = processing_window();
  const auto far = random_signal(33, 16000 * 3);
  const auto mic = delay_samples(far, 7 * wcfg.hop_samples);
  auto far_scaled = far;
  for (auto& v : far_scaled) v *= 3.7;
  const auto a = estimate_delay(stft(mic, wcfg), stft(far, wcfg), MscConfig{});
  const auto b = estimate_delay(stft(mic, wcfg), stft(far_scaled, wcfg), MscConfig{});
  CHECK(a.delay_frames == b.delay_frames);
}

TEST_CASE("delay estimator is causal") {
  const auto wcfg = processing_window();
  const auto far = random_signal(44, 16000 * 3);
  const auto mic = delay_samples(far, 4 * wcfg.hop_samples);
  auto far2 = far;
  auto mic2 = mic;
  // Perturb only the tail; everything before must be untouched.
  const int tail_start_frame = 250;
  const size_t tail_start = static_cast<size_t>(tail_start_frame) * wcfg.hop_samples;
  Rng rng(999);
  for (size_t i = tail_start; i < far2.size(); ++i) {
    far2[i] = rng.uniform(-1.0, 1.0);
    mic2[i] = rng.uniform(-1.0, 1.0);
  }
  const auto a = estimate_delay(stft(mic, wcfg), stft(far, wcfg), MscConfig{});
  const auto b = estimate_delay(stft(mic2, wcfg), stft(far2, wcfg), MscConfig{});
  // Frames whose window ends before the perturbed region see identical input.
  const int safe = tail_start_frame - wcfg.window_len_samples / wcfg.hop_samples;
  for (int t = 0; t < safe; ++t) {
    CHECK(a.delay_frames[t] == b.delay_frames[t]);
    CHECK(a.msc_peak[t] == doctest::Approx(b.msc_peak[t]).epsilon(1e-12));
  }
}

TEST_CASE("delay holds the last confident estimate through far-end silence") {
  const auto wcfg = processing_window();
  const int true_delay = 5;
  auto far = random_signal(55, 16000 * 3);
  auto mic = delay_samples(far, true_delay * wcfg.hop_samples);
  // One second of dead air on both ends.
  far.insert(far.end(), 16000, 0.0);
  mic.insert(mic.end(), 16000, 0.0);
  const auto track = estimate_delay(stft(mic, wcfg), stft(far, wcfg), MscConfig{});
  for (size_t t = track.delay_frames.size() - 60; t < track.delay_frames.size(); ++t) {
    CHECK(track.delay_frames[t] == true_delay);
  }
}

TEST_CASE("align_farend applies per-frame delays") {
  const auto wcfg = processing_window();
  Spectrogram far(10, wcfg.n_bins(), wcfg);
  Rng rng(7);
  for (auto& v : far.data) v = cpx(rng.uniform(-1, 1), rng.uniform(-1, 1));

  DelayTrack zero;
  zero.delay_frames.assign(10, 0);
  zero.msc_peak.assign(10, 1.0);
  zero.warmup.assign(10, false);
  const auto same = align_farend(far, zero);
  CHECK(max_abs_diff(same.data, far.data) == 0.0);

  DelayTrack three = zero;
  three.delay_frames.assign(10, 3);
  const auto shifted = align_farend(far, three);
  for (int t = 0; t < 10; ++t) {
    for (int k = 0; k < far.n_bins; ++k) {
      const cpx want = t < 3 ? cpx(0, 0) : far.at(t - 3, k);
      CHECK(shifted.at(t, k) == want);
    }
  }

  // Step change mid-track switches the source index per frame.
  DelayTrack step = zero;
  for (int t = 5; t < 10; ++t) step.delay_frames[t] = 2;
  const auto mixed = align_farend(far, step);
  CHECK(mixed.at(4, 1) == far.at(4, 1));
  CHECK(mixed.at(5, 1) == far.at(3, 1));

  DelayTrack bad = zero;
  bad.delay_frames.resize(9);
  CHECK_THROWS_AS(align_farend(far, bad), ConfigError);
}

TEST_CASE("delay csv format") {
  DelayTrack track;
  track.delay_frames = {0, 2, 31};
  track.msc_peak = {0.5, 0.25, 0.75};
  track.warmup = {true, false, false};
  const std::string path = "delay_test_tmp.csv";
  write_delay_csv(path, track);
  std::ifstream is(path);
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);
  CHECK(line == "frame_index,delay_frames,msc_peak");
  std::getline(is, line);
  CHECK(line == "0,0,0.5");
  std::getline(is, line);
  CHECK(line == "1,2,0.25");
  std::getline(is, line);
  CHECK(line == "2,31,0.75");
  CHECK(!std::getline(is, line));
  std::remove(path.c_str());
}
