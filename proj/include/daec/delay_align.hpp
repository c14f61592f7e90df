#pragma once

#include <vector>

#include "daec/spectral.hpp"

namespace daec {

struct MscConfig {
  double search_window_s = 1.0;
  double smoothing_coeff = 0.0;  // 0 = derive from search window and hop
  int max_delay_frames = 50;     // 0.5 s at the default 10 ms hop
  double eps = 1e-10;

  void validate(const WindowConfig& wcfg) const;
  // Effective smoothing coefficient for the given hop.
  double lambda(const WindowConfig& wcfg) const;
  int warmup_frames(const WindowConfig& wcfg) const;
};

struct DelayTrack {
  std::vector<int> delay_frames;   // per frame, >= 0
  std::vector<double> msc_peak;    // coherence value at the chosen delay
  std::vector<bool> warmup;        // true until one full search window elapsed
};

// Streaming per-frame delay estimator. Per candidate delay, cross and auto
// spectra are first-order smoothed and the band-aggregated coherence
// sum_k |Pyu|^2 / (sum_k Pyy Puu + eps) is maximised over delays. Ties break
// toward the smallest delay. No look-ahead.
class DelayEstimator {
 public:
  DelayEstimator(const WindowConfig& wcfg, const MscConfig& cfg);

  // Feeds one mic/far frame pair (n_bins complex values each) and returns the
  // current delay estimate.
  int push_frame(const cpx* mic, const cpx* far);

  int current_delay() const { return current_delay_; }
  double current_peak() const { return current_peak_; }
  bool in_warmup() const { return frames_seen_ < warmup_frames_; }

 private:
  int n_bins_;
  int max_delay_;
  double lambda_;
  double eps_;
  int warmup_frames_;
  int frames_seen_ = 0;
  int current_delay_ = 0;
  double current_peak_ = 0.0;
  double peak_high_water_ = 0.0;

  std::vector<cpx> far_history_;      // ring buffer [max_delay+1][n_bins]
  int history_fill_ = 0;
  std::vector<cpx> cross_;            // smoothed Pyu per [delay][bin]
  std::vector<double> auto_far_;      // smoothed Puu per [delay][bin]
  std::vector<double> auto_mic_;      // smoothed Pyy per bin
};

// Batch wrapper: runs the streaming estimator over two equal-length
// spectrograms sharing one window config.
DelayTrack estimate_delay(const Spectrogram& mic, const Spectrogram& far,
                          const MscConfig& cfg);

// Output frame n = far frame n - delay(n); negative source indices give zero
// frames.
Spectrogram align_farend(const Spectrogram& far, const DelayTrack& track);

void write_delay_csv(const std::string& path, const DelayTrack& track);

}  // namespace daec
