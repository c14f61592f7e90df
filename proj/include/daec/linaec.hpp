#pragma once

#include <functional>
#include <vector>

#include "daec/spectral.hpp"

namespace daec {

struct LinAecConfig {
  int window_ms = 40;
  double overlap = 0.75;
  int filter_len_ms = 200;
  double step_size = 0.5;        // NLMS step, (0, 2)
  double regularization = 1e-3;  // added to the normalization power
  double dtd_floor = 0.10;       // minimum step-size scale under doubletalk
  bool freeze_adaptation = false;
  int sample_rate_hz = 16000;

  void validate() const;
  WindowConfig window() const;
  int partitions() const;
};

struct LinAecOutput {
  std::vector<double> echo_estimate;
  std::vector<double> error_out;
};

// Frequency-domain partitioned-block NLMS echo canceller. Per STFT bin a
// multi-partition filter predicts the echo from far-end frame history; the
// adaptation step is scaled by a smoothed mic/far coherence so near-end
// activity stalls the update instead of corrupting the filter.
class LinearAec {
 public:
  explicit LinearAec(const LinAecConfig& cfg);

  // Processes one mic/far STFT frame pair; writes the echo estimate and the
  // echo-subtracted error frame (n_bins values each).
  void process_frame(const cpx* mic, const cpx* far, cpx* echo_est, cpx* error);

  void set_freeze(bool freeze) { freeze_ = freeze; }
  const LinAecConfig& config() const { return cfg_; }

 private:
  LinAecConfig cfg_;
  int n_bins_;
  int partitions_;
  bool freeze_;
  int frame_index_ = 0;
  std::vector<cpx> far_frames_;   // ring [partitions][bins]
  std::vector<cpx> weights_;      // [partitions][bins]
  std::vector<double> far_power_; // per-bin total power across partitions
  // Coherence tracker state (smoothed over ~8 frames).
  std::vector<cpx> coh_cross_;
  std::vector<double> coh_mic_, coh_far_;
};

// Whole-signal convenience wrapper: STFT, frame loop, iSTFT. Inputs must have
// equal length.
LinAecOutput linaec_process(const std::vector<double>& mic,
                            const std::vector<double>& far,
                            const LinAecConfig& cfg);

// Runs linaec_process and feeds error_out through an enhancement stage.
std::vector<double> linaec_chain(
    const std::vector<double>& mic, const std::vector<double>& far,
    const LinAecConfig& cfg,
    const std::function<std::vector<double>(const std::vector<double>&)>& post);

}  // namespace daec
