#include "daec/linaec.hpp"

#include <algorithm>
#include <cmath>

namespace daec {

void LinAecConfig::validate() const {
  require(window_ms > 0 && filter_len_ms > 0, "window and filter length must be positive");
  require(overlap > 0.0 && overlap < 1.0, "overlap must be in (0, 1)");
  require(step_size > 0.0 && step_size < 2.0, "step size must be in (0, 2)");
  require(regularization > 0.0, "regularization must be positive");
  require(dtd_floor >= 0.0 && dtd_floor <= 1.0, "dtd floor must be in [0, 1]");
  const int win = window_ms * sample_rate_hz / 1000;
  const int hop = static_cast<int>(std::lround(win * (1.0 - overlap)));
  require(hop > 0 && win % hop == 0, "overlap must yield a hop dividing the window");
  require(filter_len_ms * sample_rate_hz / 1000 >= hop,
          "filter must cover at least one frame hop");
}

WindowConfig LinAecConfig::window() const {
  WindowConfig w;
  w.sample_rate_hz = sample_rate_hz;
  w.window_len_samples = window_ms * sample_rate_hz / 1000;
  w.hop_samples = static_cast<int>(std::lround(w.window_len_samples * (1.0 - overlap)));
  w.window_kind = WindowKind::kHann;
  return w;
}

int LinAecConfig::partitions() const {
  const int hop_ms = static_cast<int>(std::lround(window_ms * (1.0 - overlap)));
  return std::max(1, (filter_len_ms + hop_ms - 1) / hop_ms);
}

LinearAec::LinearAec(const LinAecConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  n_bins_ = cfg.window().n_bins();
  partitions_ = cfg.partitions();
  freeze_ = cfg.freeze_adaptation;
  far_frames_.assign(static_cast<size_t>(partitions_) * n_bins_, cpx(0.0, 0.0));
  weights_.assign(static_cast<size_t>(partitions_) * n_bins_, cpx(0.0, 0.0));
  far_power_.assign(n_bins_, 0.0);
  coh_cross_.assign(n_bins_, cpx(0.0, 0.0));
  coh_mic_.assign(n_bins_, 0.0);
  coh_far_.assign(n_bins_, 0.0);
}

void LinearAec::process_frame(const cpx* mic, const cpx* far, cpx* echo_est,
                              cpx* error) {
  const int slot = frame_index_ % partitions_;
  cpx* newest = far_frames_.data() + static_cast<size_t>(slot) * n_bins_;
  for (int k = 0; k < n_bins_; ++k) {
    far_power_[k] += std::norm(far[k]) - std::norm(newest[k]);
    if (far_power_[k] < 0.0) far_power_[k] = 0.0;  // rounding drift guard
    newest[k] = far[k];
  }

  // Prediction: partition p holds the far frame from p hops ago.
  for (int k = 0; k < n_bins_; ++k) echo_est[k] = cpx(0.0, 0.0);
  for (int p = 0; p < partitions_; ++p) {
    if (frame_index_ - p < 0) break;
    const int src_slot = (frame_index_ - p) % partitions_;
    const cpx* uf = far_frames_.data() + static_cast<size_t>(src_slot) * n_bins_;
    const cpx* w = weights_.data() + static_cast<size_t>(p) * n_bins_;
    for (int k = 0; k < n_bins_; ++k) echo_est[k] += w[k] * uf[k];
  }
  for (int k = 0; k < n_bins_; ++k) error[k] = mic[k] - echo_est[k];

  // Double-talk detector: coherence between mic and the echo estimate. Near
  // 1 when the model explains the mic (far-end only, converged), low during
  // double talk or before convergence; the floor keeps cold starts moving.
  const double ca = 0.875;  // ~8 frame memory
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n_bins_; ++k) {
    coh_mic_[k] = ca * coh_mic_[k] + (1.0 - ca) * std::norm(mic[k]);
    coh_far_[k] = ca * coh_far_[k] + (1.0 - ca) * std::norm(echo_est[k]);
    coh_cross_[k] = ca * coh_cross_[k] + (1.0 - ca) * mic[k] * std::conj(echo_est[k]);
    num += std::norm(coh_cross_[k]);
    den += coh_mic_[k] * coh_far_[k];
  }
  const double coherence = std::min(1.0, num / (den + 1e-20));
  const double mu_scale = freeze_ ? 0.0 : std::max(cfg_.dtd_floor, coherence);

  if (mu_scale > 0.0) {
    const double mu = cfg_.step_size * mu_scale;
    for (int p = 0; p < partitions_; ++p) {
      if (frame_index_ - p < 0) break;
      const int src_slot = (frame_index_ - p) % partitions_;
      const cpx* uf = far_frames_.data() + static_cast<size_t>(src_slot) * n_bins_;
      cpx* w = weights_.data() + static_cast<size_t>(p) * n_bins_;
      for (int k = 0; k < n_bins_; ++k) {
        w[k] += mu * std::conj(uf[k]) * error[k] / (far_power_[k] + cfg_.regularization);
      }
    }
  }
  ++frame_index_;
}

LinAecOutput linaec_process(const std::vector<double>& mic,
                            const std::vector<double>& far,
                            const LinAecConfig& cfg) {
  require(mic.size() == far.size(), "mic/far length mismatch");
  const WindowConfig wcfg = cfg.window();
  Spectrogram mic_spec = stft(mic, wcfg);
  Spectrogram far_spec = stft(far, wcfg);

  LinearAec aec(cfg);
  Spectrogram echo_spec(mic_spec.n_frames, mic_spec.n_bins, wcfg);
  Spectrogram err_spec(mic_spec.n_frames, mic_spec.n_bins, wcfg);
  for (int t = 0; t < mic_spec.n_frames; ++t) {
    aec.process_frame(&mic_spec.at(t, 0), &far_spec.at(t, 0), &echo_spec.at(t, 0),
                      &err_spec.at(t, 0));
  }

  LinAecOutput out;
  out.echo_estimate = istft(echo_spec, wcfg);
  out.error_out = istft(err_spec, wcfg);
  out.echo_estimate.resize(mic.size(), 0.0);
  out.error_out.resize(mic.size(), 0.0);
  return out;
}

std::vector<double> linaec_chain(
    const std::vector<double>& mic, const std::vector<double>& far,
    const LinAecConfig& cfg,
    const std::function<std::vector<double>(const std::vector<double>&)>& post) {
  LinAecOutput aec = linaec_process(mic, far, cfg);
  if (!post) return aec.error_out;
  return post(aec.error_out);
}

}  // namespace daec
