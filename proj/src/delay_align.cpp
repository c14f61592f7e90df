#include "daec/delay_align.hpp"

#include <cmath>
#include <fstream>

namespace daec {

void MscConfig::validate(const WindowConfig& wcfg) const {
  require(search_window_s > 0.0, "search window must be positive");
  require(max_delay_frames >= 0, "max_delay_frames must be >= 0");
  require(smoothing_coeff >= 0.0 && smoothing_coeff < 1.0,
          "smoothing_coeff must be in [0, 1)");
  const double hop_s = static_cast<double>(wcfg.hop_samples) / wcfg.sample_rate_hz;
  require(max_delay_frames * hop_s <= search_window_s + 1e-9,
          "max delay exceeds the search window");
}

double MscConfig::lambda(const WindowConfig& wcfg) const {
  if (smoothing_coeff > 0.0) return smoothing_coeff;
  const double hop_s = static_cast<double>(wcfg.hop_samples) / wcfg.sample_rate_hz;
  // First-order smoothing with effective averaging length of one search window.
  return 1.0 - hop_s / search_window_s;
}

int MscConfig::warmup_frames(const WindowConfig& wcfg) const {
  const double hop_s = static_cast<double>(wcfg.hop_samples) / wcfg.sample_rate_hz;
  return static_cast<int>(std::lround(search_window_s / hop_s));
}

DelayEstimator::DelayEstimator(const WindowConfig& wcfg, const MscConfig& cfg) {
  wcfg.validate();
  cfg.validate(wcfg);
  n_bins_ = wcfg.n_bins();
  max_delay_ = cfg.max_delay_frames;
  lambda_ = cfg.lambda(wcfg);
  eps_ = cfg.eps;
  warmup_frames_ = cfg.warmup_frames(wcfg);
  far_history_.assign(static_cast<size_t>(max_delay_ + 1) * n_bins_, cpx(0.0, 0.0));
  cross_.assign(static_cast<size_t>(max_delay_ + 1) * n_bins_, cpx(0.0, 0.0));
  auto_far_.assign(static_cast<size_t>(max_delay_ + 1) * n_bins_, 0.0);
  auto_mic_.assign(n_bins_, 0.0);
}

int DelayEstimator::push_frame(const cpx* mic, const cpx* far) {
  const int slot = frames_seen_ % (max_delay_ + 1);
  std::copy(far, far + n_bins_, far_history_.begin() + static_cast<size_t>(slot) * n_bins_);
  if (history_fill_ <= max_delay_) ++history_fill_;

  const double a = lambda_;
  const double b = 1.0 - lambda_;
  for (int k = 0; k < n_bins_; ++k) {
    auto_mic_[k] = a * auto_mic_[k] + b * std::norm(mic[k]);
  }

  const int usable = std::min(history_fill_ - 1, max_delay_);
  int best_delta = 0;
  double best_msc = -1.0;
  for (int delta = 0; delta <= max_delay_; ++delta) {
    cpx* cr = cross_.data() + static_cast<size_t>(delta) * n_bins_;
    double* af = auto_far_.data() + static_cast<size_t>(delta) * n_bins_;
    double num = 0.0, den = 0.0;
    if (delta <= usable) {
      const int src_slot = (frames_seen_ - delta) % (max_delay_ + 1);
      const cpx* uf = far_history_.data() + static_cast<size_t>(src_slot) * n_bins_;
      for (int k = 0; k < n_bins_; ++k) {
        cr[k] = a * cr[k] + b * mic[k] * std::conj(uf[k]);
        af[k] = a * af[k] + b * std::norm(uf[k]);
        num += std::norm(cr[k]);
        den += auto_mic_[k] * af[k];
      }
    } else {
      for (int k = 0; k < n_bins_; ++k) {
        cr[k] *= a;
        af[k] *= a;
        num += std::norm(cr[k]);
        den += auto_mic_[k] * af[k];
      }
    }
    // Band-aggregated coherence: the auto spectra pair up per bin so a fully
    // coherent pair scores 1 regardless of spectral shape.
    const double msc = num / (den + eps_);
    if (msc > best_msc) {
      best_msc = msc;
      best_delta = delta;
    }
  }

  ++frames_seen_;
  // During far-end silence the coherence collapses everywhere; hold the last
  // confident estimate instead of drifting to the tie-break default.
  if (best_msc >= 0.1 * peak_high_water_ || frames_seen_ <= 1) {
    current_delay_ = best_delta;
  }
  current_peak_ = best_msc;
  if (best_msc > peak_high_water_) peak_high_water_ = best_msc;
  return current_delay_;
}

DelayTrack estimate_delay(const Spectrogram& mic, const Spectrogram& far,
                          const MscConfig& cfg) {
  require(mic.config == far.config, "mic/far window config mismatch");
  require(mic.same_shape(far), "mic/far shape mismatch");
  DelayEstimator est(mic.config, cfg);
  DelayTrack track;
  track.delay_frames.resize(mic.n_frames);
  track.msc_peak.resize(mic.n_frames);
  track.warmup.resize(mic.n_frames);
  for (int t = 0; t < mic.n_frames; ++t) {
    track.warmup[t] = est.in_warmup();
    track.delay_frames[t] = est.push_frame(&mic.at(t, 0), &far.at(t, 0));
    track.msc_peak[t] = est.current_peak();
  }
  return track;
}

Spectrogram align_farend(const Spectrogram& far, const DelayTrack& track) {
  require(static_cast<int>(track.delay_frames.size()) == far.n_frames,
          "delay track length does not match spectrogram");
  Spectrogram out(far.n_frames, far.n_bins, far.config);
  for (int t = 0; t < far.n_frames; ++t) {
    const int src = t - track.delay_frames[t];
    if (src < 0) continue;
    for (int k = 0; k < far.n_bins; ++k) out.at(t, k) = far.at(src, k);
  }
  return out;
}

void write_delay_csv(const std::string& path, const DelayTrack& track) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write delay csv: " + path);
  os << "frame_index,delay_frames,msc_peak\n";
  for (size_t t = 0; t < track.delay_frames.size(); ++t) {
    os << t << "," << track.delay_frames[t] << "," << track.msc_peak[t] << "\n";
  }
}

}  // namespace daec
