#include "daec/losses.hpp"

#include <cmath>
#include <complex>

#include "daec/error.hpp"

namespace daec {

void LossWeights::validate() const {
  require(alpha >= 0.0 && alpha <= 1.0, "loss alpha must lie in [0, 1]");
  require(beta >= 0.0, "loss beta must be non-negative");
  require(gamma_min > 0.0, "loss gamma_min must be positive");
  require(eta > 0.0, "loss eta must be positive");
  require(c > 0.0 && c <= 1.0, "compression exponent must lie in (0, 1]");
}

namespace {

// Shared analysis for the two spectral speech losses: compressed spectra of
// estimate and target at the loss resolution.
struct SpeechAnalysis {
  Spectrogram sh;   // linear estimate spectrum
  Spectrogram shc;  // compressed estimate
  Spectrogram ssc;  // compressed target
};

SpeechAnalysis analyze_pair(const std::vector<double>& s_hat,
                            const std::vector<double>& s, double c,
                            const WindowConfig& cfg) {
  require(s_hat.size() == s.size(),
          "speech loss needs estimate and target of equal length");
  SpeechAnalysis a;
  a.sh = stft(s_hat, cfg);
  Spectrogram ss = stft(s, cfg);
  a.shc = compress(a.sh, c);
  a.ssc = compress(ss, c);
  return a;
}

// Chains a gradient at the compressed estimate spectrum back to the s_hat
// samples, zero-padded to the original signal length.
std::vector<double> grad_to_samples(const Spectrogram& sh_linear,
                                    const Spectrogram& g_compressed, double c,
                                    std::size_t signal_len) {
  Spectrogram g_linear;
  compress_backward(sh_linear, g_compressed, c, g_linear);
  std::vector<double> g = stft_adjoint(g_linear, sh_linear.config);
  require(g.size() <= signal_len, "analysis gradient longer than the signal");
  g.resize(signal_len, 0.0);
  return g;
}

}  // namespace

double ccmse(const std::vector<double>& s_hat, const std::vector<double>& s,
             const LossWeights& w, const WindowConfig& loss_cfg,
             std::vector<double>* grad_s_hat) {
  SpeechAnalysis a = analyze_pair(s_hat, s, w.c, loss_cfg);
  const std::size_t n = a.shc.data.size();
  Spectrogram g_shc;
  if (grad_s_hat != nullptr) {
    g_shc = Spectrogram(a.shc.n_frames, a.shc.n_bins, loss_cfg);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> diff = a.shc.data[i] - a.ssc.data[i];
    const double mh = std::abs(a.shc.data[i]);
    const double ms = std::abs(a.ssc.data[i]);
    const double mdiff = mh - ms;
    value += w.alpha * std::norm(diff) + (1.0 - w.alpha) * mdiff * mdiff;
    if (grad_s_hat != nullptr) {
      std::complex<double> unit(0.0, 0.0);
      if (mh > 0.0) unit = a.shc.data[i] / mh;
      g_shc.data[i] =
          2.0 * w.alpha * diff + 2.0 * (1.0 - w.alpha) * mdiff * unit;
    }
  }
  if (grad_s_hat != nullptr) {
    *grad_s_hat = grad_to_samples(a.sh, g_shc, w.c, s_hat.size());
  }
  return value;
}

double asym_penalty(const std::vector<double>& s_hat, const std::vector<double>& s,
                    const LossWeights& w, const WindowConfig& loss_cfg,
                    std::vector<double>* grad_s_hat) {
  SpeechAnalysis a = analyze_pair(s_hat, s, w.c, loss_cfg);
  const std::size_t n = a.shc.data.size();
  Spectrogram g_shc;
  if (grad_s_hat != nullptr) {
    g_shc = Spectrogram(a.shc.n_frames, a.shc.n_bins, loss_cfg);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mh = std::abs(a.shc.data[i]);
    const double ms = std::abs(a.ssc.data[i]);
    const double under = ms - mh;  // positive where the estimate fell short
    if (under <= 0.0) continue;
    value += under * under;
    if (grad_s_hat != nullptr && mh > 0.0) {
      g_shc.data[i] = -2.0 * under * (a.shc.data[i] / mh);
    }
  }
  if (grad_s_hat != nullptr) {
    *grad_s_hat = grad_to_samples(a.sh, g_shc, w.c, s_hat.size());
  }
  return value;
}

double echo_mae(const Spectrogram& d_hat, const Spectrogram& d,
                Spectrogram* grad_d_hat) {
  require(d_hat.same_shape(d), "echo loss needs spectra of equal shape");
  if (grad_d_hat != nullptr) {
    *grad_d_hat = Spectrogram(d_hat.n_frames, d_hat.n_bins, d_hat.config);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < d_hat.data.size(); ++i) {
    const std::complex<double> diff = d_hat.data[i] - d.data[i];
    const double m = std::abs(diff);
    value += m;
    if (grad_d_hat != nullptr && m > 0.0) {
      grad_d_hat->data[i] = diff / m;  // subgradient 0 at exact agreement
    }
  }
  return value;
}

double echo_abs_residual(const Spectrogram& d_hat, const Spectrogram& d) {
  return echo_mae(d_hat, d, nullptr);
}

double echo_abs_total(const Spectrogram& d) {
  double total = 0.0;
  for (const auto& z : d.data) total += std::abs(z);
  return total;
}

double gamma_from_sums(double residual, double total, const LossWeights& w) {
  require(residual >= 0.0 && total >= 0.0,
          "echo-weight sums must be non-negative");
  if (total <= 0.0) return w.gamma_min;
  return std::max(w.eta * residual / total, w.gamma_min);
}

double adaptive_gamma(const Spectrogram& d_hat, const Spectrogram& d,
                      const LossWeights& w) {
  return gamma_from_sums(echo_abs_residual(d_hat, d), echo_abs_total(d), w);
}

LossTerms total_loss(const std::vector<double>& s_hat, const std::vector<double>& s,
                     const Spectrogram* d_hat, const Spectrogram* d,
                     const LossWeights& w, const WindowConfig& loss_cfg,
                     GammaMode gamma_mode, double fixed_gamma,
                     SceneLossGrads* grads) {
  w.validate();
  require((d_hat == nullptr) == (d == nullptr),
          "echo estimate and reference must be supplied together");
  LossTerms t;
  std::vector<double>* g_speech = grads != nullptr ? &grads->g_s_hat : nullptr;
  std::vector<double> g_asym;
  t.ccmse = ccmse(s_hat, s, w, loss_cfg, g_speech);
  t.asym = asym_penalty(s_hat, s, w, loss_cfg,
                        grads != nullptr ? &g_asym : nullptr);
  if (grads != nullptr) {
    for (std::size_t i = 0; i < grads->g_s_hat.size(); ++i) {
      grads->g_s_hat[i] += w.beta * g_asym[i];
    }
  }
  if (d_hat != nullptr) {
    if (gamma_mode == GammaMode::kAdaptive) {
      t.gamma = adaptive_gamma(*d_hat, *d, w);
    } else {
      require(fixed_gamma >= 0.0, "fixed echo weight must be non-negative");
      t.gamma = fixed_gamma;
    }
    Spectrogram* g_echo = grads != nullptr ? &grads->g_d_hat : nullptr;
    t.echo_mae = echo_mae(*d_hat, *d, g_echo);
    if (grads != nullptr) {
      for (auto& z : grads->g_d_hat.data) z *= t.gamma;
    }
  } else if (grads != nullptr) {
    grads->g_d_hat = Spectrogram();
  }
  t.total = t.ccmse + w.beta * t.asym + t.gamma * t.echo_mae;
  return t;
}

}  // namespace daec
