#pragma once

#include <vector>

#include "daec/spectral.hpp"

namespace daec {

struct LossWeights {
  double alpha = 0.3;      // complex/magnitude blend inside the speech loss
  double beta = 1.0;       // over-suppression penalty weight
  double gamma_min = 0.05; // echo-term floor
  double eta = 1e-5;       // adaptive echo-weight scale
  double c = 0.3;          // magnitude compression exponent

  void validate() const;
};

enum class GammaMode { kAdaptive, kFixed };

// ---- Speech loss ----
// Both signals are re-analyzed at the loss STFT resolution (64 ms Hann, 75%
// overlap by default). Value:
//   sum alpha*| |S^|^c e^{j ph_s^} - |S|^c e^{j ph_s} |^2
//     + (1-alpha)*( |S^|^c - |S|^c )^2
// The optional gradient is w.r.t. the s_hat samples, chained through the
// compression and the analysis transform; it has the same length as s_hat
// (samples beyond the last full window get zero gradient).
double ccmse(const std::vector<double>& s_hat, const std::vector<double>& s,
             const LossWeights& w, const WindowConfig& loss_cfg,
             std::vector<double>* grad_s_hat = nullptr);

// Penalizes only bins where the estimate's compressed magnitude falls below
// the target's: sum max(|S|^c - |S^|^c, 0)^2. Same domain and gradient
// conventions as ccmse; the beta weight is applied by total_loss, not here.
double asym_penalty(const std::vector<double>& s_hat, const std::vector<double>& s,
                    const LossWeights& w, const WindowConfig& loss_cfg,
                    std::vector<double>* grad_s_hat = nullptr);

// ---- Echo loss ----
// Mean-absolute error between linear-domain complex echo spectra at the
// processing resolution: sum |D^ - D|. Subgradient 0 where D^ == D exactly.
double echo_mae(const Spectrogram& d_hat, const Spectrogram& d,
                Spectrogram* grad_d_hat = nullptr);

// ---- Adaptive echo weight ----
// gamma = max(eta * sum|D^-D| / sum|D|, gamma_min); treated as a constant
// coefficient (nothing differentiates through it). sum|D| == 0 yields
// gamma_min. The sum-based form lets a batch aggregate before dividing.
double echo_abs_residual(const Spectrogram& d_hat, const Spectrogram& d);
double echo_abs_total(const Spectrogram& d);
double gamma_from_sums(double residual, double total, const LossWeights& w);
double adaptive_gamma(const Spectrogram& d_hat, const Spectrogram& d,
                      const LossWeights& w);

// ---- Combined loss ----
struct LossTerms {
  double ccmse = 0.0;
  double asym = 0.0;
  double echo_mae = 0.0;
  double gamma = 0.0;
  double total = 0.0;  // ccmse + beta*asym + gamma*echo_mae
};

struct SceneLossGrads {
  std::vector<double> g_s_hat;  // d total / d s_hat samples
  Spectrogram g_d_hat;          // d total / d linear echo-estimate bins
};

// Single-scene combination. d_hat/d may be null together (no echo path, e.g.
// a single-stage model): the echo term is then 0 and gamma reported as 0.
// In adaptive mode gamma comes from this scene's own sums; pass kFixed with
// an explicit value to pin it (batch-level gamma is assembled by the caller
// from the sum helpers above).
LossTerms total_loss(const std::vector<double>& s_hat, const std::vector<double>& s,
                     const Spectrogram* d_hat, const Spectrogram* d,
                     const LossWeights& w, const WindowConfig& loss_cfg,
                     GammaMode gamma_mode, double fixed_gamma,
                     SceneLossGrads* grads = nullptr);

}  // namespace daec
