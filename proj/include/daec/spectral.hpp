#pragma once

#include <complex>
#include <vector>

#include "daec/error.hpp"

namespace daec {

using cpx = std::complex<double>;

enum class WindowKind { kSqrtHann, kHann };

struct WindowConfig {
  int sample_rate_hz = 16000;
  int window_len_samples = 320;  // 20 ms
  int hop_samples = 160;         // 50% overlap
  WindowKind window_kind = WindowKind::kSqrtHann;

  int n_bins() const { return window_len_samples / 2 + 1; }
  void validate() const;
  bool operator==(const WindowConfig& o) const = default;
};

// Processing config used everywhere by default: 20 ms sqrt-Hann, 50% overlap.
WindowConfig processing_window();
// Loss-domain config: 64 ms Hann, 75% overlap.
WindowConfig loss_window();

// Complex one-sided time-frequency matrix, frames x bins, row-major.
struct Spectrogram {
  std::vector<cpx> data;
  int n_frames = 0;
  int n_bins = 0;
  WindowConfig config;

  Spectrogram() = default;
  Spectrogram(int frames, int bins, const WindowConfig& cfg)
      : data(static_cast<size_t>(frames) * bins, cpx(0.0, 0.0)),
        n_frames(frames),
        n_bins(bins),
        config(cfg) {}

  cpx& at(int t, int k) { return data[static_cast<size_t>(t) * n_bins + k]; }
  const cpx& at(int t, int k) const { return data[static_cast<size_t>(t) * n_bins + k]; }
  bool same_shape(const Spectrogram& o) const {
    return n_frames == o.n_frames && n_bins == o.n_bins;
  }
  void check_finite(const char* what) const;
};

// Causal convolutive cross-band filter: per TF bin, taps over 2K+1 neighbor
// frequencies and L+1 past frames. Tap (kappa, ell) multiplies the input at
// (k - kappa, n - ell); kappa runs -K..K, stored at index kappa + K.
struct DeepFilterCoeffs {
  std::vector<cpx> data;  // [n_frames][n_bins][2K+1][L+1]
  int n_frames = 0;
  int n_bins = 0;
  int k_neighbors = 1;
  int l_past = 2;

  DeepFilterCoeffs() = default;
  DeepFilterCoeffs(int frames, int bins, int k, int l)
      : data(static_cast<size_t>(frames) * bins * (2 * k + 1) * (l + 1), cpx(0.0, 0.0)),
        n_frames(frames),
        n_bins(bins),
        k_neighbors(k),
        l_past(l) {}

  int taps_per_bin() const { return (2 * k_neighbors + 1) * (l_past + 1); }
  cpx& at(int t, int k, int kappa_idx, int ell) {
    return data[((static_cast<size_t>(t) * n_bins + k) * (2 * k_neighbors + 1) + kappa_idx) *
                    (l_past + 1) +
                ell];
  }
  const cpx& at(int t, int k, int kappa_idx, int ell) const {
    return data[((static_cast<size_t>(t) * n_bins + k) * (2 * k_neighbors + 1) + kappa_idx) *
                    (l_past + 1) +
                ell];
  }
};

// ---- Analysis / synthesis ----

// Frame t covers samples [t*hop, t*hop + window). Throws if the signal is
// shorter than one window or contains non-finite samples.
Spectrogram stft(const std::vector<double>& signal, const WindowConfig& cfg);

// Weighted overlap-add with a per-sample normalized synthesis window; exact
// roundtrip on interior samples for any hop dividing the window length.
// Output length = (n_frames - 1) * hop + window.
std::vector<double> istft(const Spectrogram& spec, const WindowConfig& cfg);

// Adjoint of istft as a linear map: gradient w.r.t. the time signal ->
// gradient w.r.t. the spectrogram bins.
Spectrogram istft_adjoint(const std::vector<double>& grad_signal, int n_frames,
                          const WindowConfig& cfg);

// Adjoint of stft: gradient w.r.t. spectrogram bins -> gradient w.r.t. the
// time signal (length = (n_frames - 1) * hop + window).
std::vector<double> stft_adjoint(const Spectrogram& grad_spec, const WindowConfig& cfg);

// ---- Magnitude compression ----

// |X|^c e^{j phase}; zero stays zero, phase preserved. Requires 0 < c <= 1.
Spectrogram compress(const Spectrogram& spec, double c);
// |X|^{1/c} e^{j phase}; inverse of compress.
Spectrogram decompress(const Spectrogram& spec, double c);

// Adjoints of the above at the given input point. grad_out is the gradient at
// the op output; returns the gradient at the op input. At exact zeros the
// returned gradient is zero.
void compress_backward(const Spectrogram& input, const Spectrogram& grad_out, double c,
                       Spectrogram& grad_in);
void decompress_backward(const Spectrogram& input, const Spectrogram& grad_out, double c,
                         Spectrogram& grad_in);

// ---- Deep filtering ----

// out(k,n) = sum_{kappa,ell} G(k,n,kappa,ell) * in(k-kappa, n-ell); bins
// outside [0, n_bins) and frames before 0 contribute zero.
Spectrogram apply_deep_filter(const DeepFilterCoeffs& g, const Spectrogram& y);

// Gradients of apply_deep_filter w.r.t. both the coefficients and the input.
void deep_filter_backward(const DeepFilterCoeffs& g, const Spectrogram& y,
                          const Spectrogram& grad_out, DeepFilterCoeffs& grad_g,
                          Spectrogram& grad_y);

// ---- Echo subtraction ----

// E = Y - |Dc|^{1/c} e^{j phase(Dc)} with Dc in the compressed domain.
Spectrogram subtract_echo(const Spectrogram& y, const Spectrogram& d_hat_compressed,
                          double c);

}  // namespace daec
