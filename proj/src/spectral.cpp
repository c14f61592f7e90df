#include "daec/spectral.hpp"

#include <cmath>

#include "daec/fft.hpp"

namespace daec {

void WindowConfig::validate() const {
  require(sample_rate_hz > 0, "sample_rate_hz must be positive");
  require(window_len_samples > 0, "window_len_samples must be positive");
  require(hop_samples > 0, "hop_samples must be positive");
  require(window_len_samples % hop_samples == 0,
          "hop_samples must divide window_len_samples");
}

WindowConfig processing_window() { return WindowConfig{}; }

WindowConfig loss_window() {
  WindowConfig cfg;
  cfg.window_len_samples = 1024;  // 64 ms at 16 kHz
  cfg.hop_samples = 256;          // 75% overlap
  cfg.window_kind = WindowKind::kHann;
  return cfg;
}

void Spectrogram::check_finite(const char* what) const {
  for (const cpx& v : data) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError(std::string("non-finite value in ") + what);
    }
  }
}

namespace {

std::vector<double> analysis_window(const WindowConfig& cfg) {
  const int n = cfg.window_len_samples;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    double hann = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);  // periodic
    w[i] = cfg.window_kind == WindowKind::kSqrtHann ? std::sqrt(hann) : hann;
  }
  return w;
}

// Least-squares synthesis window: w_a / sum of squared shifted analysis
// windows. The denominator is constant within each congruence class mod hop,
// which makes interior reconstruction exact for any COLA-compatible config.
std::vector<double> synthesis_window(const WindowConfig& cfg,
                                     const std::vector<double>& wa) {
  const int n = cfg.window_len_samples;
  const int hop = cfg.hop_samples;
  std::vector<double> denom(hop, 0.0);
  for (int i = 0; i < n; ++i) denom[i % hop] += wa[i] * wa[i];
  std::vector<double> ws(n);
  for (int i = 0; i < n; ++i) {
    require(denom[i % hop] > 1e-12, "window/hop combination is not invertible");
    ws[i] = wa[i] / denom[i % hop];
  }
  return ws;
}

}  // namespace

Spectrogram stft(const std::vector<double>& signal, const WindowConfig& cfg) {
  cfg.validate();
  const int n = cfg.window_len_samples;
  const int hop = cfg.hop_samples;
  require(static_cast<int>(signal.size()) >= n,
          "signal shorter than one analysis window");
  for (double v : signal) {
    if (!std::isfinite(v)) throw NumericalError("non-finite sample in stft input");
  }

  const int n_frames = 1 + (static_cast<int>(signal.size()) - n) / hop;
  const std::vector<double> wa = analysis_window(cfg);
  Fft fft(n);
  Spectrogram out(n_frames, fft.bins(), cfg);

  std::vector<double> frame(n);
  for (int t = 0; t < n_frames; ++t) {
    const double* seg = signal.data() + static_cast<size_t>(t) * hop;
    for (int i = 0; i < n; ++i) frame[i] = seg[i] * wa[i];
    fft.rfft(frame.data(), &out.at(t, 0));
  }
  return out;
}

std::vector<double> istft(const Spectrogram& spec, const WindowConfig& cfg) {
  cfg.validate();
  require(spec.config == cfg, "spectrogram/config mismatch in istft");
  require(spec.n_bins == cfg.n_bins(), "spectrogram bin count does not match config");
  const int n = cfg.window_len_samples;
  const int hop = cfg.hop_samples;
  const std::vector<double> wa = analysis_window(cfg);
  const std::vector<double> ws = synthesis_window(cfg, wa);
  Fft fft(n);

  std::vector<double> out(static_cast<size_t>(spec.n_frames - 1) * hop + n, 0.0);
  std::vector<double> frame(n);
  for (int t = 0; t < spec.n_frames; ++t) {
    fft.irfft(&spec.at(t, 0), frame.data());
    double* dst = out.data() + static_cast<size_t>(t) * hop;
    for (int i = 0; i < n; ++i) dst[i] += frame[i] * ws[i];
  }
  return out;
}

Spectrogram istft_adjoint(const std::vector<double>& grad_signal, int n_frames,
                          const WindowConfig& cfg) {
  cfg.validate();
  const int n = cfg.window_len_samples;
  const int hop = cfg.hop_samples;
  require(static_cast<int>(grad_signal.size()) >= (n_frames - 1) * hop + n,
          "grad signal shorter than istft output");
  const std::vector<double> wa = analysis_window(cfg);
  const std::vector<double> ws = synthesis_window(cfg, wa);
  Fft fft(n);
  const int nb = fft.bins();

  Spectrogram grad(n_frames, nb, cfg);
  std::vector<double> seg(n);
  std::vector<cpx> v(nb);
  for (int t = 0; t < n_frames; ++t) {
    const double* src = grad_signal.data() + static_cast<size_t>(t) * hop;
    for (int i = 0; i < n; ++i) seg[i] = src[i] * ws[i];
    fft.rfft(seg.data(), v.data());
    for (int k = 0; k < nb; ++k) {
      const bool edge = (k == 0 || k == nb - 1);
      const double ar = (edge ? 1.0 : 2.0) / n;
      const double ai = (edge ? 0.0 : 2.0) / n;
      grad.at(t, k) = cpx(ar * v[k].real(), ai * v[k].imag());
    }
  }
  return grad;
}

std::vector<double> stft_adjoint(const Spectrogram& grad_spec, const WindowConfig& cfg) {
  cfg.validate();
  const int n = cfg.window_len_samples;
  const int hop = cfg.hop_samples;
  const std::vector<double> wa = analysis_window(cfg);
  Fft fft(n);

  std::vector<double> out(static_cast<size_t>(grad_spec.n_frames - 1) * hop + n, 0.0);
  std::vector<double> frame(n);
  for (int t = 0; t < grad_spec.n_frames; ++t) {
    fft.onesided_sum_real(&grad_spec.at(t, 0), frame.data());
    double* dst = out.data() + static_cast<size_t>(t) * hop;
    for (int i = 0; i < n; ++i) dst[i] += frame[i] * wa[i];
  }
  return out;
}

namespace {

Spectrogram power_map(const Spectrogram& spec, double expo) {
  Spectrogram out(spec.n_frames, spec.n_bins, spec.config);
  const size_t n = spec.data.size();
  for (size_t i = 0; i < n; ++i) {
    const cpx z = spec.data[i];
    const double m = std::abs(z);
    out.data[i] = (m > 0.0) ? std::pow(m, expo - 1.0) * z : cpx(0.0, 0.0);
  }
  out.check_finite("magnitude power map");
  return out;
}

// Adjoint of z -> |z|^{p-1} z (symmetric Jacobian). Zero at exact zeros. The
// direction z/|z| is factored out so pow never sees exponents below p-1.
void power_map_backward(const Spectrogram& input, const Spectrogram& grad_out,
                        double expo, Spectrogram& grad_in) {
  require(input.same_shape(grad_out), "shape mismatch in power map backward");
  grad_in = Spectrogram(input.n_frames, input.n_bins, input.config);
  const size_t n = input.data.size();
  for (size_t i = 0; i < n; ++i) {
    const cpx z = input.data[i];
    const double m = std::abs(z);
    if (m == 0.0) continue;
    const cpx g = grad_out.data[i];
    const double ux = z.real() / m;
    const double uy = z.imag() / m;
    const double m1 = std::pow(m, expo - 1.0);
    const double dot = ux * g.real() + uy * g.imag();
    grad_in.data[i] = cpx(m1 * (g.real() + (expo - 1.0) * dot * ux),
                          m1 * (g.imag() + (expo - 1.0) * dot * uy));
  }
}

}  // namespace

Spectrogram compress(const Spectrogram& spec, double c) {
  require(c > 0.0 && c <= 1.0, "compression exponent must be in (0, 1]");
  return power_map(spec, c);
}

Spectrogram decompress(const Spectrogram& spec, double c) {
  require(c > 0.0 && c <= 1.0, "compression exponent must be in (0, 1]");
  return power_map(spec, 1.0 / c);
}

void compress_backward(const Spectrogram& input, const Spectrogram& grad_out, double c,
                       Spectrogram& grad_in) {
  require(c > 0.0 && c <= 1.0, "compression exponent must be in (0, 1]");
  power_map_backward(input, grad_out, c, grad_in);
}

void decompress_backward(const Spectrogram& input, const Spectrogram& grad_out, double c,
                         Spectrogram& grad_in) {
  require(c > 0.0 && c <= 1.0, "compression exponent must be in (0, 1]");
  power_map_backward(input, grad_out, 1.0 / c, grad_in);
}

Spectrogram apply_deep_filter(const DeepFilterCoeffs& g, const Spectrogram& y) {
  require(g.n_frames == y.n_frames && g.n_bins == y.n_bins,
          "deep filter / spectrogram shape mismatch");
  const int K = g.k_neighbors;
  const int L = g.l_past;
  Spectrogram out(y.n_frames, y.n_bins, y.config);
  for (int t = 0; t < y.n_frames; ++t) {
    for (int k = 0; k < y.n_bins; ++k) {
      cpx acc(0.0, 0.0);
      for (int ki = 0; ki <= 2 * K; ++ki) {
        const int src_k = k - (ki - K);
        if (src_k < 0 || src_k >= y.n_bins) continue;
        for (int l = 0; l <= L; ++l) {
          const int src_t = t - l;
          if (src_t < 0) break;
          acc += g.at(t, k, ki, l) * y.at(src_t, src_k);
        }
      }
      out.at(t, k) = acc;
    }
  }
  out.check_finite("deep filter output");
  return out;
}

void deep_filter_backward(const DeepFilterCoeffs& g, const Spectrogram& y,
                          const Spectrogram& grad_out, DeepFilterCoeffs& grad_g,
                          Spectrogram& grad_y) {
  require(g.n_frames == y.n_frames && g.n_bins == y.n_bins,
          "deep filter / spectrogram shape mismatch");
  require(grad_out.same_shape(y), "grad shape mismatch in deep filter backward");
  const int K = g.k_neighbors;
  const int L = g.l_past;
  grad_g = DeepFilterCoeffs(g.n_frames, g.n_bins, K, L);
  grad_y = Spectrogram(y.n_frames, y.n_bins, y.config);
  for (int t = 0; t < y.n_frames; ++t) {
    for (int k = 0; k < y.n_bins; ++k) {
      const cpx go = grad_out.at(t, k);
      if (go == cpx(0.0, 0.0)) continue;
      for (int ki = 0; ki <= 2 * K; ++ki) {
        const int src_k = k - (ki - K);
        if (src_k < 0 || src_k >= y.n_bins) continue;
        for (int l = 0; l <= L; ++l) {
          const int src_t = t - l;
          if (src_t < 0) break;
          grad_g.at(t, k, ki, l) += go * std::conj(y.at(src_t, src_k));
          grad_y.at(src_t, src_k) += go * std::conj(g.at(t, k, ki, l));
        }
      }
    }
  }
}

Spectrogram subtract_echo(const Spectrogram& y, const Spectrogram& d_hat_compressed,
                          double c) {
  require(y.same_shape(d_hat_compressed), "shape mismatch in subtract_echo");
  Spectrogram d_lin = decompress(d_hat_compressed, c);
  Spectrogram out(y.n_frames, y.n_bins, y.config);
  for (size_t i = 0; i < y.data.size(); ++i) out.data[i] = y.data[i] - d_lin.data[i];
  out.check_finite("echo-subtracted spectrum");
  return out;
}

}  // namespace daec
