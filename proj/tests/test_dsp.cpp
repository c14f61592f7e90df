#include <cmath>
#include <cstdio>
#include <filesystem>

#include "daec/fft.hpp"
#include "daec/spectral.hpp"
#include "daec/wav.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace daec;
using namespace daec::testutil;

TEST_CASE("wav float32 roundtrip preserves samples") {
  const std::string path = "/tmp/daec_test_f32.wav";
  WavData w;
  w.sample_rate_hz = 16000;
  w.samples = random_signal(11, 2048, 0.8);
  write_wav(path, w.samples, w.sample_rate_hz, WavFormat::kFloat32);
  WavData r = read_wav(path);
  CHECK(r.sample_rate_hz == 16000);
  REQUIRE(r.samples.size() == w.samples.size());
  for (size_t i = 0; i < r.samples.size(); ++i) {
    CHECK(std::abs(r.samples[i] - w.samples[i]) < 1e-7);
  }
  std::filesystem::remove(path);
}

TEST_CASE("wav pcm16 roundtrip within quantization step") {
  const std::string path = "/tmp/daec_test_p16.wav";
  WavData w;
  w.sample_rate_hz = 16000;
  w.samples = random_signal(12, 4000, 0.9);
  write_wav(path, w.samples, w.sample_rate_hz, WavFormat::kPcm16);
  WavData r = read_wav(path);
  REQUIRE(r.samples.size() == w.samples.size());
  for (size_t i = 0; i < r.samples.size(); ++i) {
    CHECK(std::abs(r.samples[i] - w.samples[i]) < 1.0 / 32768.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects missing files") {
  CHECK_THROWS_AS(read_wav("/tmp/daec_no_such_file.wav"), IoError);
}

TEST_CASE("rfft matches the direct transform") {
  for (int n : {16, 320, 640}) {
    const std::vector<double> x = random_signal(100 + n, n, 1.0);
    Fft fft(n);
    std::vector<cpx> got(fft.bins());
    fft.rfft(x.data(), got.data());
    std::vector<cpx> want;
    naive_rdft(x, want);
    for (int k = 0; k < fft.bins(); ++k) {
      CHECK(std::abs(got[k] - want[k]) < 1e-9 * n);
    }
  }
}

TEST_CASE("irfft inverts rfft") {
  const int n = 320;
  const std::vector<double> x = random_signal(7, n, 1.0);
  Fft fft(n);
  std::vector<cpx> spec(fft.bins());
  std::vector<double> back(n);
  fft.rfft(x.data(), spec.data());
  fft.irfft(spec.data(), back.data());
  CHECK(max_abs_diff(x, back) < 1e-12);
}

TEST_CASE("onesided_sum_real matches the direct sum") {
  const int n = 16;
  Rng rng(55);
  std::vector<cpx> in(n / 2 + 1);
  for (cpx& v : in) v = cpx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  Fft fft(n);
  std::vector<double> got(n);
  fft.onesided_sum_real(in.data(), got.data());
  for (int i = 0; i < n; ++i) {
    double want = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
      const double th = 2.0 * M_PI * k * i / n;
      want += in[k].real() * std::cos(th) - in[k].imag() * std::sin(th);
    }
    CHECK(std::abs(got[i] - want) < 1e-10);
  }
}

TEST_CASE("fft_convolve matches the direct convolution") {
  const std::vector<double> x = random_signal(31, 1000, 1.0);
  for (size_t hl : {1u, 50u, 333u, 2048u}) {
    const std::vector<double> h = random_signal(32 + hl, hl, 1.0);
    const std::vector<double> got = fft_convolve(x, h);
    const std::vector<double> want = naive_convolve(x, h);
    REQUIRE(got.size() == want.size());
    CHECK(max_abs_diff(got, want) < 1e-9);
  }
}

TEST_CASE("stft of silence is silent and rejects bad input") {
  const WindowConfig cfg = processing_window();
  const std::vector<double> zeros(3200, 0.0);
  const Spectrogram s = stft(zeros, cfg);
  for (const cpx& v : s.data) CHECK(std::abs(v) == 0.0);

  CHECK_THROWS_AS(stft(std::vector<double>(100, 0.0), cfg), ConfigError);
  std::vector<double> bad(1000, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(stft(bad, cfg), NumericalError);
}

TEST_CASE("stft concentrates a bin-aligned sinusoid") {
  const WindowConfig cfg = processing_window();
  const int bin = 10;
  const double f = static_cast<double>(bin) * cfg.sample_rate_hz / cfg.window_len_samples;
  std::vector<double> x(16000);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = std::sin(2.0 * M_PI * f * static_cast<double>(i) / cfg.sample_rate_hz);
  }
  const Spectrogram s = stft(x, cfg);
  const int t = s.n_frames / 2;
  double total = 0.0, near = 0.0;
  for (int k = 0; k < s.n_bins; ++k) {
    const double e = std::norm(s.at(t, k));
    total += e;
    if (std::abs(k - bin) <= 1) near += e;
  }
  CHECK(near / total > 0.95);
}

TEST_CASE("istft reconstructs interior samples for every window config") {
  struct Case {
    WindowConfig cfg;
    size_t len;
  };
  WindowConfig linaec_cfg;
  linaec_cfg.window_len_samples = 640;
  linaec_cfg.hop_samples = 160;
  linaec_cfg.window_kind = WindowKind::kHann;
  const Case cases[] = {
      {processing_window(), 16000},
      {loss_window(), 15872},
      {linaec_cfg, 16000},
  };
  for (const Case& c : cases) {
    const std::vector<double> x = random_signal(c.len, c.len, 0.7);
    const Spectrogram s = stft(x, c.cfg);
    const std::vector<double> y = istft(s, c.cfg);
    const int n = c.cfg.window_len_samples;
    double max_rel = 0.0;
    const double scale = max_abs(x);
    for (size_t i = n; i + n < y.size(); ++i) {
      max_rel = std::max(max_rel, std::abs(y[i] - x[i]) / scale);
    }
    CHECK(max_rel < 1e-6);
  }
}

TEST_CASE("istft of silence is silent and configs must match") {
  const WindowConfig cfg = processing_window();
  const Spectrogram zero(5, cfg.n_bins(), cfg);
  const std::vector<double> y = istft(zero, cfg);
  for (double v : y) CHECK(v == 0.0);

  WindowConfig other = cfg;
  other.hop_samples = 80;
  CHECK_THROWS_AS(istft(zero, other), ConfigError);
}

TEST_CASE("single-frame roundtrip applies the squared analysis window") {
  // With the sqrt-Hann analysis/synthesis pair at 50% overlap, one frame of
  // an impulse comes back scaled by the plain Hann value at its position.
  const WindowConfig cfg = processing_window();
  const int n = cfg.window_len_samples;
  std::vector<double> x(n, 0.0);
  const int at = 100;
  x[at] = 1.0;
  const Spectrogram s = stft(x, cfg);
  REQUIRE(s.n_frames == 1);
  const std::vector<double> y = istft(s, cfg);
  const double hann = 0.5 - 0.5 * std::cos(2.0 * M_PI * at / n);
  for (int i = 0; i < n; ++i) {
    const double want = i == at ? hann : 0.0;
    CHECK(std::abs(y[i] - want) < 1e-12);
  }
}

TEST_CASE("stft and istft adjoints satisfy the inner-product identity") {
  const WindowConfig cfg = processing_window();
  const size_t len = 3200;
  const int frames = 1 + (static_cast<int>(len) - cfg.window_len_samples) / cfg.hop_samples;

  // <istft(X), g> == <X, istft_adjoint(g)>
  const Spectrogram x_spec = random_spectrogram(21, frames, cfg.n_bins(), cfg);
  const std::vector<double> g = random_signal(22, len);
  const std::vector<double> ix = istft(x_spec, cfg);
  const Spectrogram adj = istft_adjoint(g, frames, cfg);
  const double lhs = dot_r(ix, g);
  const double rhs = dot_r(x_spec, adj);
  CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));

  // <stft(x), G> == <x, stft_adjoint(G)>
  const std::vector<double> x = random_signal(23, len);
  const Spectrogram gs = random_spectrogram(24, frames, cfg.n_bins(), cfg);
  const Spectrogram sx = stft(x, cfg);
  const std::vector<double> adj2 = stft_adjoint(gs, cfg);
  const double lhs2 = dot_r(sx, gs);
  const double rhs2 = dot_r(x, adj2);
  CHECK(std::abs(lhs2 - rhs2) < 1e-9 * std::max(1.0, std::abs(lhs2)));
}

TEST_CASE("compress maps magnitude and keeps phase") {
  const WindowConfig cfg = processing_window();
  Spectrogram s(1, 4, cfg);
  s.at(0, 0) = std::polar(1.0, 2.1);
  s.at(0, 1) = cpx(0.0, 0.0);
  s.at(0, 2) = std::polar(8.0, M_PI / 2.0);
  s.at(0, 3) = std::polar(2.0, -0.7);

  const Spectrogram c03 = compress(s, 0.3);
  CHECK(std::abs(c03.at(0, 0) - std::polar(1.0, 2.1)) < 1e-12);
  CHECK(std::abs(c03.at(0, 1)) == 0.0);
  CHECK(std::abs(std::abs(c03.at(0, 2)) - std::pow(8.0, 0.3)) < 1e-12);
  CHECK(std::abs(std::arg(c03.at(0, 2)) - M_PI / 2.0) < 1e-12);

  const Spectrogram d05 = decompress(s, 0.5);
  CHECK(std::abs(std::abs(d05.at(0, 3)) - 4.0) < 1e-12);

  CHECK_THROWS_AS(compress(s, 0.0), ConfigError);
  CHECK_THROWS_AS(compress(s, -0.3), ConfigError);
}

TEST_CASE("decompress inverts compress to machine precision") {
  const WindowConfig cfg = processing_window();
  const Spectrogram s = random_spectrogram(31, 6, cfg.n_bins(), cfg, 2.0);
  const Spectrogram back = decompress(compress(s, 0.3), 0.3);
  for (size_t i = 0; i < s.data.size(); ++i) {
    const double mag = std::abs(s.data[i]);
    CHECK(std::abs(back.data[i] - s.data[i]) < 1e-12 * std::max(1.0, mag));
  }
}

TEST_CASE("compression adjoints match central finite differences") {
  const WindowConfig cfg = processing_window();
  const int frames = 3, bins = 8;
  Rng rng(41);
  Spectrogram x(frames, bins, cfg);
  for (cpx& v : x.data) {
    // Keep magnitudes away from 0 where the map is non-differentiable.
    v = std::polar(rng.uniform(0.2, 2.5), rng.uniform(-M_PI, M_PI));
  }
  const Spectrogram w = random_spectrogram(42, frames, bins, cfg);

  struct Op {
    double expo_c;
    bool is_compress;
  };
  for (const Op op : {Op{0.3, true}, Op{0.3, false}, Op{0.5, true}}) {
    auto loss = [&](const Spectrogram& in) {
      const Spectrogram out =
          op.is_compress ? compress(in, op.expo_c) : decompress(in, op.expo_c);
      return dot_r(out, w);
    };
    Spectrogram grad;
    if (op.is_compress) {
      compress_backward(x, w, op.expo_c, grad);
    } else {
      decompress_backward(x, w, op.expo_c, grad);
    }
    Rng pick(43);
    for (int trial = 0; trial < 12; ++trial) {
      const int idx = pick.randint(0, frames * bins - 1);
      const bool imag = pick.chance(0.5);
      const double eps = 1e-6;
      Spectrogram xp = x, xm = x;
      if (imag) {
        xp.data[idx] += cpx(0.0, eps);
        xm.data[idx] -= cpx(0.0, eps);
      } else {
        xp.data[idx] += cpx(eps, 0.0);
        xm.data[idx] -= cpx(eps, 0.0);
      }
      const double fd = (loss(xp) - loss(xm)) / (2.0 * eps);
      const double an = imag ? grad.data[idx].imag() : grad.data[idx].real();
      CHECK(std::abs(fd - an) < 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("deep filter identity and delay taps") {
  const WindowConfig cfg = processing_window();
  const int frames = 6, bins = 9;
  const Spectrogram y = random_spectrogram(51, frames, bins, cfg);

  DeepFilterCoeffs ident(frames, bins, 1, 2);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) ident.at(t, k, 1, 0) = cpx(1.0, 0.0);
  }
  const Spectrogram same = apply_deep_filter(ident, y);
  for (size_t i = 0; i < y.data.size(); ++i) CHECK(std::abs(same.data[i] - y.data[i]) < 1e-15);

  DeepFilterCoeffs delay(frames, bins, 1, 2);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) delay.at(t, k, 1, 1) = cpx(1.0, 0.0);
  }
  const Spectrogram shifted = apply_deep_filter(delay, y);
  for (int k = 0; k < bins; ++k) CHECK(std::abs(shifted.at(0, k)) == 0.0);
  for (int t = 1; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      CHECK(std::abs(shifted.at(t, k) - y.at(t - 1, k)) < 1e-15);
    }
  }
}

TEST_CASE("deep filter matches a brute-force evaluation") {
  const WindowConfig cfg = processing_window();
  const int frames = 4, bins = 5, K = 1, L = 2;
  const Spectrogram y = random_spectrogram(61, frames, bins, cfg);
  Rng rng(62);
  DeepFilterCoeffs g(frames, bins, K, L);
  for (cpx& v : g.data) v = cpx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));

  const Spectrogram got = apply_deep_filter(g, y);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      cpx want(0.0, 0.0);
      for (int kappa = -K; kappa <= K; ++kappa) {
        for (int l = 0; l <= L; ++l) {
          const int sk = k - kappa;
          const int st = t - l;
          if (sk < 0 || sk >= bins || st < 0) continue;
          want += g.at(t, k, kappa + K, l) * y.at(st, sk);
        }
      }
      CHECK(std::abs(got.at(t, k) - want) < 1e-12);
    }
  }
}

TEST_CASE("deep filter is linear and causal") {
  const WindowConfig cfg = processing_window();
  const int frames = 5, bins = 7;
  Rng rng(71);
  DeepFilterCoeffs g(frames, bins, 1, 2);
  for (cpx& v : g.data) v = cpx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  const Spectrogram y1 = random_spectrogram(72, frames, bins, cfg);
  const Spectrogram y2 = random_spectrogram(73, frames, bins, cfg);

  Spectrogram mix(frames, bins, cfg);
  const cpx a(1.3, 0.0), b(-0.4, 0.0);
  for (size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = a * y1.data[i] + b * y2.data[i];
  const Spectrogram f_mix = apply_deep_filter(g, mix);
  const Spectrogram f1 = apply_deep_filter(g, y1);
  const Spectrogram f2 = apply_deep_filter(g, y2);
  for (size_t i = 0; i < mix.data.size(); ++i) {
    CHECK(std::abs(f_mix.data[i] - (a * f1.data[i] + b * f2.data[i])) < 1e-12);
  }

  // Zeroing frames >= cut never changes output before the cut.
  const int cut = 3;
  Spectrogram trunc = y1;
  for (int t = cut; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) trunc.at(t, k) = cpx(0.0, 0.0);
  }
  const Spectrogram f_trunc = apply_deep_filter(g, trunc);
  for (int t = 0; t < cut; ++t) {
    for (int k = 0; k < bins; ++k) {
      CHECK(std::abs(f_trunc.at(t, k) - f1.at(t, k)) == 0.0);
    }
  }
}

TEST_CASE("deep filter backward satisfies both adjoint identities") {
  const WindowConfig cfg = processing_window();
  const int frames = 4, bins = 6;
  Rng rng(81);
  DeepFilterCoeffs g(frames, bins, 1, 2);
  for (cpx& v : g.data) v = cpx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  const Spectrogram y = random_spectrogram(82, frames, bins, cfg);
  const Spectrogram p = random_spectrogram(83, frames, bins, cfg);

  DeepFilterCoeffs grad_g;
  Spectrogram grad_y;
  deep_filter_backward(g, y, p, grad_g, grad_y);

  const Spectrogram out = apply_deep_filter(g, y);
  const double lhs = dot_r(out, p);

  // Linearity in y: <DF(g,y), p> == <y, grad_y>.
  const double rhs_y = dot_r(y, grad_y);
  CHECK(std::abs(lhs - rhs_y) < 1e-10 * std::max(1.0, std::abs(lhs)));

  // Linearity in g: <DF(g,y), p> == <g, grad_g>.
  double rhs_g = 0.0;
  for (size_t i = 0; i < g.data.size(); ++i) {
    rhs_g += g.data[i].real() * grad_g.data[i].real() +
             g.data[i].imag() * grad_g.data[i].imag();
  }
  CHECK(std::abs(lhs - rhs_g) < 1e-10 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("subtract_echo implements the compressed-domain subtraction") {
  const WindowConfig cfg = processing_window();
  const Spectrogram y = random_spectrogram(91, 3, 8, cfg, 2.0);
  const double c = 0.3;

  Spectrogram zero(3, 8, cfg);
  const Spectrogram e0 = subtract_echo(y, zero, c);
  for (size_t i = 0; i < y.data.size(); ++i) CHECK(std::abs(e0.data[i] - y.data[i]) == 0.0);

  const Spectrogram self = subtract_echo(y, compress(y, c), c);
  for (const cpx& v : self.data) CHECK(std::abs(v) < 1e-12);

  Spectrogram y3(1, 1, cfg), d2(1, 1, cfg);
  y3.at(0, 0) = cpx(3.0, 0.0);
  d2.at(0, 0) = std::polar(std::pow(2.0, c), 0.0);
  const Spectrogram e = subtract_echo(y3, d2, c);
  CHECK(std::abs(e.at(0, 0) - cpx(1.0, 0.0)) < 1e-12);

  Spectrogram wrong(2, 8, cfg);
  CHECK_THROWS_AS(subtract_echo(y, wrong, c), ConfigError);
}
