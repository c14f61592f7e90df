#include "daec/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "daec/error.hpp"

namespace daec {

namespace {

constexpr double kCapDb = 80.0;

std::vector<double> block_energies(const std::vector<double>& x, int fs,
                                   double block_ms) {
  const int block = std::max(1, static_cast<int>(block_ms * fs / 1000.0));
  const size_t n_blocks = (x.size() + block - 1) / block;
  std::vector<double> e(n_blocks, 0.0);
  for (size_t i = 0; i < x.size(); ++i) e[i / block] += x[i] * x[i];
  return e;
}

}  // namespace

std::vector<char> active_mask(const std::vector<double>& x, int sample_rate_hz,
                              double block_ms, double threshold_db) {
  require(sample_rate_hz > 0, "sample rate must be positive");
  const std::vector<double> e = block_energies(x, sample_rate_hz, block_ms);
  double peak = 0.0;
  for (double v : e) peak = std::max(peak, v);
  std::vector<char> mask(e.size(), 0);
  if (peak <= 0.0) return mask;
  const double thresh = peak * std::pow(10.0, -threshold_db / 10.0);
  for (size_t i = 0; i < e.size(); ++i) mask[i] = e[i] > thresh ? 1 : 0;
  return mask;
}

double active_power(const std::vector<double>& x, int sample_rate_hz) {
  const std::vector<char> mask = active_mask(x, sample_rate_hz);
  const int block = std::max(1, sample_rate_hz / 100);
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (mask[i / block]) {
      sum += x[i] * x[i];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double erle_db(const std::vector<double>& mic, const std::vector<double>& out,
               const std::vector<char>& mask, int sample_rate_hz) {
  require(mic.size() == out.size(), "mic/out length mismatch");
  require(sample_rate_hz > 0, "sample rate must be positive");
  bool any = false;
  for (char m : mask) any = any || m;
  require(any, "erle mask marks no blocks");
  const int block = std::max(1, sample_rate_hz / 100);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < mic.size(); ++i) {
    const size_t b = i / block;
    if (b < mask.size() && mask[b]) {
      num += mic[i] * mic[i];
      den += out[i] * out[i];
    }
  }
  if (den <= 0.0) return kCapDb;
  return std::min(kCapDb, 10.0 * std::log10(num / den));
}

double segmental_erle_db(const std::vector<double>& mic,
                         const std::vector<double>& out,
                         const std::vector<char>& mask, int sample_rate_hz) {
  require(mic.size() == out.size(), "mic/out length mismatch");
  require(sample_rate_hz > 0, "sample rate must be positive");
  const int block = std::max(1, sample_rate_hz / 100);
  double sum = 0.0;
  int count = 0;
  for (size_t b = 0; b < mask.size(); ++b) {
    if (!mask[b]) continue;
    double num = 0.0, den = 0.0;
    const size_t lo = b * block;
    const size_t hi = std::min(mic.size(), lo + block);
    for (size_t i = lo; i < hi; ++i) {
      num += mic[i] * mic[i];
      den += out[i] * out[i];
    }
    double v = den <= 0.0 ? kCapDb : 10.0 * std::log10(std::max(num, 1e-300) / den);
    sum += std::clamp(v, -20.0, kCapDb);
    ++count;
  }
  require(count > 0, "segmental erle mask marks no blocks");
  return sum / count;
}

double si_sdr_db(const std::vector<double>& est, const std::vector<double>& ref) {
  require(est.size() == ref.size(), "est/ref length mismatch");
  double dot = 0.0, ref_pow = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    dot += est[i] * ref[i];
    ref_pow += ref[i] * ref[i];
  }
  require(ref_pow > 0.0, "si_sdr reference is silent");
  const double alpha = dot / ref_pow;
  double target_pow = 0.0, err_pow = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double t = alpha * ref[i];
    const double e = est[i] - t;
    target_pow += t * t;
    err_pow += e * e;
  }
  if (target_pow <= 0.0) return -kCapDb;
  if (err_pow <= 0.0) return kCapDb;
  return std::clamp(10.0 * std::log10(target_pow / err_pow), -kCapDb, kCapDb);
}

double lsd_db(const std::vector<double>& est, const std::vector<double>& ref,
              const WindowConfig& cfg) {
  require(est.size() == ref.size(), "est/ref length mismatch");
  const Spectrogram se = stft(est, cfg);
  const Spectrogram sr = stft(ref, cfg);
  const int n_frames = std::min(se.n_frames, sr.n_frames);
  // Frame activity from the reference spectrum.
  std::vector<double> frame_energy(n_frames, 0.0);
  double peak = 0.0;
  for (int t = 0; t < n_frames; ++t) {
    for (int k = 0; k < sr.n_bins; ++k) frame_energy[t] += std::norm(sr.at(t, k));
    peak = std::max(peak, frame_energy[t]);
  }
  require(peak > 0.0, "lsd reference is silent");
  const double thresh = peak * 1e-4;  // 40 dB below the loudest frame
  constexpr double kMagFloor = 1e-8;
  double sum_sq = 0.0;
  size_t count = 0;
  for (int t = 0; t < n_frames; ++t) {
    if (frame_energy[t] <= thresh) continue;
    for (int k = 0; k < sr.n_bins; ++k) {
      const double me = std::max(std::abs(se.at(t, k)), kMagFloor);
      const double mr = std::max(std::abs(sr.at(t, k)), kMagFloor);
      const double d = 20.0 * std::log10(me / mr);
      sum_sq += d * d;
      ++count;
    }
  }
  require(count > 0, "lsd found no active frames");
  return std::sqrt(sum_sq / static_cast<double>(count));
}

}  // namespace daec
