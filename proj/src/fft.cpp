#include "daec/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>

#include "daec/error.hpp"

namespace daec {

namespace {

// FFTW planning is not thread safe; executions with new-array interface are.
struct PlanSet {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan c2c_bwd = nullptr;
};

std::mutex g_plan_mutex;
std::map<int, PlanSet>& plan_cache() {
  static std::map<int, PlanSet> cache;
  return cache;
}

const PlanSet& plans_for(int n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  PlanSet p;
  double* rbuf = fftw_alloc_real(n);
  fftw_complex* cbuf = fftw_alloc_complex(n / 2 + 1);
  fftw_complex* cbuf2 = fftw_alloc_complex(n);
  p.r2c = fftw_plan_dft_r2c_1d(n, rbuf, cbuf, FFTW_ESTIMATE);
  p.c2r = fftw_plan_dft_c2r_1d(n, cbuf, rbuf, FFTW_ESTIMATE);
  p.c2c_bwd = fftw_plan_dft_1d(n, cbuf2, cbuf2, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(rbuf);
  fftw_free(cbuf);
  fftw_free(cbuf2);
  return cache.emplace(n, p).first->second;
}

struct FftwRealBuf {
  double* p;
  explicit FftwRealBuf(int n) : p(fftw_alloc_real(n)) {}
  ~FftwRealBuf() { fftw_free(p); }
};

struct FftwComplexBuf {
  fftw_complex* p;
  explicit FftwComplexBuf(int n) : p(fftw_alloc_complex(n)) {}
  ~FftwComplexBuf() { fftw_free(p); }
};

}  // namespace

Fft::Fft(int n) : n_(n) {
  require(n >= 2, "fft size must be >= 2");
  plans_for(n);
}

void Fft::rfft(const double* in, std::complex<double>* out) const {
  const PlanSet& p = plans_for(n_);
  FftwRealBuf rb(n_);
  FftwComplexBuf cb(bins());
  std::memcpy(rb.p, in, sizeof(double) * n_);
  fftw_execute_dft_r2c(p.r2c, rb.p, cb.p);
  std::memcpy(out, cb.p, sizeof(std::complex<double>) * bins());
}

void Fft::irfft(const std::complex<double>* in, double* out) const {
  const PlanSet& p = plans_for(n_);
  FftwRealBuf rb(n_);
  FftwComplexBuf cb(bins());
  std::memcpy(cb.p, in, sizeof(std::complex<double>) * bins());
  fftw_execute_dft_c2r(p.c2r, cb.p, rb.p);
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[i] = rb.p[i] * scale;
}

void Fft::onesided_sum_real(const std::complex<double>* in, double* out) const {
  const PlanSet& p = plans_for(n_);
  FftwComplexBuf cb(n_);
  std::memset(cb.p, 0, sizeof(fftw_complex) * n_);
  std::memcpy(cb.p, in, sizeof(std::complex<double>) * bins());
  fftw_execute_dft(p.c2c_bwd, cb.p, cb.p);
  for (int i = 0; i < n_; ++i) out[i] = cb.p[i][0];
}

std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h) {
  if (x.empty() || h.empty()) return {};
  const size_t out_len = x.size() + h.size() - 1;

  int nfft = 256;
  while (static_cast<size_t>(nfft) < 4 * h.size() || nfft < 1024) nfft *= 2;
  const size_t block = static_cast<size_t>(nfft) - h.size() + 1;

  Fft fft(nfft);
  const int nb = fft.bins();
  std::vector<std::complex<double>> H(nb), X(nb);
  std::vector<double> pad(nfft, 0.0);
  std::copy(h.begin(), h.end(), pad.begin());
  fft.rfft(pad.data(), H.data());

  std::vector<double> out(out_len, 0.0);
  std::vector<double> seg(nfft), conv(nfft);
  for (size_t start = 0; start < x.size(); start += block) {
    const size_t len = std::min(block, x.size() - start);
    std::fill(seg.begin(), seg.end(), 0.0);
    std::copy(x.begin() + start, x.begin() + start + len, seg.begin());
    fft.rfft(seg.data(), X.data());
    for (int k = 0; k < nb; ++k) X[k] *= H[k];
    fft.irfft(X.data(), conv.data());
    const size_t n_keep = std::min(static_cast<size_t>(nfft), out_len - start);
    for (size_t i = 0; i < n_keep; ++i) out[start + i] += conv[i];
  }
  return out;
}

}  // namespace daec
