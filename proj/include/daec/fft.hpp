#pragma once

#include <complex>
#include <vector>

namespace daec {

// Real FFT of one frame, backed by FFTW. All transforms of a given size share
// cached plans; execution uses per-call buffers so concurrent use on distinct
// data is safe.
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // Unnormalized one-sided DFT: out[k] = sum_i in[i] e^{-j 2 pi k i / n}.
  void rfft(const double* in, std::complex<double>* out) const;

  // Inverse of rfft including the 1/n factor; assumes Hermitian symmetry,
  // imaginary parts of DC and Nyquist bins are ignored.
  void irfft(const std::complex<double>* in, double* out) const;

  // out[i] = Re( sum_{k=0}^{n/2} in[k] e^{+j 2 pi k i / n} ), no conjugate
  // duplication and no 1/n. This is the adjoint of rfft acting on real signals.
  void onesided_sum_real(const std::complex<double>* in, double* out) const;

 private:
  int n_;
};

// Linear convolution via FFT overlap-add. Output length = x.size()+h.size()-1.
std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h);

}  // namespace daec
