#include "daec/filters.hpp"

#include <cmath>

namespace daec {

namespace {

struct RawCoeffs {
  double b0, b1, b2, a0, a1, a2;
};

Biquad normalize(const RawCoeffs& c) {
  Biquad q;
  q.b0 = c.b0 / c.a0;
  q.b1 = c.b1 / c.a0;
  q.b2 = c.b2 / c.a0;
  q.a1 = c.a1 / c.a0;
  q.a2 = c.a2 / c.a0;
  return q;
}

void check_freq(double f0, double fs) {
  require(fs > 0.0 && f0 > 0.0 && f0 < fs / 2.0, "center frequency outside (0, fs/2)");
}

}  // namespace

Biquad design_peaking(double f0, double q, double gain_db, double fs) {
  check_freq(f0, fs);
  require(q > 0.0, "q must be positive");
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * M_PI * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  return normalize({1.0 + alpha * a, -2.0 * cw, 1.0 - alpha * a,
                    1.0 + alpha / a, -2.0 * cw, 1.0 - alpha / a});
}

Biquad design_low_shelf(double f0, double q, double gain_db, double fs) {
  check_freq(f0, fs);
  require(q > 0.0, "q must be positive");
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * M_PI * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double sq = 2.0 * std::sqrt(a) * alpha;
  return normalize({a * ((a + 1.0) - (a - 1.0) * cw + sq),
                    2.0 * a * ((a - 1.0) - (a + 1.0) * cw),
                    a * ((a + 1.0) - (a - 1.0) * cw - sq),
                    (a + 1.0) + (a - 1.0) * cw + sq,
                    -2.0 * ((a - 1.0) + (a + 1.0) * cw),
                    (a + 1.0) + (a - 1.0) * cw - sq});
}

Biquad design_high_shelf(double f0, double q, double gain_db, double fs) {
  check_freq(f0, fs);
  require(q > 0.0, "q must be positive");
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * M_PI * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double sq = 2.0 * std::sqrt(a) * alpha;
  return normalize({a * ((a + 1.0) + (a - 1.0) * cw + sq),
                    -2.0 * a * ((a - 1.0) + (a + 1.0) * cw),
                    a * ((a + 1.0) + (a - 1.0) * cw - sq),
                    (a + 1.0) - (a - 1.0) * cw + sq,
                    2.0 * ((a - 1.0) - (a + 1.0) * cw),
                    (a + 1.0) - (a - 1.0) * cw - sq});
}

Biquad design_bandpass(double f0, double q, double fs) {
  check_freq(f0, fs);
  require(q > 0.0, "q must be positive");
  const double w0 = 2.0 * M_PI * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  return normalize({alpha, 0.0, -alpha, 1.0 + alpha, -2.0 * cw, 1.0 - alpha});
}

std::vector<double> apply_biquads(const std::vector<double>& x,
                                  const std::vector<Biquad>& sections) {
  std::vector<double> y = x;
  for (const Biquad& s : sections) {
    double s1 = 0.0, s2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> linear_resample(const std::vector<double>& x, double rate) {
  require(rate > 0.0, "resample rate must be positive");
  if (x.empty()) return {};
  const double last = static_cast<double>(x.size() - 1);
  const size_t out_len = static_cast<size_t>(std::floor(last / rate)) + 1;
  std::vector<double> y(out_len);
  for (size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * rate;
    const size_t i0 = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    const double x0 = x[i0];
    const double x1 = (i0 + 1 < x.size()) ? x[i0 + 1] : x[i0];
    y[i] = x0 + frac * (x1 - x0);
  }
  return y;
}

}  // namespace daec
