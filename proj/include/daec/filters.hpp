#pragma once

#include <vector>

#include "daec/error.hpp"

namespace daec {

// Second-order IIR section, direct form 2 transposed. Coefficients are
// normalized (a0 == 1).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Cookbook designs. f0 in Hz, gain in dB; all require 0 < f0 < fs/2.
Biquad design_peaking(double f0, double q, double gain_db, double fs);
Biquad design_low_shelf(double f0, double q, double gain_db, double fs);
Biquad design_high_shelf(double f0, double q, double gain_db, double fs);
Biquad design_bandpass(double f0, double q, double fs);

// Runs the cascade over x with zero initial state.
std::vector<double> apply_biquads(const std::vector<double>& x,
                                  const std::vector<Biquad>& sections);

// Linear-interpolation resampler: out[i] = x(i * rate). Output length is the
// number of points i*rate that land inside [0, len-1].
std::vector<double> linear_resample(const std::vector<double>& x, double rate);

}  // namespace daec
