#pragma once

#include <vector>

#include "daec/spectral.hpp"

namespace daec {

// Block-wise activity mask: 10 ms blocks whose energy exceeds the loudest
// block by less than threshold_db. Used for level measurements and for
// restricting metrics to regions where the signal is actually present.
std::vector<char> active_mask(const std::vector<double>& x, int sample_rate_hz,
                              double block_ms = 10.0, double threshold_db = 40.0);

// Mean power over active blocks; 0 if the signal is silent.
double active_power(const std::vector<double>& x, int sample_rate_hz);

// Echo return loss enhancement over masked blocks, capped at +80 dB.
// mask has one entry per 10 ms block; throws if no block is marked.
double erle_db(const std::vector<double>& mic, const std::vector<double>& out,
               const std::vector<char>& mask, int sample_rate_hz);

// Per-block ERLE averaged over masked blocks, each block clamped to
// [-20, 80] dB so a single silent block cannot dominate.
double segmental_erle_db(const std::vector<double>& mic,
                         const std::vector<double>& out,
                         const std::vector<char>& mask, int sample_rate_hz);

// Scale-invariant SDR of est against ref, capped to [-80, 80] dB.
double si_sdr_db(const std::vector<double>& est, const std::vector<double>& ref);

// RMS log-spectral distance in dB over ref-active frames.
double lsd_db(const std::vector<double>& est, const std::vector<double>& ref,
              const WindowConfig& cfg);

}  // namespace daec
