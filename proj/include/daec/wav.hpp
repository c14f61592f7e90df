#pragma once

#include <string>
#include <vector>

namespace daec {

struct WavData {
  int sample_rate_hz = 0;
  std::vector<double> samples;  // mono, full scale = [-1, 1]
};

enum class WavFormat { kPcm16, kFloat32 };

// Reads mono 16-bit PCM or 32-bit float WAV. Multi-channel input is rejected.
WavData read_wav(const std::string& path);

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate_hz, WavFormat fmt = WavFormat::kFloat32);

}  // namespace daec
