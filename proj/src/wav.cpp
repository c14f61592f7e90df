#include "daec/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "daec/error.hpp"

namespace daec {

namespace {

uint32_t rd_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& os, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ofstream& os, uint16_t v) {
  uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open wav file: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(is)),
                           std::istreambuf_iterator<char>());
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw IoError("not a RIFF/WAVE file: " + path);
  }

  uint16_t audio_format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const char* id = reinterpret_cast<const char*>(buf.data() + pos);
    uint32_t len = rd_u32(buf.data() + pos + 4);
    const uint8_t* body = buf.data() + pos + 8;
    if (pos + 8 + len > buf.size()) len = static_cast<uint32_t>(buf.size() - pos - 8);
    if (std::memcmp(id, "fmt ", 4) == 0 && len >= 16) {
      audio_format = rd_u16(body);
      channels = rd_u16(body + 2);
      sample_rate = rd_u32(body + 4);
      bits = rd_u16(body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (!data) throw IoError("wav file has no data chunk: " + path);
  if (channels != 1) throw IoError("expected mono wav, got " + std::to_string(channels) + " channels: " + path);

  WavData out;
  out.sample_rate_hz = static_cast<int>(sample_rate);
  if (audio_format == 1 && bits == 16) {
    size_t n = data_len / 2;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t s = static_cast<int16_t>(rd_u16(data + 2 * i));
      out.samples[i] = static_cast<double>(s) / 32768.0;
    }
  } else if (audio_format == 3 && bits == 32) {
    size_t n = data_len / 4;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = rd_u32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      out.samples[i] = static_cast<double>(f);
    }
  } else {
    throw IoError("unsupported wav format (want 16-bit PCM or 32-bit float): " + path);
  }
  return out;
}

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate_hz, WavFormat fmt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write wav file: " + path);

  const uint16_t channels = 1;
  const uint16_t bits = (fmt == WavFormat::kPcm16) ? 16 : 32;
  const uint16_t block = channels * bits / 8;
  const uint32_t data_len = static_cast<uint32_t>(samples.size() * block);

  os.write("RIFF", 4);
  wr_u32(os, 36 + data_len);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, fmt == WavFormat::kPcm16 ? 1 : 3);
  wr_u16(os, channels);
  wr_u32(os, static_cast<uint32_t>(sample_rate_hz));
  wr_u32(os, static_cast<uint32_t>(sample_rate_hz) * block);
  wr_u16(os, block);
  wr_u16(os, bits);
  os.write("data", 4);
  wr_u32(os, data_len);

  if (fmt == WavFormat::kPcm16) {
    for (double v : samples) {
      double c = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
      // Same 1/32768 step the reader applies, so the roundtrip error stays
      // within half a quantization step.
      long q = std::lround(c * 32768.0);
      int16_t s = static_cast<int16_t>(q > 32767 ? 32767 : (q < -32768 ? -32768 : q));
      wr_u16(os, static_cast<uint16_t>(s));
    }
  } else {
    for (double v : samples) {
      float f = static_cast<float>(v);
      uint32_t u;
      std::memcpy(&u, &f, 4);
      wr_u32(os, u);
    }
  }
  if (!os) throw IoError("short write: " + path);
}

}  // namespace daec
