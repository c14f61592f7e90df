#include "daec/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace daec {

namespace {

void put_u16(std::ostream& os, uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& os, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(os, u);
}

bool get_u16(std::istream& is, uint16_t& v) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2)) return false;
  v = static_cast<uint16_t>(b[0] | (b[1] << 8));
  return true;
}

bool get_u32(std::istream& is, uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return true;
}

bool get_f32(std::istream& is, float& v) {
  uint32_t u;
  if (!get_u32(is, u)) return false;
  std::memcpy(&v, &u, 4);
  return true;
}

// Positions the stream right after the "---" terminator line and returns the
// header text before it.
std::string read_header(std::istream& is, const std::string& path) {
  std::string header;
  std::string line;
  while (std::getline(is, line)) {
    if (line == "---") return header;
    header += line;
    header += '\n';
  }
  throw IoError("checkpoint " + path + " has no '---' header terminator");
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_text,
                     const std::vector<NamedParam>& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os << config_text;
  if (config_text.empty() || config_text.back() != '\n') os << '\n';
  os << "---\n";
  for (const NamedParam& p : params) {
    require(!p.name.empty() && p.name.size() < 0x10000, "bad parameter name");
    put_u16(os, static_cast<uint16_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(os, static_cast<uint32_t>(p.tensor->size()));
    for (double v : p.tensor->v) put_f32(os, static_cast<float>(v));
  }
  put_u16(os, 0);
  os.flush();
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

std::string read_checkpoint_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  return read_header(is, path);
}

void load_checkpoint_params(const std::string& path,
                            const std::vector<NamedParam>& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  read_header(is, path);
  for (const NamedParam& p : params) {
    uint16_t name_len;
    if (!get_u16(is, name_len) || name_len == 0)
      throw IoError("checkpoint " + path + " ends before array '" + p.name + "'");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len))
      throw IoError("checkpoint " + path + " truncated in the name of array '" + p.name +
                    "'");
    if (name != p.name)
      throw IoError("checkpoint " + path + ": expected array '" + p.name + "', found '" +
                    name + "'");
    uint32_t count;
    if (!get_u32(is, count))
      throw IoError("checkpoint " + path + " truncated before the size of array '" +
                    p.name + "'");
    if (count != p.tensor->size())
      throw IoError("checkpoint " + path + ": array '" + p.name + "' has " +
                    std::to_string(count) + " values, expected " +
                    std::to_string(p.tensor->size()));
    for (size_t i = 0; i < p.tensor->size(); ++i) {
      float v;
      if (!get_f32(is, v))
        throw IoError("checkpoint " + path + " truncated inside array '" + p.name + "'");
      p.tensor->v[i] = static_cast<double>(v);
    }
  }
  uint16_t terminator;
  if (!get_u16(is, terminator) || terminator != 0)
    throw IoError("checkpoint " + path + " carries extra arrays beyond the model");
}

std::string checkpoint_kind(const std::string& path) {
  const std::string header = read_checkpoint_config(path);
  const size_t eol = header.find('\n');
  const std::string first = header.substr(0, eol);
  const std::string key(kKindKey);
  if (first.rfind(key, 0) != 0)
    throw IoError("checkpoint " + path + " header does not start with '" + key + "'");
  return first.substr(key.size());
}

void save_cruse(const std::string& path, CruseModel& model, const std::string& kind) {
  const std::string header = kKindKey + kind + "\n" + model.config().to_text();
  save_checkpoint(path, header, model.params());
}

CruseModel load_cruse(const std::string& path, const std::string& expected_kind) {
  const std::string kind = checkpoint_kind(path);
  if (kind != expected_kind)
    throw IoError("checkpoint " + path + " holds a '" + kind + "' model, expected '" +
                  expected_kind + "'");
  std::string header = read_checkpoint_config(path);
  header = header.substr(header.find('\n') + 1);  // drop the kind line
  CruseModel model(CruseConfig::from_text(header));
  load_checkpoint_params(path, model.params());
  return model;
}

}  // namespace daec
