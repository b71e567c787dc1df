#include "limo/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace limo {

namespace {

constexpr char kMagic[5] = {'L', 'I', 'M', 'O', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  write_u32(os, v);
}

float read_f32(std::istream& is) {
  std::uint32_t v = read_u32(is);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

const std::vector<float>& Checkpoint::block(const std::string& name) const {
  for (const auto& [n, data] : blocks) {
    if (n == name) return data;
  }
  throw std::runtime_error("checkpoint missing block: " + name);
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write(kMagic, 5);
  write_u32(os, static_cast<std::uint32_t>(ckpt.header.size()));
  for (std::int32_t h : ckpt.header)
    write_u32(os, static_cast<std::uint32_t>(h));
  write_u32(os, static_cast<std::uint32_t>(ckpt.blocks.size()));
  for (const auto& [name, data] : ckpt.blocks) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(data.size()));
    for (float f : data) write_f32(os, f);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint not found: " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, kMagic, 5) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  Checkpoint ckpt;
  std::uint32_t nh = read_u32(is);
  if (nh > 4096) throw std::runtime_error("implausible checkpoint header");
  ckpt.header.resize(nh);
  for (auto& h : ckpt.header) h = static_cast<std::int32_t>(read_u32(is));
  std::uint32_t nb = read_u32(is);
  if (nb > 65536) throw std::runtime_error("implausible block count");
  ckpt.blocks.resize(nb);
  for (auto& [name, data] : ckpt.blocks) {
    std::uint32_t len = read_u32(is);
    if (len > 4096) throw std::runtime_error("implausible block name");
    name.resize(len);
    is.read(name.data(), len);
    std::uint32_t count = read_u32(is);
    data.resize(count);
    for (auto& f : data) f = read_f32(is);
  }
  if (!is) throw std::runtime_error("checkpoint truncated: " + path);
  return ckpt;
}

std::string file_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read: " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[4096];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!is) break;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace limo
