#include "rescom/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

namespace rescom {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(buf[0]) |
         (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) |
         (static_cast<std::uint32_t>(buf[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

float read_f32(std::istream& is) {
  const std::uint32_t bits = read_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

struct RawTensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

}  // namespace

void save_checkpoint(SiameseModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  for (const auto& t : model.named_tensors()) {
    write_u32(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) write_u32(os, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < t.size; ++i)
      write_f32(os, static_cast<float>(t.data[i]));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

SiameseModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic: " + path);
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version");

  std::map<std::string, RawTensor> raw;
  while (true) {
    const int peek = is.peek();
    if (peek == std::char_traits<char>::eof()) break;
    const std::uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const std::uint32_t rank = read_u32(is);
    RawTensor t;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.shape.push_back(read_u32(is));
      count *= t.shape.back();
    }
    t.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) t.data[i] = read_f32(is);
    if (!is) throw std::runtime_error("checkpoint: truncated tensor: " + name);
    raw.emplace(std::move(name), std::move(t));
  }

  auto shape_of = [&](const std::string& name) -> const RawTensor& {
    auto it = raw.find(name);
    if (it == raw.end())
      throw std::runtime_error("checkpoint: missing tensor: " + name);
    return it->second;
  };

  ModelDims dims;
  dims.input = shape_of("encoder.0.w").shape.at(1);
  dims.hidden = shape_of("encoder.0.w").shape.at(0);
  dims.feature = shape_of("encoder.2.w").shape.at(0);
  dims.projection = shape_of("projector.1.w").shape.at(0);
  dims.num_classes = shape_of("fc.w").shape.at(0);

  SiameseModel model(dims, 0);
  for (auto& t : model.named_tensors()) {
    const RawTensor& r = shape_of(t.name);
    if (r.data.size() != t.size)
      throw std::runtime_error("checkpoint: shape mismatch for " + t.name);
    for (std::size_t i = 0; i < t.size; ++i)
      t.data[i] = static_cast<double>(r.data[i]);
  }
  return model;
}

}  // namespace rescom
