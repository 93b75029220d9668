#include "sgrd/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "sgrd/error.hpp"

namespace sgrd {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'R', 'D'};

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated tensor file while reading " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32_payload(std::ostream& out, const std::vector<float>& data) {
  // Little-endian hosts write the buffer directly.
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * 4));
}

}  // namespace

void write_tensor_file(const std::string& path,
                       const std::vector<std::pair<std::string, Tensor>>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  write_u32(out, kCheckpointVersion);
  write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int e : t.shape) write_u32(out, static_cast<std::uint32_t>(e));
    write_f32_payload(out, t.data);
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::pair<std::string, Tensor>> read_tensor_file_ordered(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path + ": bad magic, not a tensor container");
  }
  std::uint32_t version = read_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError(path + ": unsupported container version " + std::to_string(version));
  }
  std::uint32_t count = read_u32(in, "tensor count");
  std::vector<std::pair<std::string, Tensor>> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = read_u32(in, "name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw FormatError(path + ": truncated tensor name");
    std::uint32_t rank = read_u32(in, "rank");
    std::vector<int> shape(rank);
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape[r] = static_cast<int>(read_u32(in, "extent"));
      if (shape[r] <= 0) throw FormatError(path + ": non-positive extent in " + name);
      n *= static_cast<std::size_t>(shape[r]);
    }
    std::vector<float> data(n);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * 4));
    if (!in) throw FormatError(path + ": truncated payload for " + name);
    tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return tensors;
}

std::map<std::string, Tensor> read_tensor_file(const std::string& path) {
  std::map<std::string, Tensor> out;
  for (auto& [name, t] : read_tensor_file_ordered(path)) {
    out.emplace(std::move(name), std::move(t));
  }
  return out;
}

}  // namespace sgrd
