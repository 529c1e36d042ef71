// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/nn.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace vad {

uint32_t crc32(const unsigned char* data, std::size_t n, uint32_t seed) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  uint32_t crc = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i)
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

namespace {

constexpr char kMagic[4] = {'C', 'R', 'N', 'V'};
constexpr uint32_t kVersion = 1;

void put_u16(std::vector<unsigned char>& buf, uint16_t v) {
  buf.push_back(v & 0xff);
  buf.push_back((v >> 8) & 0xff);
}

void put_u32(std::vector<unsigned char>& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xff);
}

uint16_t get_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

void save_model(Crn<float>& model, const std::string& path) {
  std::vector<unsigned char> buf;
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(model.n_out));

  auto params = model.params();
  put_u32(buf, static_cast<uint32_t>(params.size()));
  for (auto& [name, tensor] : params) {
    put_u16(buf, static_cast<uint16_t>(name.size()));
    buf.insert(buf.end(), name.begin(), name.end());
    buf.push_back(static_cast<unsigned char>(tensor->shape.size()));
    for (int d : tensor->shape) put_u32(buf, static_cast<uint32_t>(d));
    for (float v : tensor->data) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_u32(buf, bits);
    }
  }
  put_u32(buf, crc32(buf.data(), buf.size()));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename " + tmp + " -> " + path);
}

Crn<float> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError("cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 16) throw ChecksumMismatchError(path + ": truncated file");

  const uint32_t stored_crc = get_u32(buf.data() + buf.size() - 4);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc)
    throw ChecksumMismatchError(path + ": CRC mismatch");
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw BadMagicError(path + ": bad magic");

  std::size_t pos = 4;
  const uint32_t version = get_u32(buf.data() + pos);
  pos += 4;
  if (version != kVersion)
    throw VersionMismatchError(path + ": unsupported version " +
                               std::to_string(version));
  const uint32_t n_out = get_u32(buf.data() + pos);
  pos += 4;

  Crn<float> model;
  allocate_model(model, static_cast<int>(n_out));
  auto params = model.params();

  const uint32_t count = get_u32(buf.data() + pos);
  pos += 4;
  if (count != params.size())
    throw DataError(path + ": unexpected tensor count");

  auto need = [&](std::size_t n) {
    if (pos + n + 4 > buf.size())
      throw ChecksumMismatchError(path + ": truncated tensor data");
  };

  for (auto& [name, tensor] : params) {
    need(2);
    const uint16_t name_len = get_u16(buf.data() + pos);
    pos += 2;
    need(name_len);
    const std::string stored_name(reinterpret_cast<char*>(buf.data() + pos),
                                  name_len);
    pos += name_len;
    if (stored_name != name)
      throw DataError(path + ": tensor name mismatch, expected " + name);
    need(1);
    const int rank = buf[pos++];
    if (rank != static_cast<int>(tensor->shape.size()))
      throw DataError(path + ": rank mismatch for " + name);
    for (int d = 0; d < rank; ++d) {
      need(4);
      const uint32_t dim = get_u32(buf.data() + pos);
      pos += 4;
      if (dim != static_cast<uint32_t>(tensor->shape[d]))
        throw DataError(path + ": shape mismatch for " + name);
    }
    need(tensor->size() * 4);
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      const uint32_t bits = get_u32(buf.data() + pos);
      pos += 4;
      float v;
      std::memcpy(&v, &bits, 4);
      tensor->data[i] = v;
    }
  }
  return model;
}

}  // namespace vad
