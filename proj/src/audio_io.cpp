// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "vad/errors.hpp"

namespace vad {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError("cannot open " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw UnsupportedFormatError(path + ": not a RIFF file");
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw UnsupportedFormatError(path + ": not a WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<char> data;
  bool have_data = false;

  while (in.read(tag, 4)) {
    uint32_t chunk_size = read_u32(in);
    if (!in) break;
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      have_fmt = true;
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data.resize(chunk_size);
      in.read(data.data(), chunk_size);
      have_data = true;
    } else {
      in.seekg(chunk_size + (chunk_size & 1u), std::ios::cur);
    }
  }

  if (!have_fmt || !have_data)
    throw UnsupportedFormatError(path + ": missing fmt or data chunk");
  if (channels != 1)
    throw UnsupportedFormatError(path + ": expected mono, got " +
                                 std::to_string(channels) + " channels");
  if (rate != kSampleRate)
    throw SampleRateMismatchError(path + ": sample rate " +
                                  std::to_string(rate) + " != 16000");

  AudioClip clip;
  clip.source_id = path;
  if (format == 1 && bits == 16) {
    std::size_t n = data.size() / 2;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      int16_t s;
      std::memcpy(&s, data.data() + 2 * i, 2);
      clip.samples[i] = static_cast<double>(s) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    std::size_t n = data.size() / 4;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float s;
      std::memcpy(&s, data.data() + 4 * i, 4);
      if (!std::isfinite(s))
        throw UnsupportedFormatError(path + ": non-finite sample");
      clip.samples[i] = std::clamp<double>(s, -1.0, 1.0);
    }
  } else {
    throw UnsupportedFormatError(path + ": unsupported format code " +
                                 std::to_string(format) + "/" +
                                 std::to_string(bits) + " bit");
  }
  if (clip.samples.empty()) throw EmptyAudioError(path + ": no samples");
  return clip;
}

void write_wav(const AudioClip& clip, const std::string& path) {
  if (clip.samples.empty()) throw EmptyAudioError("refusing to write empty clip");
  for (double s : clip.samples)
    if (!std::isfinite(s)) throw DataError("non-finite sample on write");

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp + " for writing");

    const uint32_t n = static_cast<uint32_t>(clip.samples.size());
    const uint32_t data_bytes = n * 2;
    out.write("RIFF", 4);
    write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);  // PCM
    write_u16(out, 1);  // mono
    write_u32(out, kSampleRate);
    write_u32(out, kSampleRate * 2);
    write_u16(out, 2);
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, data_bytes);
    for (double s : clip.samples) {
      double v = std::clamp(s, -1.0, 1.0);
      long q = std::lround(v * 32768.0);
      q = std::clamp(q, -32768L, 32767L);
      int16_t i16 = static_cast<int16_t>(q);
      out.write(reinterpret_cast<char*>(&i16), 2);
    }
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
}

}  // namespace vad
