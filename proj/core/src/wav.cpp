// Copyright 2026 The sedkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sedkit/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace sedkit {

namespace {

std::uint32_t read_u32(std::istream& in, const std::string& what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw ParseError("wav: truncated while reading " + what);
  }
  return std::uint32_t(buf[0]) | std::uint32_t(buf[1]) << 8 |
         std::uint32_t(buf[2]) << 16 | std::uint32_t(buf[3]) << 24;
}

std::uint16_t read_u16(std::istream& in, const std::string& what) {
  unsigned char buf[2];
  if (!in.read(reinterpret_cast<char*>(buf), 2)) {
    throw ParseError("wav: truncated while reading " + what);
  }
  return std::uint16_t(buf[0] | buf[1] << 8);
}

void read_fourcc(std::istream& in, char* out, const std::string& what) {
  if (!in.read(out, 4)) {
    throw ParseError("wav: truncated while reading " + what);
  }
}

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff),
                 char(v >> 24 & 0xff)};
  out.write(buf, 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  char buf[2] = {char(v & 0xff), char(v >> 8 & 0xff)};
  out.write(buf, 2);
}

}  // namespace

Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("wav: cannot open " + path);

  char fourcc[4];
  read_fourcc(in, fourcc, "RIFF header");
  if (std::memcmp(fourcc, "RIFF", 4) != 0) {
    throw FormatError("wav: " + path + " is not a RIFF file");
  }
  read_u32(in, "RIFF size");
  read_fourcc(in, fourcc, "WAVE tag");
  if (std::memcmp(fourcc, "WAVE", 4) != 0) {
    throw FormatError("wav: " + path + " is not a WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  Waveform wav;
  bool have_data = false;

  while (in.peek() != EOF) {
    read_fourcc(in, fourcc, "chunk id");
    const std::uint32_t size = read_u32(in, "chunk size");
    if (std::memcmp(fourcc, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError("wav: fmt chunk too small");
      format = read_u16(in, "audio format");
      channels = read_u16(in, "channel count");
      rate = read_u32(in, "sample rate");
      read_u32(in, "byte rate");
      read_u16(in, "block align");
      bits = read_u16(in, "bits per sample");
      in.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(fourcc, "data", 4) == 0) {
      if (!have_fmt) throw ParseError("wav: data chunk before fmt chunk");
      if (format != 1) {
        throw FormatError("wav: " + path + " encoding " +
                          std::to_string(format) + ", only PCM (1) supported");
      }
      if (channels != 1) {
        throw FormatError("wav: " + path + " has " + std::to_string(channels) +
                          " channels, only mono supported");
      }
      if (bits != 16) {
        throw FormatError("wav: " + path + " has " + std::to_string(bits) +
                          "-bit samples, only 16-bit supported");
      }
      if (rate != 16000) {
        throw FormatError("wav: " + path + " sample rate " +
                          std::to_string(rate) + ", only 16000 supported");
      }
      const std::uint32_t count = size / 2;
      std::vector<std::int16_t> raw(count);
      if (!in.read(reinterpret_cast<char*>(raw.data()), count * 2)) {
        throw ParseError("wav: " + path + " data chunk truncated");
      }
      wav.sample_rate = static_cast<int>(rate);
      wav.samples.resize(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        wav.samples[i] = static_cast<float>(raw[i]) / 32768.0f;
      }
      if (size & 1) in.seekg(1, std::ios::cur);
      have_data = true;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
      if (!in) throw ParseError("wav: " + path + " chunk truncated");
    }
  }
  if (!have_data) throw ParseError("wav: " + path + " has no data chunk");
  return wav;
}

void save_wav(const std::string& path, const Waveform& wav) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("wav: cannot write " + path);
  const std::uint32_t count = static_cast<std::uint32_t>(wav.samples.size());
  const std::uint32_t data_bytes = count * 2;

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<std::uint32_t>(wav.sample_rate));
  write_u32(out, static_cast<std::uint32_t>(wav.sample_rate) * 2);
  write_u16(out, 2);   // block align
  write_u16(out, 16);  // bits
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (float s : wav.samples) {
    const float clamped = std::clamp(s, -1.0f, 1.0f);
    const int v = static_cast<int>(std::lrint(clamped * 32767.0f));
    write_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  if (!out) throw DataError("wav: write failed for " + path);
}

}  // namespace sedkit
