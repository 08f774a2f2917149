// patstd/src/wave-reader.cc

// Copyright 2026  The patstd Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "patstd/wave-reader.h"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <cstring>
#include <fstream>

#include "patstd/common.h"

namespace patstd {

namespace {

struct ByteCursor {
  const unsigned char *p;
  size_t left;

  bool Take(void *dst, size_t n) {
    if (left < n) return false;
    memcpy(dst, p, n);
    p += n;
    left -= n;
    return true;
  }
  bool Skip(size_t n) {
    if (left < n) return false;
    p += n;
    left -= n;
    return true;
  }
  uint32_t U32() {
    unsigned char b[4];
    if (!Take(b, 4)) throw DataError("truncated");
    return (uint32_t)b[0] | ((uint32_t)b[1] << 8) | ((uint32_t)b[2] << 16) |
           ((uint32_t)b[3] << 24);
  }
  uint16_t U16() {
    unsigned char b[2];
    if (!Take(b, 2)) throw DataError("truncated");
    return (uint16_t)(b[0] | (b[1] << 8));
  }
};

}  // namespace

Waveform ReadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("unreadable file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  in.close();

  auto bad = [&path](const std::string &cause) {
    return DataError("unsupported encoding: " + path + " (" + cause + ")");
  };

  ByteCursor c{bytes.data(), bytes.size()};
  char riff[4], wave[4];
  if (!c.Take(riff, 4) || memcmp(riff, "RIFF", 4) != 0)
    throw bad("missing RIFF header");
  if (!c.Skip(4)) throw bad("truncated header");
  if (!c.Take(wave, 4) || memcmp(wave, "WAVE", 4) != 0)
    throw bad("not a WAVE file");

  int sample_rate = 0;
  int channels = 0;
  int bits = 0;
  bool have_fmt = false;
  const unsigned char *data_ptr = nullptr;
  size_t data_size = 0;

  try {
    while (c.left >= 8) {
      char id[4];
      c.Take(id, 4);
      uint32_t size = c.U32();
      if (memcmp(id, "fmt ", 4) == 0) {
        if (size < 16) throw bad("short fmt chunk");
        uint16_t format = c.U16();
        channels = c.U16();
        sample_rate = static_cast<int>(c.U32());
        c.U32();  // byte rate
        c.U16();  // block align
        bits = c.U16();
        if (!c.Skip(size - 16)) throw bad("truncated fmt chunk");
        if (format != 1) throw bad("not linear PCM");
        have_fmt = true;
      } else if (memcmp(id, "data", 4) == 0) {
        if (c.left < size) throw bad("truncated data chunk");
        data_ptr = c.p;
        data_size = size;
        c.Skip(size);
      } else {
        // RIFF chunks are word aligned.
        if (!c.Skip(size + (size & 1))) throw bad("truncated chunk");
        continue;
      }
      if (size & 1) c.Skip(1);
    }
  } catch (const DataError &e) {
    if (std::string(e.what()).find("unsupported") != std::string::npos) throw;
    throw bad("truncated header");
  }

  if (!have_fmt || data_ptr == nullptr) throw bad("missing fmt or data chunk");
  if (bits != 16) throw bad(StringPrintf("%d-bit samples, want 16", bits));
  if (channels < 1) throw bad("zero channels");

  size_t frame_bytes = static_cast<size_t>(channels) * 2;
  size_t num_samples = data_size / frame_bytes;
  if (num_samples == 0) throw DataError("zero-length audio: " + path);

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(num_samples);
  for (size_t i = 0; i < num_samples; i++) {
    const unsigned char *s = data_ptr + i * frame_bytes;  // first channel
    int16_t v = static_cast<int16_t>(s[0] | (s[1] << 8));
    w.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return w;
}

void WriteWav(const std::string &path, const std::vector<float> &samples,
              int sample_rate) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  auto u32 = [&out](uint32_t v) {
    unsigned char b[4] = {(unsigned char)v, (unsigned char)(v >> 8),
                          (unsigned char)(v >> 16), (unsigned char)(v >> 24)};
    out.write(reinterpret_cast<char *>(b), 4);
  };
  auto u16 = [&out](uint16_t v) {
    unsigned char b[2] = {(unsigned char)v, (unsigned char)(v >> 8)};
    out.write(reinterpret_cast<char *>(b), 2);
  };
  uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  u32(36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(1);  // PCM
  u16(1);  // mono
  u32(static_cast<uint32_t>(sample_rate));
  u32(static_cast<uint32_t>(sample_rate * 2));
  u16(2);
  u16(16);
  out.write("data", 4);
  u32(data_bytes);
  for (float x : samples) {
    double v = std::max(-1.0, std::min(1.0, static_cast<double>(x)));
    int16_t s = static_cast<int16_t>(std::lrint(v * 32767.0));
    unsigned char b[2] = {(unsigned char)(s & 0xff),
                          (unsigned char)((s >> 8) & 0xff)};
    out.write(reinterpret_cast<char *>(b), 2);
  }
  out.close();
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace patstd
