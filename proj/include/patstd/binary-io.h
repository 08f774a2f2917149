// patstd/include/patstd/binary-io.h

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

#ifndef PATSTD_BINARY_IO_H_
#define PATSTD_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "patstd/common.h"

namespace patstd {

// Little-endian binary writer for artifact files.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string &path) : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError("cannot open for writing: " + path);
  }

  void WriteBytes(const void *p, size_t n) {
    out_.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
  }
  void WriteMagic(const char magic[8]) { WriteBytes(magic, 8); }
  void WriteU8(uint8_t v) { WriteBytes(&v, 1); }
  void WriteU32(uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    WriteBytes(b, 4);
  }
  void WriteU64(uint64_t v) {
    WriteU32(static_cast<uint32_t>(v));
    WriteU32(static_cast<uint32_t>(v >> 32));
  }
  void WriteF32(float v) {
    uint32_t u;
    memcpy(&u, &v, 4);
    WriteU32(u);
  }
  void WriteF64(double v) {
    uint64_t u;
    memcpy(&u, &v, 8);
    WriteU64(u);
  }
  void WriteString(const std::string &s) {
    WriteU32(static_cast<uint32_t>(s.size()));
    WriteBytes(s.data(), s.size());
  }
  void WriteF32Array(const std::vector<float> &v) {
    WriteU32(static_cast<uint32_t>(v.size()));
    for (float x : v) WriteF32(x);
  }
  void WriteF64Array(const std::vector<double> &v) {
    WriteU32(static_cast<uint32_t>(v.size()));
    for (double x : v) WriteF64(x);
  }

  void Close() {
    out_.close();
    if (!out_) throw DataError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

// Little-endian binary reader; throws DataError on truncation.
class BinaryReader {
 public:
  explicit BinaryReader(const std::string &path) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) throw DataError("cannot open for reading: " + path);
  }

  void ReadBytes(void *p, size_t n) {
    in_.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n)
      throw DataError("truncated file: " + path_);
  }
  void ExpectMagic(const char magic[8]) {
    char buf[8];
    ReadBytes(buf, 8);
    if (memcmp(buf, magic, 8) != 0)
      throw DataError("bad magic in " + path_ + " (expected " +
                      std::string(magic, 8) + ")");
  }
  uint8_t ReadU8() {
    uint8_t v;
    ReadBytes(&v, 1);
    return v;
  }
  uint32_t ReadU32() {
    unsigned char b[4];
    ReadBytes(b, 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
  }
  uint64_t ReadU64() {
    uint64_t lo = ReadU32();
    uint64_t hi = ReadU32();
    return lo | (hi << 32);
  }
  float ReadF32() {
    uint32_t u = ReadU32();
    float v;
    memcpy(&v, &u, 4);
    return v;
  }
  double ReadF64() {
    uint64_t u = ReadU64();
    double v;
    memcpy(&v, &u, 8);
    return v;
  }
  std::string ReadString() {
    uint32_t n = ReadU32();
    if (n > (1u << 20)) throw DataError("oversized string in " + path_);
    std::string s(n, '\0');
    if (n) ReadBytes(s.data(), n);
    return s;
  }
  std::vector<float> ReadF32Array() {
    uint32_t n = ReadU32();
    std::vector<float> v(n);
    for (uint32_t i = 0; i < n; i++) v[i] = ReadF32();
    return v;
  }
  std::vector<double> ReadF64Array() {
    uint32_t n = ReadU32();
    std::vector<double> v(n);
    for (uint32_t i = 0; i < n; i++) v[i] = ReadF64();
    return v;
  }

  const std::string &path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

// Provenance stamp carried by every artifact file: the config hash of the
// producing command plus a hash chaining its direct inputs. Downstream
// commands use these to detect mixed-up artifact combinations.
struct Provenance {
  uint64_t config_hash = 0;
  uint64_t parent_hash = 0;

  uint64_t Ident() const { return HashCombine(config_hash, parent_hash); }
};

inline void WriteProvenance(BinaryWriter &w, const Provenance &p) {
  w.WriteU64(p.config_hash);
  w.WriteU64(p.parent_hash);
}

inline Provenance ReadProvenance(BinaryReader &r) {
  Provenance p;
  p.config_hash = r.ReadU64();
  p.parent_hash = r.ReadU64();
  return p;
}

}  // namespace patstd

#endif  // PATSTD_BINARY_IO_H_
