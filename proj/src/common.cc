// patstd/src/common.cc

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

#include "patstd/common.h"

#include <atomic>
#include <cstdio>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace patstd {

namespace {
bool g_log_quiet = false;

std::string VStringPrintf(const char *fmt, va_list ap) {
  va_list ap2;
  va_copy(ap2, ap);
  int n = vsnprintf(nullptr, 0, fmt, ap);
  std::string out(n > 0 ? n : 0, '\0');
  if (n > 0) vsnprintf(out.data(), out.size() + 1, fmt, ap2);
  va_end(ap2);
  return out;
}
}  // namespace

std::string StringPrintf(const char *fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  std::string out = VStringPrintf(fmt, ap);
  va_end(ap);
  return out;
}

void SetLogQuiet(bool quiet) { g_log_quiet = quiet; }

void LogInfo(const char *fmt, ...) {
  if (g_log_quiet) return;
  va_list ap;
  va_start(ap, fmt);
  std::string msg = VStringPrintf(fmt, ap);
  va_end(ap);
  fprintf(stderr, "[patstd] %s\n", msg.c_str());
}

void LogWarn(const char *fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  std::string msg = VStringPrintf(fmt, ap);
  va_end(ap);
  fprintf(stderr, "[patstd] WARNING: %s\n", msg.c_str());
}

uint64_t Fnv1a(const void *data, size_t size, uint64_t h) {
  const unsigned char *p = static_cast<const unsigned char *>(data);
  for (size_t i = 0; i < size; i++) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t Fnv1a(const std::string &s, uint64_t h) {
  return Fnv1a(s.data(), s.size(), h);
}

uint64_t Fnv1a(const char *s, uint64_t h) {
  return Fnv1a(s, strlen(s), h);
}

uint64_t HashCombine(uint64_t a, uint64_t b) {
  unsigned char buf[16];
  memcpy(buf, &a, 8);
  memcpy(buf + 8, &b, 8);
  return Fnv1a(buf, 16);
}

std::string Hex16(uint64_t h) { return StringPrintf("%016llx", (unsigned long long)h); }

uint64_t ParseHex16(const std::string &s) {
  return strtoull(s.c_str(), nullptr, 16);
}

void ParallelFor(int num_workers, int count,
                 const std::function<void(int)> &fn) {
  if (count <= 0) return;
  if (num_workers <= 1 || count == 1) {
    for (int i = 0; i < count; i++) fn(i);
    return;
  }
  int workers = std::min(num_workers, count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; w++) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          next.store(count);  // drain the remaining work
          return;
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string FormatDouble(double v) {
  // %.17g round-trips any double.
  std::string s = StringPrintf("%.17g", v);
  return s;
}

}  // namespace patstd
