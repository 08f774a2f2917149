// patstd/include/patstd/common.h

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

#ifndef PATSTD_COMMON_H_
#define PATSTD_COMMON_H_

#include <cstdarg>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace patstd {

// Process exit codes shared by the CLI and the library error types.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInternal = 3,
};

// Bad user input at the command line level.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string &msg) : std::runtime_error(msg) {}
};

// Unreadable, malformed, or inconsistent data (files, manifests, artifacts).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

// A bug or numerical breakdown inside the library itself.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string &msg) : std::runtime_error(msg) {}
};

std::string StringPrintf(const char *fmt, ...)
    __attribute__((format(printf, 1, 2)));

void LogInfo(const char *fmt, ...) __attribute__((format(printf, 1, 2)));
void LogWarn(const char *fmt, ...) __attribute__((format(printf, 1, 2)));
void SetLogQuiet(bool quiet);

// FNV-1a, used for config hashes and artifact provenance.
constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
uint64_t Fnv1a(const void *data, size_t size, uint64_t h = kFnvOffset);
uint64_t Fnv1a(const std::string &s, uint64_t h = kFnvOffset);
// Keeps string literals with an explicit seed off the (data, size) overload.
uint64_t Fnv1a(const char *s, uint64_t h = kFnvOffset);
uint64_t HashCombine(uint64_t a, uint64_t b);
std::string Hex16(uint64_t h);
uint64_t ParseHex16(const std::string &s);

// Runs fn(i) for i in [0, count). With num_workers <= 1 runs inline;
// otherwise splits the range over a worker pool. Callers own determinism:
// fn must write only to slot i of pre-sized output storage.
void ParallelFor(int num_workers, int count, const std::function<void(int)> &fn);

// Formats a double so that reading it back recovers the exact value.
std::string FormatDouble(double v);

}  // namespace patstd

#endif  // PATSTD_COMMON_H_
