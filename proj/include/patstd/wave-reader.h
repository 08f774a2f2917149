// patstd/include/patstd/wave-reader.h

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

#ifndef PATSTD_WAVE_READER_H_
#define PATSTD_WAVE_READER_H_

#include <string>
#include <vector>

namespace patstd {

struct Waveform {
  std::vector<float> samples;  // scaled to [-1, 1]
  int sample_rate = 0;
};

// Reads a 16-bit linear PCM RIFF WAV file. Multi-channel input keeps the
// first channel. Samples are scaled by 1/32768. Throws DataError naming the
// path for unreadable files, unsupported encodings, or zero-length audio.
Waveform ReadWav(const std::string &path);

// Writes a mono 16-bit PCM WAV (values clipped to [-1, 1]). Test support and
// corpus preparation; not part of the retrieval pipeline.
void WriteWav(const std::string &path, const std::vector<float> &samples,
              int sample_rate);

}  // namespace patstd

#endif  // PATSTD_WAVE_READER_H_
