// patstd/include/patstd/feature.h

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

#ifndef PATSTD_FEATURE_H_
#define PATSTD_FEATURE_H_

#include <string>
#include <vector>

#include "patstd/binary-io.h"

namespace patstd {

// MFCC front-end configuration. Defaults: 25 ms window, 10 ms shift,
// pre-emphasis 0.97, 26 mel filters, 13 cepstra including C0, deltas over
// +/-2 frames, no cepstral mean normalization.
struct FeatureConfig {
  double window_sec = 0.025;
  double shift_sec = 0.010;
  double preemphasis = 0.97;
  int mel_filters = 26;
  int num_ceps = 13;
  int delta_window = 2;
  bool cmn = false;

  // Static + delta + delta-delta.
  int Dim() const { return 3 * num_ceps; }
  std::string CanonicalString() const;
};

// Per-utterance feature matrix, stored row-major (frame-major).
struct FeatureSequence {
  std::string utterance_id;
  int dim = 0;
  double frame_shift = 0.0;   // seconds
  double frame_length = 0.0;  // seconds
  std::vector<float> data;    // num_frames * dim

  int NumFrames() const {
    return dim == 0 ? 0 : static_cast<int>(data.size()) / dim;
  }
  const float *Frame(int t) const { return data.data() + (size_t)t * dim; }
  float *Frame(int t) { return data.data() + (size_t)t * dim; }
};

// 13 MFCCs (C0 included) plus first and second temporal differences, F = 39
// under the default config. Frame count is floor((samples - window)/shift)+1.
// Throws DataError if the waveform is shorter than one window.
FeatureSequence ExtractFeatures(const std::vector<float> &waveform,
                                int sample_rate, const FeatureConfig &config,
                                const std::string &utterance_id);

// Regression-based temporal differences over +/-half_window frames with
// edge replication: out[t] = sum_k k*(src[t+k]-src[t-k]) / (2*sum_k k^2).
// For a sequence linear in t the result equals its slope. Input and output
// are row-major num_frames x dim.
std::vector<double> DeltaRegression(const std::vector<double> &src,
                                    int num_frames, int dim, int half_window);

// Log mel filterbank energies per frame (pre-DCT stage of the MFCC pipeline),
// row-major num_frames x mel_filters. Exposed for inspection and tests.
std::vector<double> MelLogEnergies(const std::vector<float> &waveform,
                                   int sample_rate,
                                   const FeatureConfig &config,
                                   int *num_frames_out);

// Center frequencies (Hz) of the triangular mel filters for this config.
std::vector<double> MelFilterCenters(int sample_rate,
                                     const FeatureConfig &config);

// Feature file: 8-byte magic "PSTDFEAT", version, provenance, utterance id,
// dim, frame count, frame shift/length, then little-endian f32 frames.
void WriteFeatureFile(const std::string &path, const FeatureSequence &fs,
                      const Provenance &prov);
FeatureSequence ReadFeatureFile(const std::string &path,
                                Provenance *prov = nullptr);

}  // namespace patstd

#endif  // PATSTD_FEATURE_H_
